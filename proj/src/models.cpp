#include "mnar/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mnar/errors.hpp"

namespace mnar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// k * log(p) with the convention 0 * log(0) = 0.
double xlogy(int k, double p) {
  if (k == 0) return 0.0;
  if (p <= 0.0) return kNegInf;
  return k * std::log(p);
}

double log_factorial(int n) {
  double s = 0.0;
  for (int i = 2; i <= n; ++i) s += std::log(static_cast<double>(i));
  return s;
}

double log_choose(int n, int k) {
  k = std::min(k, n - k);
  double s = 0.0;
  for (int i = 1; i <= k; ++i)
    s += std::log(static_cast<double>(n - k + i) / static_cast<double>(i));
  return s;
}

double log_binom_pmf(int n, int k, double p) {
  return log_choose(n, k) + xlogy(k, p) + xlogy(n - k, 1.0 - p);
}

double log_poisson_pmf(int k, double lambda) {
  return xlogy(k, lambda) - lambda - log_factorial(k);
}

double safe_exp(double log_p) { return log_p == kNegInf ? 0.0 : std::exp(log_p); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

[[noreturn]] void wrong_outcome(const ModelSpec& spec, const Outcome& o) {
  throw DomainError("outcome " + to_string(o) + " is not valid for the " +
                    family_name(spec.family) + " family");
}

// Sum of Poisson(lambda) mass strictly above `cap`, summed term by term so
// tiny tails are not lost to cancellation in 1 - cdf.
double poisson_tail(double lambda, int cap) {
  double total = 0.0;
  for (int k = cap + 1;; ++k) {
    const double term = safe_exp(log_poisson_pmf(k, lambda));
    total += term;
    if (k > lambda && term < total * 1e-17) break;
    if (term == 0.0 && k > lambda) break;
  }
  return total;
}

// Log of the censored probability; assumes validated inputs.
double log_prob_censored(const ModelSpec& spec, const ThetaPoint& theta,
                         const Outcome& o) {
  const auto& c = theta.coords;
  switch (spec.family) {
    case Family::Binomial: {
      const double pi = c[0], p = c[1];
      if (std::holds_alternative<Nonresponse>(o)) return xlogy(spec.kappa, 1.0 - pi);
      const auto& r = std::get<CountResponse>(o);
      return log_binom_pmf(spec.kappa, r.responders, pi) +
             log_binom_pmf(r.responders, r.x, p);
    }
    case Family::Poisson: {
      const double lambda = c[0], p = c[1];
      if (std::holds_alternative<Nonresponse>(o)) return -lambda;
      const auto& r = std::get<CountResponse>(o);
      return log_poisson_pmf(r.responders, lambda) + log_binom_pmf(r.responders, r.x, p);
    }
    case Family::Geometric: {
      const double pi = c[0];
      if (std::holds_alternative<Nonresponse>(o)) return xlogy(spec.max_attempts, 1.0 - pi);
      const auto& r = std::get<CategoryResponse>(o);
      return std::log(pi) + xlogy(r.attempts - 1, 1.0 - pi) + std::log(c[r.category]);
    }
    case Family::Bernoulli: {
      const int y = std::get<BinaryResponse>(o).y;
      return xlogy(y, c[0]) + xlogy(1 - y, 1.0 - c[0]);
    }
  }
  return kNegInf;
}

}  // namespace

std::string to_string(const Outcome& o) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CountResponse>)
          out << "(x=" << v.x << ",responders=" << v.responders << ")";
        else if constexpr (std::is_same_v<T, CategoryResponse>)
          out << "(s=" << v.category << ",k=" << v.attempts << ")";
        else if constexpr (std::is_same_v<T, BinaryResponse>)
          out << "(y=" << v.y << ")";
        else
          out << "nonresponse";
      },
      o);
  return out.str();
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Binomial: return "binom";
    case Family::Geometric: return "geom";
    case Family::Poisson: return "poisson";
    case Family::Bernoulli: return "bernoulli";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "binom" || name == "binomial") return Family::Binomial;
  if (name == "geom" || name == "geometric") return Family::Geometric;
  if (name == "poisson") return Family::Poisson;
  if (name == "bernoulli") return Family::Bernoulli;
  throw DomainError("unknown model family '" + name + "'");
}

ModelSpec ModelSpec::binomial(int kappa) {
  ModelSpec s;
  s.family = Family::Binomial;
  s.kappa = kappa;
  s.validate();
  return s;
}

ModelSpec ModelSpec::geometric(int max_attempts, int categories) {
  ModelSpec s;
  s.family = Family::Geometric;
  s.max_attempts = max_attempts;
  s.categories = categories;
  s.validate();
  return s;
}

ModelSpec ModelSpec::poisson(double lambda_max) {
  ModelSpec s;
  s.family = Family::Poisson;
  s.lambda_max = lambda_max;
  s.validate();
  return s;
}

ModelSpec ModelSpec::bernoulli(BernoulliEta eta) {
  ModelSpec s;
  s.family = Family::Bernoulli;
  s.bernoulli_eta = eta;
  return s;
}

int ModelSpec::eta_dim() const {
  return family == Family::Geometric ? categories : 1;
}

void ModelSpec::validate() const {
  switch (family) {
    case Family::Binomial:
      if (kappa < 1) throw DomainError("binomial kappa must be >= 1");
      break;
    case Family::Geometric:
      if (max_attempts < 1) throw DomainError("geometric K must be >= 1");
      if (categories < 2) throw DomainError("geometric S must be >= 2");
      break;
    case Family::Poisson:
      if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
        throw DomainError("poisson lambda_max must be positive and finite");
      break;
    case Family::Bernoulli:
      break;
  }
}

void validate_theta(const ModelSpec& spec, const ThetaPoint& theta) {
  const auto& c = theta.coords;
  auto fail = [&](const std::string& why) {
    throw DomainError("theta out of domain for " + family_name(spec.family) + ": " + why);
  };
  for (double v : c)
    if (std::isnan(v)) fail("NaN coordinate");
  switch (spec.family) {
    case Family::Binomial:
      if (c.size() != 2) fail("expected (pi, p)");
      if (!in_unit(c[0]) || !in_unit(c[1])) fail("pi and p must lie in [0,1]");
      break;
    case Family::Poisson:
      if (c.size() != 2) fail("expected (lambda, p)");
      if (!(c[0] > 0.0) || !std::isfinite(c[0])) fail("lambda must be positive");
      if (!in_unit(c[1])) fail("p must lie in [0,1]");
      break;
    case Family::Bernoulli:
      if (c.size() != 1) fail("expected (theta)");
      if (!in_unit(c[0])) fail("theta must lie in [0,1]");
      break;
    case Family::Geometric: {
      if (c.size() != static_cast<std::size_t>(spec.categories) + 1)
        fail("expected (pi, p_1..p_S)");
      if (!in_unit(c[0])) fail("pi must lie in [0,1]");
      double sum = 0.0;
      for (std::size_t s = 1; s < c.size(); ++s) {
        if (!in_unit(c[s])) fail("category probabilities must lie in [0,1]");
        sum += c[s];
      }
      if (std::abs(sum - 1.0) > 1e-12) fail("category probabilities must sum to 1");
      break;
    }
  }
}

void validate_outcome(const ModelSpec& spec, const Outcome& o) {
  if (std::holds_alternative<Nonresponse>(o)) {
    if (!spec.has_nonresponse()) wrong_outcome(spec, o);
    return;
  }
  switch (spec.family) {
    case Family::Binomial:
    case Family::Poisson: {
      const auto* r = std::get_if<CountResponse>(&o);
      if (r == nullptr) wrong_outcome(spec, o);
      const int cap = spec.family == Family::Binomial ? spec.kappa
                                                      : std::numeric_limits<int>::max();
      if (r->responders < 1 || r->responders > cap || r->x < 0 || r->x > r->responders)
        wrong_outcome(spec, o);
      break;
    }
    case Family::Geometric: {
      const auto* r = std::get_if<CategoryResponse>(&o);
      if (r == nullptr || r->category < 1 || r->category > spec.categories ||
          r->attempts < 1 || r->attempts > spec.max_attempts)
        wrong_outcome(spec, o);
      break;
    }
    case Family::Bernoulli: {
      const auto* r = std::get_if<BinaryResponse>(&o);
      if (r == nullptr || (r->y != 0 && r->y != 1)) wrong_outcome(spec, o);
      break;
    }
  }
}

double outcome_prob_censored(const ModelSpec& spec, const ThetaPoint& theta,
                             const Outcome& o) {
  validate_theta(spec, theta);
  validate_outcome(spec, o);
  return safe_exp(log_prob_censored(spec, theta, o));
}

double nonresponse_prob(const ModelSpec& spec, const ThetaPoint& theta) {
  if (!spec.has_nonresponse()) {
    validate_theta(spec, theta);
    return 0.0;
  }
  return outcome_prob_censored(spec, theta, Nonresponse{});
}

double outcome_prob_truncated(const ModelSpec& spec, const ThetaPoint& theta,
                              const Outcome& o) {
  if (!is_response(o))
    throw ContractViolation("truncated probability requested for the nonresponse cell");
  const double censored = outcome_prob_censored(spec, theta, o);
  const double respond = 1.0 - nonresponse_prob(spec, theta);
  if (!(respond > 0.0))
    throw SingularParameter("response probability is zero at this theta");
  return censored / respond;
}

std::vector<double> eta(const ModelSpec& spec, const ThetaPoint& theta) {
  validate_theta(spec, theta);
  const auto& c = theta.coords;
  switch (spec.family) {
    case Family::Binomial:
    case Family::Poisson:
      return {c[1]};
    case Family::Geometric:
      return {c.begin() + 1, c.end()};
    case Family::Bernoulli:
      return {spec.bernoulli_eta == BernoulliEta::Identity ? c[0] : c[0] * c[0]};
  }
  return {};
}

std::vector<double> h_value(const ModelSpec& spec, const Outcome& o) {
  if (!is_response(o)) throw ContractViolation("h is undefined on nonresponse");
  validate_outcome(spec, o);
  switch (spec.family) {
    case Family::Binomial:
    case Family::Poisson: {
      const auto& r = std::get<CountResponse>(o);
      return {static_cast<double>(r.x) / r.responders};
    }
    case Family::Geometric: {
      std::vector<double> v(spec.categories, 0.0);
      v[std::get<CategoryResponse>(o).category - 1] = 1.0;
      return v;
    }
    case Family::Bernoulli:
      if (spec.bernoulli_eta == BernoulliEta::Square)
        throw UnsupportedError("no unbiased h exists for eta(theta) = theta^2");
      return {static_cast<double>(std::get<BinaryResponse>(o).y)};
  }
  return {};
}

std::vector<Outcome> enumerate_outcomes(const ModelSpec& spec) {
  spec.validate();
  std::vector<Outcome> out;
  switch (spec.family) {
    case Family::Binomial:
    case Family::Poisson: {
      const int cap = spec.family == Family::Binomial ? spec.kappa : poisson_count_cap(spec);
      for (int r = 1; r <= cap; ++r)
        for (int x = 0; x <= r; ++x) out.emplace_back(CountResponse{x, r});
      break;
    }
    case Family::Geometric:
      for (int s = 1; s <= spec.categories; ++s)
        for (int k = 1; k <= spec.max_attempts; ++k) out.emplace_back(CategoryResponse{s, k});
      break;
    case Family::Bernoulli:
      out.emplace_back(BinaryResponse{0});
      out.emplace_back(BinaryResponse{1});
      break;
  }
  if (spec.has_nonresponse()) out.emplace_back(Nonresponse{});
  std::sort(out.begin(), out.end());
  return out;
}

int poisson_count_cap(const ModelSpec& spec) {
  spec.validate();
  const double lm = spec.lambda_max;
  int cap = static_cast<int>(std::ceil(lm + 10.0 * std::sqrt(lm)));
  while (poisson_tail(lm, cap) >= kPoissonLeakTolerance) ++cap;
  return cap;
}

double poisson_leaked_mass(const ModelSpec& spec, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return poisson_tail(lambda, poisson_count_cap(spec));
}

}  // namespace mnar
