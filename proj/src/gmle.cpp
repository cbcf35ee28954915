#include "mnar/gmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mnar/errors.hpp"

namespace mnar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Uniform in (0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Dot product with four interleaved partial sums. The reduction order is
// fixed, so results are bitwise reproducible while still vectorizing.
double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

void marginals(const LikelihoodMatrix& L, std::span<const double> w,
               std::vector<double>& f) {
  f.assign(L.rows(), 0.0);
  for (std::size_t d = 0; d < L.rows(); ++d) f[d] = dot(w, L.row(d));
}

double loglik_from_marginals(std::span<const long> counts, const std::vector<double>& f) {
  double ll = 0.0;
  for (std::size_t d = 0; d < f.size(); ++d) {
    if (!(f[d] > 0.0)) return kNegInf;
    ll += static_cast<double>(counts[d]) * std::log(f[d]);
  }
  return ll;
}

// g_k = (1/n) sum_d c_d L[d][k] / f_d, accumulated in fixed row order.
void ratios_from_marginals(const LikelihoodMatrix& L, std::span<const long> counts,
                           const std::vector<double>& f, double n, std::vector<double>& g) {
  g.assign(L.cols(), 0.0);
  for (std::size_t d = 0; d < L.rows(); ++d) {
    const double scale = static_cast<double>(counts[d]) / (n * f[d]);
    const auto row = L.row(d);
    for (std::size_t k = 0; k < row.size(); ++k) g[k] += scale * row[k];
  }
}

double total_count(std::span<const long> counts) {
  long n = 0;
  for (long c : counts) {
    if (c <= 0) throw ContractViolation("observation counts must be positive");
    n += c;
  }
  return static_cast<double>(n);
}

void check_dims(const LikelihoodMatrix& L, std::span<const long> counts,
                std::span<const double> w) {
  if (counts.size() != L.rows())
    throw ContractViolation("counts length does not match likelihood rows");
  if (w.size() != L.cols())
    throw ContractViolation("weights length does not match likelihood columns");
}

// Lower side of the fixed-point condition: atoms that still carry weight
// must not be draining. The certificate alone only bounds g from above.
bool settled(const std::vector<double>& w, const std::vector<double>& g, double tol) {
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k] > kSettledWeight && g[k] < 1.0 - kSettledSlack * tol) return false;
  return true;
}

void normalize(std::vector<double>& w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
}

}  // namespace

std::string mode_name(Mode m) { return m == Mode::Truncated ? "truncated" : "censored"; }

Mode parse_mode(const std::string& name) {
  if (name == "truncated") return Mode::Truncated;
  if (name == "censored") return Mode::Censored;
  throw DomainError("unknown mode '" + name + "' (expected truncated or censored)");
}

void SupportGrid::validate(const ModelSpec& spec) const {
  if (points.empty()) throw DomainError("support grid is empty");
  for (const auto& p : points) validate_theta(spec, p);
  std::vector<const ThetaPoint*> sorted;
  sorted.reserve(points.size());
  for (const auto& p : points) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const ThetaPoint* a, const ThetaPoint* b) { return *a < *b; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (*sorted[i] == *sorted[i - 1]) throw DomainError("support grid has duplicate points");
}

long ObservationSet::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

long ObservationSet::count_of(const Outcome& o) const {
  for (std::size_t d = 0; d < distinct.size(); ++d)
    if (distinct[d] == o) return counts[d];
  return 0;
}

void ObservationSet::validate(const ModelSpec& spec) const {
  if (distinct.size() != counts.size())
    throw ContractViolation("observation set has mismatched outcome/count lengths");
  for (std::size_t d = 0; d < distinct.size(); ++d) {
    validate_outcome(spec, distinct[d]);
    if (counts[d] <= 0) throw ContractViolation("observation counts must be positive");
    if (mode == Mode::Truncated && !is_response(distinct[d]))
      throw ContractViolation("truncated observation set contains nonresponse");
    if (d > 0 && !(distinct[d - 1] < distinct[d]))
      throw ContractViolation("observation outcomes must be distinct and sorted");
  }
}

ObservationSet ObservationSet::from_outcomes(std::span<const Outcome> outcomes, Mode mode) {
  std::map<Outcome, long> tally;
  for (const auto& o : outcomes) {
    if (mode == Mode::Truncated && !is_response(o)) continue;
    ++tally[o];
  }
  ObservationSet obs;
  obs.mode = mode;
  for (const auto& [o, c] : tally) {
    obs.distinct.push_back(o);
    obs.counts.push_back(c);
  }
  return obs;
}

LikelihoodMatrix::LikelihoodMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

LikelihoodMatrix::LikelihoodMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_)
    throw ContractViolation("likelihood matrix value count does not match dimensions");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractViolation("likelihood entries must be finite and nonnegative");
}

LikelihoodMatrix LikelihoodMatrix::permute_columns(std::span<const std::size_t> perm) const {
  if (perm.size() != cols_) throw ContractViolation("permutation length mismatch");
  LikelihoodMatrix out(rows_, cols_);
  for (std::size_t d = 0; d < rows_; ++d)
    for (std::size_t k = 0; k < cols_; ++k) out(d, k) = (*this)(d, perm[k]);
  return out;
}

LikelihoodMatrix build_likelihood_matrix(const ModelSpec& spec, const SupportGrid& grid,
                                         const ObservationSet& obs) {
  spec.validate();
  grid.validate(spec);
  obs.validate(spec);
  const std::size_t D = obs.distinct.size();
  const std::size_t m = grid.size();
  LikelihoodMatrix L(D, m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& theta = grid.points[k];
    double respond = 1.0;
    if (obs.mode == Mode::Truncated) {
      respond = 1.0 - nonresponse_prob(spec, theta);
      if (!(respond > 0.0))
        throw SingularParameter("grid point " + std::to_string(k) +
                                " has zero response probability in truncated mode");
    }
    for (std::size_t d = 0; d < D; ++d) {
      const double p = outcome_prob_censored(spec, theta, obs.distinct[d]);
      const double v = obs.mode == Mode::Truncated ? p / respond : p;
      L(d, k) = v < std::numeric_limits<double>::min() ? 0.0 : v;
    }
  }
  for (std::size_t d = 0; d < D; ++d) {
    const auto row = L.row(d);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }))
      throw ImpossibleOutcome("outcome " + to_string(obs.distinct[d]) +
                              " has zero probability at every grid point");
  }
  return L;
}

GmleSolution em_fit(const LikelihoodMatrix& L, std::span<const long> counts,
                    const MixtureWeights& init, const EmOptions& options) {
  check_dims(L, counts, init);
  if (!(options.tol > 0.0)) throw ContractViolation("EM tolerance must be positive");
  if (options.max_iter < 0) throw ContractViolation("max_iter must be nonnegative");
  double init_sum = 0.0;
  for (double v : init) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractViolation("initial weights must be finite and nonnegative");
    init_sum += v;
  }
  if (std::abs(init_sum - 1.0) > 1e-9) throw ContractViolation("initial weights must sum to 1");

  const double n = total_count(counts);
  GmleSolution sol;
  MixtureWeights w = init;
  normalize(w);
  std::vector<double> f;
  std::vector<double> g;

  for (;;) {
    marginals(L, w, f);
    const double ll = loglik_from_marginals(counts, f);
    if (!std::isfinite(ll))
      throw NumericalFailure("log-likelihood is not finite: an observed outcome has zero "
                             "marginal under the current weights");
    if (options.record_trajectory) sol.trajectory.push_back(ll);
    ratios_from_marginals(L, counts, f, n, g);
    const double cert = *std::max_element(g.begin(), g.end()) - 1.0;
    if (cert <= options.tol && settled(w, g, options.tol)) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= options.max_iter) break;
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] *= g[k];
      // Subnormal weights carry no information and slow the arithmetic.
      if (w[k] < std::numeric_limits<double>::min()) w[k] = 0.0;
    }
    normalize(w);
    ++sol.iterations;
  }

  for (double& v : w)
    if (v < kWeightFloor) v = 0.0;
  normalize(w);
  marginals(L, w, f);
  sol.loglik = loglik_from_marginals(counts, f);
  if (!std::isfinite(sol.loglik))
    throw NumericalFailure("log-likelihood is not finite after weight truncation");
  ratios_from_marginals(L, counts, f, n, g);
  sol.certificate = *std::max_element(g.begin(), g.end()) - 1.0;
  sol.weights = std::move(w);
  return sol;
}

GmleSolution em_fit(const LikelihoodMatrix& L, std::span<const long> counts,
                    const EmOptions& options) {
  return em_fit(L, counts, uniform_weights(L.cols()), options);
}

MixtureWeights uniform_weights(std::size_t m) {
  if (m == 0) throw ContractViolation("cannot build weights over an empty grid");
  return MixtureWeights(m, 1.0 / static_cast<double>(m));
}

MixtureWeights random_weights(std::size_t m, std::mt19937_64& rng) {
  if (m == 0) throw ContractViolation("cannot build weights over an empty grid");
  MixtureWeights w(m);
  for (double& v : w) v = -std::log(open_uniform(rng));
  normalize(w);
  return w;
}

std::vector<GmleSolution> em_fit_multistart(const LikelihoodMatrix& L,
                                            std::span<const long> counts, int starts,
                                            std::uint64_t seed, const EmOptions& options) {
  if (starts < 1) throw ContractViolation("need at least one start");
  std::mt19937_64 rng(seed);
  std::vector<GmleSolution> out;
  out.reserve(static_cast<std::size_t>(starts));
  for (int s = 0; s < starts; ++s) out.push_back(em_fit(L, counts, random_weights(L.cols(), rng), options));
  return out;
}

double marginal_at(const LikelihoodMatrix& L, std::span<const double> w, std::size_t d) {
  if (d >= L.rows()) throw ContractViolation("outcome index out of range");
  if (w.size() != L.cols()) throw ContractViolation("weights length does not match columns");
  return dot(w, L.row(d));
}

double log_likelihood(const LikelihoodMatrix& L, std::span<const long> counts,
                      std::span<const double> w) {
  check_dims(L, counts, w);
  std::vector<double> f;
  marginals(L, w, f);
  return loglik_from_marginals(counts, f);
}

std::vector<double> gradient_ratios(const LikelihoodMatrix& L, std::span<const long> counts,
                                    std::span<const double> w) {
  check_dims(L, counts, w);
  const double n = total_count(counts);
  std::vector<double> f;
  marginals(L, w, f);
  for (double v : f)
    if (!(v > 0.0)) throw NumericalFailure("zero marginal on an observed outcome");
  std::vector<double> g;
  ratios_from_marginals(L, counts, f, n, g);
  return g;
}

double optimality_certificate(const LikelihoodMatrix& L, std::span<const long> counts,
                              std::span<const double> w) {
  const auto g = gradient_ratios(L, counts, w);
  return *std::max_element(g.begin(), g.end()) - 1.0;
}

SupportGrid default_grid(const ModelSpec& spec, int resolution) {
  spec.validate();
  if (resolution < 2) throw DomainError("grid resolution must be >= 2");
  const double r = resolution;
  auto lattice = [resolution](double lo, double hi) {
    std::vector<double> v(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) v[i] = lo + (hi - lo) * i / (resolution - 1);
    return v;
  };

  double expected = 0.0;
  switch (spec.family) {
    case Family::Bernoulli: expected = r; break;
    case Family::Binomial:
    case Family::Poisson: expected = r * r; break;
    case Family::Geometric: {
      // r choices of pi times C(r - 1 + S - 1, S - 1) simplex points.
      double simplex = 1.0;
      for (int i = 1; i < spec.categories; ++i) simplex *= (r - 1 + i) / i;
      expected = r * simplex;
      break;
    }
  }
  if (expected > static_cast<double>(kMaxGridPoints))
    throw CapacityError("grid would have " + std::to_string(static_cast<long long>(expected)) +
                        " points; limit is " + std::to_string(kMaxGridPoints));

  SupportGrid grid;
  grid.provenance = "default:" + family_name(spec.family) + ":" + std::to_string(resolution);
  const auto unit = lattice(0.01, 0.99);
  switch (spec.family) {
    case Family::Bernoulli:
      for (double t : unit) grid.points.push_back({{t}});
      break;
    case Family::Binomial:
      for (double pi : unit)
        for (double p : unit) grid.points.push_back({{pi, p}});
      break;
    case Family::Poisson: {
      if (!(spec.lambda_max > 0.05)) throw DomainError("poisson lambda_max must exceed 0.05");
      const auto logs = lattice(std::log(0.05), std::log(spec.lambda_max));
      for (double ll : logs) {
        const double lambda = std::exp(ll);
        for (double p : unit) grid.points.push_back({{lambda, p}});
      }
      const double leaked = poisson_leaked_mass(spec, spec.lambda_max);
      if (!(leaked < kPoissonLeakTolerance))
        throw CapacityError("poisson count cap leaks more than the allowed tail mass");
      break;
    }
    case Family::Geometric: {
      const int S = spec.categories;
      const double floor_p = std::min(0.01, 0.5 / S);
      const double span = 1.0 - S * floor_p;
      std::vector<int> parts(static_cast<std::size_t>(S), 0);
      std::vector<std::vector<double>> simplex;
      // All compositions of (resolution - 1) into S nonnegative parts.
      auto recurse = [&](auto&& self, int idx, int remaining) -> void {
        if (idx == S - 1) {
          parts[idx] = remaining;
          std::vector<double> p(static_cast<std::size_t>(S));
          for (int s = 0; s < S; ++s) p[s] = floor_p + span * parts[s] / (resolution - 1);
          simplex.push_back(std::move(p));
          return;
        }
        for (int j = remaining; j >= 0; --j) {
          parts[idx] = j;
          self(self, idx + 1, remaining - j);
        }
      };
      recurse(recurse, 0, resolution - 1);
      for (double pi : unit)
        for (const auto& p : simplex) {
          ThetaPoint t;
          t.coords.push_back(pi);
          t.coords.insert(t.coords.end(), p.begin(), p.end());
          grid.points.push_back(std::move(t));
        }
      break;
    }
  }
  return grid;
}

std::size_t heaviest_atom(std::span<const double> w) {
  if (w.empty()) throw ContractViolation("empty weight vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < w.size(); ++k)
    if (w[k] > w[best]) best = k;
  return best;
}

}  // namespace mnar
