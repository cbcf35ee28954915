#ifndef MNAR_MODELS_HPP
#define MNAR_MODELS_HPP

#include <compare>
#include <string>
#include <variant>
#include <vector>

namespace mnar {

// Latent per-stratum parameter. Layout depends on the family:
//   binomial  (pi, p)
//   poisson   (lambda, p)
//   bernoulli (theta)
//   geometric (pi, p_1, ..., p_S)
struct ThetaPoint {
  std::vector<double> coords;

  auto operator<=>(const ThetaPoint&) const = default;
};

// Binomial / Poisson response: x successes among `responders` respondents.
struct CountResponse {
  int x = 0;
  int responders = 0;
  auto operator<=>(const CountResponse&) const = default;
};

// Geometric response: category s (1-based) obtained on attempt k (1-based).
struct CategoryResponse {
  int category = 1;
  int attempts = 1;
  auto operator<=>(const CategoryResponse&) const = default;
};

struct BinaryResponse {
  int y = 0;
  auto operator<=>(const BinaryResponse&) const = default;
};

struct Nonresponse {
  auto operator<=>(const Nonresponse&) const = default;
};

// Nonresponse is the last alternative so it sorts after every response.
using Outcome =
    std::variant<CountResponse, CategoryResponse, BinaryResponse, Nonresponse>;

inline bool is_response(const Outcome& o) {
  return !std::holds_alternative<Nonresponse>(o);
}

std::string to_string(const Outcome& o);

enum class Family { Binomial, Geometric, Poisson, Bernoulli };

// Target function for the Bernoulli family: eta(theta) = theta or theta^2.
enum class BernoulliEta { Identity, Square };

std::string family_name(Family f);
// Accepts "binom"/"binomial", "geom"/"geometric", "poisson", "bernoulli".
Family parse_family(const std::string& name);

struct ModelSpec {
  Family family = Family::Binomial;
  int kappa = 1;            // binomial: units attempted per stratum
  int max_attempts = 1;     // geometric: K
  int categories = 2;       // geometric: S
  double lambda_max = 10.;  // poisson: largest grid rate, fixes the count cap
  BernoulliEta bernoulli_eta = BernoulliEta::Identity;

  static ModelSpec binomial(int kappa);
  static ModelSpec geometric(int max_attempts, int categories);
  static ModelSpec poisson(double lambda_max);
  static ModelSpec bernoulli(BernoulliEta eta = BernoulliEta::Identity);

  int eta_dim() const;
  bool has_nonresponse() const { return family != Family::Bernoulli; }
  // Throws DomainError if the design constants are out of range.
  void validate() const;
};

void validate_theta(const ModelSpec& spec, const ThetaPoint& theta);
void validate_outcome(const ModelSpec& spec, const Outcome& o);

// P(o | theta) with nonresponse observed as its own cell.
double outcome_prob_censored(const ModelSpec& spec, const ThetaPoint& theta,
                             const Outcome& o);

// P(o | theta, response). `o` must be a response.
double outcome_prob_truncated(const ModelSpec& spec, const ThetaPoint& theta,
                              const Outcome& o);

// P_theta(A^c); zero for the Bernoulli family.
double nonresponse_prob(const ModelSpec& spec, const ThetaPoint& theta);

std::vector<double> eta(const ModelSpec& spec, const ThetaPoint& theta);

// Observable h with E(h | response, theta) = eta(theta).
std::vector<double> h_value(const ModelSpec& spec, const Outcome& o);

// Every observable outcome in canonical (sorted) order. Poisson counts are
// cut at poisson_count_cap(spec).
std::vector<Outcome> enumerate_outcomes(const ModelSpec& spec);

// Largest responder count enumerated for the Poisson family:
// ceil(lambda_max + 10 sqrt(lambda_max)), raised until the tail mass beyond
// it at lambda_max drops below kPoissonLeakTolerance.
int poisson_count_cap(const ModelSpec& spec);

// Probability mass of responder counts above the cap at rate `lambda`.
double poisson_leaked_mass(const ModelSpec& spec, double lambda);

inline constexpr double kPoissonLeakTolerance = 1e-12;

}  // namespace mnar

#endif  // MNAR_MODELS_HPP
