#ifndef MNAR_GMLE_HPP
#define MNAR_GMLE_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mnar/models.hpp"

namespace mnar {

enum class Mode { Truncated, Censored };

std::string mode_name(Mode m);
Mode parse_mode(const std::string& name);

// Candidate support of the mixing distribution.
struct SupportGrid {
  std::vector<ThetaPoint> points;
  std::string provenance;

  std::size_t size() const { return points.size(); }
  // Non-empty, pairwise distinct, every point in the model's domain.
  void validate(const ModelSpec& spec) const;
};

// Probability vector over the grid points.
using MixtureWeights = std::vector<double>;

// Distinct observed outcomes with their multiplicities.
struct ObservationSet {
  std::vector<Outcome> distinct;
  std::vector<long> counts;
  Mode mode = Mode::Censored;

  long total() const;
  long count_of(const Outcome& o) const;
  void validate(const ModelSpec& spec) const;

  // Aggregates raw per-stratum outcomes into canonical sorted order.
  static ObservationSet from_outcomes(std::span<const Outcome> outcomes, Mode mode);
};

// Row-major D x m matrix of P(outcome d | theta_k).
class LikelihoodMatrix {
 public:
  LikelihoodMatrix() = default;
  LikelihoodMatrix(std::size_t rows, std::size_t cols);
  LikelihoodMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t d, std::size_t k) const { return values_[d * cols_ + k]; }
  double& operator()(std::size_t d, std::size_t k) { return values_[d * cols_ + k]; }
  std::span<const double> row(std::size_t d) const {
    return {values_.data() + d * cols_, cols_};
  }

  // Same matrix with columns reordered: column k of the result is column
  // perm[k] of this one.
  LikelihoodMatrix permute_columns(std::span<const std::size_t> perm) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// L[d][k] = outcome_prob_{obs.mode}(spec, grid[k], obs.distinct[d]).
// Throws ImpossibleOutcome if some observed outcome has zero probability on
// the whole grid.
LikelihoodMatrix build_likelihood_matrix(const ModelSpec& spec, const SupportGrid& grid,
                                         const ObservationSet& obs);

struct EmOptions {
  double tol = 1e-6;
  long max_iter = 200000;
  // Keep the log-likelihood of every iterate in GmleSolution::trajectory.
  bool record_trajectory = false;
};

struct GmleSolution {
  MixtureWeights weights;
  double loglik = 0.0;
  // max_k (1/n) sum_d c_d L[d][k] / f_w(d) - 1, evaluated at `weights`.
  double certificate = 0.0;
  long iterations = 0;
  bool converged = false;
  std::vector<double> trajectory;
};

inline constexpr double kWeightFloor = 1e-12;
inline constexpr double kSettledWeight = 1e-8;
inline constexpr double kSettledSlack = 10.0;

// Plain EM fixed-point iteration for the grid GMLE:
//   w_k <- w_k * (1/n) sum_d c_d L[d][k] / f_w(d).
// Converged once the certificate is <= tol and every atom heavier than
// kSettledWeight has ratio >= 1 - kSettledSlack * tol. Weights below
// kWeightFloor are zeroed and the rest renormalized before reporting.
GmleSolution em_fit(const LikelihoodMatrix& L, std::span<const long> counts,
                    const MixtureWeights& init, const EmOptions& options = {});

GmleSolution em_fit(const LikelihoodMatrix& L, std::span<const long> counts,
                    const EmOptions& options = {});

MixtureWeights uniform_weights(std::size_t m);

// Dirichlet(1, ..., 1) draw; strictly positive.
MixtureWeights random_weights(std::size_t m, std::mt19937_64& rng);

// Runs EM from `starts` random strictly positive initial points.
std::vector<GmleSolution> em_fit_multistart(const LikelihoodMatrix& L,
                                            std::span<const long> counts, int starts,
                                            std::uint64_t seed, const EmOptions& options = {});

double marginal_at(const LikelihoodMatrix& L, std::span<const double> w, std::size_t d);

// sum_d c_d log f_w(d), or -infinity if some observed outcome has zero
// marginal.
double log_likelihood(const LikelihoodMatrix& L, std::span<const long> counts,
                      std::span<const double> w);

// (1/n) sum_d c_d L[d][k] / f_w(d) for every k.
std::vector<double> gradient_ratios(const LikelihoodMatrix& L, std::span<const long> counts,
                                    std::span<const double> w);

double optimality_certificate(const LikelihoodMatrix& L, std::span<const long> counts,
                              std::span<const double> w);

inline constexpr std::size_t kMaxGridPoints = 1000000;

// binom/bernoulli: uniform lattice on [0.01, 0.99] per coordinate.
// poisson: lambda log-spaced on [0.05, lambda_max] x uniform p.
// geom: uniform pi x simplex lattice for (p_s) with every p_s >= 0.01.
SupportGrid default_grid(const ModelSpec& spec, int resolution);

// Index of the heaviest atom; ties go to the lowest index.
std::size_t heaviest_atom(std::span<const double> w);

}  // namespace mnar

#endif  // MNAR_GMLE_HPP
