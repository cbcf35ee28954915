#ifndef MNAR_ESTIMATORS_HPP
#define MNAR_ESTIMATORS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mnar/gmle.hpp"
#include "mnar/models.hpp"

namespace mnar {

struct EstimateReport {
  std::vector<double> eta_hat;
  std::optional<std::vector<double>> naive;  // absent when nobody responded
  long n_responders = 0;
  long n_total = 0;
};

// Plug-in estimate E_w eta(theta) = sum_k w_k eta(theta_k).
std::vector<double> eta_gmle(const ModelSpec& spec, const SupportGrid& grid,
                             std::span<const double> w);

// Responder-only average of h; ignores nonresponse as if missing at random.
std::optional<std::vector<double>> naive(const ModelSpec& spec, const ObservationSet& obs);

// E_w(eta(theta) | outcome d).
std::vector<double> posterior_eta(const ModelSpec& spec, const SupportGrid& grid,
                                  std::span<const double> w, const LikelihoodMatrix& L,
                                  std::size_t d);

// Max-norm distance between eta_gmle and the count-weighted mean of the
// per-outcome posterior means. Vanishes at a GMLE.
double posterior_identity_gap(const ModelSpec& spec, const SupportGrid& grid,
                              std::span<const double> w, const LikelihoodMatrix& L,
                              std::span<const long> counts);

EstimateReport make_estimate_report(const ModelSpec& spec, const SupportGrid& grid,
                                    std::span<const double> w, const ObservationSet& obs);

}  // namespace mnar

#endif  // MNAR_ESTIMATORS_HPP
