#include "mnar/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "mnar/errors.hpp"

namespace mnar {

std::vector<double> eta_gmle(const ModelSpec& spec, const SupportGrid& grid,
                             std::span<const double> w) {
  if (w.size() != grid.size()) throw ContractViolation("weights do not match grid size");
  std::vector<double> out(static_cast<std::size_t>(spec.eta_dim()), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (w[k] == 0.0) continue;
    const auto e = eta(spec, grid.points[k]);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[k] * e[j];
  }
  return out;
}

std::optional<std::vector<double>> naive(const ModelSpec& spec, const ObservationSet& obs) {
  std::vector<double> sum(static_cast<std::size_t>(spec.eta_dim()), 0.0);
  long responders = 0;
  for (std::size_t d = 0; d < obs.distinct.size(); ++d) {
    if (!is_response(obs.distinct[d])) continue;
    const auto h = h_value(spec, obs.distinct[d]);
    for (std::size_t j = 0; j < sum.size(); ++j)
      sum[j] += static_cast<double>(obs.counts[d]) * h[j];
    responders += obs.counts[d];
  }
  if (responders == 0) return std::nullopt;
  for (double& v : sum) v /= static_cast<double>(responders);
  return sum;
}

std::vector<double> posterior_eta(const ModelSpec& spec, const SupportGrid& grid,
                                  std::span<const double> w, const LikelihoodMatrix& L,
                                  std::size_t d) {
  if (w.size() != grid.size() || L.cols() != grid.size())
    throw ContractViolation("weights, grid and likelihood matrix disagree on size");
  const double marginal = marginal_at(L, w, d);
  if (!(marginal > 0.0))
    throw UndefinedPosterior("posterior undefined: outcome " + std::to_string(d) +
                             " has zero marginal probability");
  std::vector<double> out(static_cast<std::size_t>(spec.eta_dim()), 0.0);
  const auto row = L.row(d);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double mass = w[k] * row[k];
    if (mass == 0.0) continue;
    const auto e = eta(spec, grid.points[k]);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += mass * e[j];
  }
  for (double& v : out) v /= marginal;
  return out;
}

double posterior_identity_gap(const ModelSpec& spec, const SupportGrid& grid,
                              std::span<const double> w, const LikelihoodMatrix& L,
                              std::span<const long> counts) {
  if (counts.size() != L.rows()) throw ContractViolation("counts do not match likelihood rows");
  const auto plug_in = eta_gmle(spec, grid, w);
  std::vector<double> avg(plug_in.size(), 0.0);
  double n = 0.0;
  for (std::size_t d = 0; d < L.rows(); ++d) {
    const auto post = posterior_eta(spec, grid, w, L, d);
    for (std::size_t j = 0; j < avg.size(); ++j)
      avg[j] += static_cast<double>(counts[d]) * post[j];
    n += static_cast<double>(counts[d]);
  }
  double gap = 0.0;
  for (std::size_t j = 0; j < avg.size(); ++j)
    gap = std::max(gap, std::abs(avg[j] / n - plug_in[j]));
  return gap;
}

EstimateReport make_estimate_report(const ModelSpec& spec, const SupportGrid& grid,
                                    std::span<const double> w, const ObservationSet& obs) {
  EstimateReport r;
  r.eta_hat = eta_gmle(spec, grid, w);
  r.naive = naive(spec, obs);
  for (std::size_t d = 0; d < obs.distinct.size(); ++d) {
    if (is_response(obs.distinct[d])) r.n_responders += obs.counts[d];
    r.n_total += obs.counts[d];
  }
  return r;
}

}  // namespace mnar
