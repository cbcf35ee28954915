#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mnar/errors.hpp"
#include "mnar/estimators.hpp"
#include "mnar/gmle.hpp"
#include "mnar/simulation.hpp"

using namespace mnar;

namespace {

SupportGrid grid_of(std::vector<std::vector<double>> pts) {
  SupportGrid g;
  for (auto& p : pts) g.points.push_back(ThetaPoint{std::move(p)});
  g.provenance = "test";
  return g;
}

ObservationSet obs_of(std::vector<Outcome> distinct, std::vector<long> counts,
                      Mode mode = Mode::Censored) {
  ObservationSet o;
  o.distinct = std::move(distinct);
  o.counts = std::move(counts);
  o.mode = mode;
  return o;
}

double direct_loglik(const LikelihoodMatrix& L, const std::vector<long>& c,
                     const std::vector<double>& w) {
  double ll = 0.0;
  for (std::size_t d = 0; d < L.rows(); ++d) {
    double f = 0.0;
    for (std::size_t k = 0; k < L.cols(); ++k) f += w[k] * L(d, k);
    ll += c[d] * std::log(f);
  }
  return ll;
}

// Censored kappa-4 binomial data from the delta = 0.2 two-type population.
struct BinomialCase {
  ModelSpec spec = ModelSpec::binomial(4);
  SupportGrid grid;
  ObservationSet obs;
  LikelihoodMatrix L;
};

BinomialCase binomial_case(int res, int n, std::uint64_t seed) {
  BinomialCase c;
  c.grid = default_grid(c.spec, res);
  Rng rng(seed);
  const auto pop = gen_population(PopulationSpec{TwoTypePopulation{0.2}, n}, rng);
  c.obs = draw_observations(c.spec, pop, rng);
  c.L = build_likelihood_matrix(c.spec, c.grid, c.obs);
  return c;
}

}  // namespace

TEST(ObservationSet, FromOutcomesAggregatesInSortedOrder) {
  std::vector<Outcome> raw{Nonresponse{}, CountResponse{1, 2}, CountResponse{0, 1},
                           Nonresponse{}, CountResponse{1, 2}};
  const auto c = ObservationSet::from_outcomes(raw, Mode::Censored);
  ASSERT_EQ(c.distinct.size(), 3u);
  EXPECT_EQ(c.distinct[0], (Outcome{CountResponse{0, 1}}));
  EXPECT_EQ(c.distinct[2], (Outcome{Nonresponse{}}));
  EXPECT_EQ(c.counts, (std::vector<long>{1, 2, 2}));
  EXPECT_EQ(c.total(), 5);
  EXPECT_EQ(c.count_of(CountResponse{1, 2}), 2);
  EXPECT_EQ(c.count_of(CountResponse{2, 2}), 0);

  const auto t = ObservationSet::from_outcomes(raw, Mode::Truncated);
  EXPECT_EQ(t.distinct.size(), 2u);
  EXPECT_EQ(t.total(), 3);
}

TEST(ObservationSet, ValidateRejectsBadSets) {
  const auto spec = ModelSpec::binomial(2);
  EXPECT_THROW(obs_of({Nonresponse{}}, {1}, Mode::Truncated).validate(spec), Error);
  EXPECT_THROW(obs_of({Nonresponse{}}, {0}).validate(spec), Error);
  EXPECT_THROW(obs_of({Nonresponse{}}, {1, 2}).validate(spec), Error);
  EXPECT_THROW(obs_of({CountResponse{3, 3}}, {1}).validate(spec), Error);
  EXPECT_NO_THROW(obs_of({CountResponse{1, 2}, Nonresponse{}}, {1, 2}).validate(spec));
}

TEST(LikelihoodMatrix, Examples) {
  {
    const auto L = build_likelihood_matrix(ModelSpec::bernoulli(), grid_of({{0.5}}),
                                           obs_of({BinaryResponse{0}, BinaryResponse{1}}, {1, 1}));
    EXPECT_DOUBLE_EQ(L(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(L(1, 0), 0.5);
  }
  {
    const auto L = build_likelihood_matrix(ModelSpec::binomial(1), grid_of({{0.5, 0.5}}),
                                           obs_of({CountResponse{1, 1}}, {1}, Mode::Truncated));
    EXPECT_DOUBLE_EQ(L(0, 0), 0.5);
  }
  {
    const auto L =
        build_likelihood_matrix(ModelSpec::binomial(4), grid_of({{0.2, 0.2}, {0.8, 0.8}}),
                                obs_of({Nonresponse{}}, {1}));
    EXPECT_NEAR(L(0, 0), 0.4096, 1e-15);
    EXPECT_NEAR(L(0, 1), 0.0016, 1e-15);
  }
}

TEST(LikelihoodMatrix, EntriesMatchModelAndTruncatedColumnsSumBelowOne) {
  const auto spec = ModelSpec::binomial(3);
  const auto grid = default_grid(spec, 7);
  std::vector<Outcome> responses;
  for (const auto& o : enumerate_outcomes(spec))
    if (is_response(o)) responses.push_back(o);
  const auto obs = obs_of(responses, std::vector<long>(responses.size(), 1), Mode::Truncated);
  const auto L = build_likelihood_matrix(spec, grid, obs);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double col = 0.0;
    for (std::size_t d = 0; d < L.rows(); ++d) {
      EXPECT_DOUBLE_EQ(L(d, k), outcome_prob_truncated(spec, grid.points[k], obs.distinct[d]));
      col += L(d, k);
    }
    EXPECT_LE(col, 1.0 + 1e-12);
  }
}

TEST(LikelihoodMatrix, ImpossibleOutcomeNamesTheOutcome) {
  const auto spec = ModelSpec::geometric(2, 2);
  const auto grid = grid_of({{1.0, 0.5, 0.5}});
  try {
    build_likelihood_matrix(spec, grid, obs_of({CategoryResponse{1, 2}}, {1}));
    FAIL() << "expected ImpossibleOutcome";
  } catch (const ImpossibleOutcome& e) {
    EXPECT_NE(std::string(e.what()).find("(s=1,k=2)"), std::string::npos) << e.what();
  }
}

TEST(LikelihoodMatrix, TruncatedModeRejectsSilentGridPoints) {
  EXPECT_THROW(build_likelihood_matrix(ModelSpec::binomial(2), grid_of({{0.0, 0.5}, {0.5, 0.5}}),
                                       obs_of({CountResponse{1, 1}}, {1}, Mode::Truncated)),
               SingularParameter);
}

TEST(SupportGrid, ValidateRejectsDuplicatesAndEmpty) {
  const auto spec = ModelSpec::bernoulli();
  EXPECT_THROW(grid_of({}).validate(spec), DomainError);
  EXPECT_THROW(grid_of({{0.3}, {0.3}}).validate(spec), DomainError);
  EXPECT_THROW(grid_of({{1.3}}).validate(spec), DomainError);
  EXPECT_NO_THROW(grid_of({{0.3}, {0.4}}).validate(spec));
}

TEST(DefaultGrid, Shapes) {
  const auto b = default_grid(ModelSpec::bernoulli(), 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_DOUBLE_EQ(b.points[0].coords[0], 0.01);
  EXPECT_DOUBLE_EQ(b.points[1].coords[0], 0.5);
  EXPECT_DOUBLE_EQ(b.points[2].coords[0], 0.99);
  EXPECT_EQ(default_grid(ModelSpec::binomial(4), 50).size(), 2500u);
  EXPECT_EQ(default_grid(ModelSpec::geometric(3, 2), 9).size(), 81u);
  EXPECT_EQ(default_grid(ModelSpec::poisson(8.0), 10).size(), 100u);
  EXPECT_THROW(default_grid(ModelSpec::binomial(4), 1), DomainError);
  EXPECT_THROW(default_grid(ModelSpec::binomial(4), 1001), CapacityError);
  EXPECT_THROW(default_grid(ModelSpec::geometric(2, 6), 60), CapacityError);
  for (const auto& spec : {ModelSpec::binomial(2), ModelSpec::geometric(2, 3),
                           ModelSpec::poisson(5.0), ModelSpec::bernoulli()})
    EXPECT_NO_THROW(default_grid(spec, 12).validate(spec));
}

TEST(EmFit, ExampleOneHalfZerosHalfOnes) {
  const auto spec = ModelSpec::bernoulli();
  const auto grid = grid_of({{0.25}, {0.5}, {0.75}});
  const auto obs = obs_of({BinaryResponse{0}, BinaryResponse{1}}, {5, 5});
  const auto L = build_likelihood_matrix(spec, grid, obs);
  const auto sol = em_fit(L, obs.counts);
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.loglik, 10 * std::log(0.5), 1e-10);
  EXPECT_NEAR(eta_gmle(spec, grid, sol.weights)[0], 0.5, 1e-6);
}

TEST(EmFit, SingleGridPointIsImmediatelyOptimal) {
  const auto L = build_likelihood_matrix(ModelSpec::binomial(2), grid_of({{0.4, 0.6}}),
                                         obs_of({CountResponse{1, 2}, Nonresponse{}}, {3, 4}));
  const auto sol = em_fit(L, std::vector<long>{3, 4});
  EXPECT_EQ(sol.weights, std::vector<double>{1.0});
  EXPECT_EQ(sol.iterations, 0);
  EXPECT_EQ(sol.certificate, 0.0);
  EXPECT_TRUE(sol.converged);
}

TEST(EmFit, TwoByTwoMatchesBruteForceScan) {
  const LikelihoodMatrix L(2, 2, {0.9, 0.1, 0.1, 0.9});
  const std::vector<long> counts{1, 1};
  double best_w = 0.0, best_ll = -INFINITY;
  for (int i = 0; i <= 10000; ++i) {
    const double w = i * 1e-4;
    const double ll = direct_loglik(L, counts, {w, 1.0 - w});
    if (ll > best_ll) {
      best_ll = ll;
      best_w = w;
    }
  }
  EXPECT_NEAR(best_w, 0.5, 1e-12);
  const auto sol = em_fit(L, counts, EmOptions{1e-10, 200000, false});
  EXPECT_NEAR(sol.weights[0], 0.5, 1e-6);
  EXPECT_NEAR(sol.loglik, best_ll, 1e-10);
}

TEST(EmFit, LoglikIsMonotoneAlongTrajectory) {
  const auto c = binomial_case(10, 400, 5);
  const auto sol = em_fit(c.L, c.obs.counts, EmOptions{1e-7, 20000, true});
  ASSERT_GE(sol.trajectory.size(), 2u);
  for (std::size_t i = 1; i < sol.trajectory.size(); ++i)
    EXPECT_GE(sol.trajectory[i], sol.trajectory[i - 1] - 1e-12) << "iteration " << i;
  EXPECT_TRUE(std::isfinite(sol.loglik));
}

TEST(EmFit, FixedPointAtConvergence) {
  const auto c = binomial_case(8, 500, 6);
  const double tol = 1e-7;
  const auto sol = em_fit(c.L, c.obs.counts, EmOptions{tol, 5000000, false});
  ASSERT_TRUE(sol.converged);
  EXPECT_LE(sol.certificate, tol);
  const auto g = gradient_ratios(c.L, c.obs.counts, sol.weights);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (sol.weights[k] > 1e-8) EXPECT_LE(std::abs(g[k] - 1.0), 10 * tol) << "atom " << k;
  EXPECT_NEAR(std::accumulate(sol.weights.begin(), sol.weights.end(), 0.0), 1.0, 1e-12);
  for (double w : sol.weights) {
    EXPECT_GE(w, 0.0);
    EXPECT_TRUE(w == 0.0 || w >= kWeightFloor);
  }
}

TEST(EmFit, CertificateIsReportedAtReturnedWeights) {
  const auto c = binomial_case(10, 300, 7);
  const auto sol = em_fit(c.L, c.obs.counts, EmOptions{1e-12, 50, false});
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 50);
  EXPECT_DOUBLE_EQ(sol.certificate, optimality_certificate(c.L, c.obs.counts, sol.weights));
  EXPECT_DOUBLE_EQ(sol.loglik, log_likelihood(c.L, c.obs.counts, sol.weights));
}

TEST(EmFit, PermutationEquivariance) {
  const auto c = binomial_case(6, 300, 8);
  std::vector<std::size_t> perm(c.L.cols());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  const auto Lp = c.L.permute_columns(perm);
  const EmOptions opts{1e-9, 5000000, false};
  const auto a = em_fit(c.L, c.obs.counts, opts);
  const auto b = em_fit(Lp, c.obs.counts, opts);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-9);
  EXPECT_NEAR(a.certificate, b.certificate, 1e-9);
  for (std::size_t d = 0; d < c.L.rows(); ++d)
    EXPECT_NEAR(marginal_at(c.L, a.weights, d), marginal_at(Lp, b.weights, d), 1e-9);
  for (std::size_t k = 0; k < perm.size(); ++k)
    EXPECT_NEAR(b.weights[k], a.weights[perm[k]], 1e-6);
}

TEST(EmFit, MultiStartMarginalsAgreeInTruncatedMode) {
  // Truncated mode with every response outcome observed: fitted marginals,
  // and hence eta_hat, agree across starts.
  const auto spec = ModelSpec::binomial(2);
  const auto grid = default_grid(spec, 6);
  Rng rng(11);
  const auto pop = gen_population(PopulationSpec{UniformMixPopulation{}, 1000}, rng);
  const auto obs = to_truncated(draw_observations(spec, pop, rng));
  ASSERT_EQ(obs.distinct.size(), 5u);
  const auto L = build_likelihood_matrix(spec, grid, obs);
  const auto sols = em_fit_multistart(L, obs.counts, 5, 12, EmOptions{1e-9, 5000000, false});
  ASSERT_EQ(sols.size(), 5u);
  double lo = 1.0, hi = 0.0;
  for (const auto& s : sols) {
    ASSERT_TRUE(s.converged);
    const double e = eta_gmle(spec, grid, s.weights)[0];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  for (std::size_t d = 0; d < L.rows(); ++d) {
    const double ref = marginal_at(L, sols[0].weights, d);
    for (const auto& s : sols) EXPECT_NEAR(marginal_at(L, s.weights, d), ref, 1e-4 * ref);
  }
  EXPECT_LE(hi - lo, 1e-4);
}

TEST(EmFit, Errors) {
  const LikelihoodMatrix L(2, 2, {0.9, 0.0, 0.1, 0.0});
  EXPECT_THROW(em_fit(L, std::vector<long>{1, 1}, MixtureWeights{0.0, 1.0}), NumericalFailure);
  EXPECT_THROW(em_fit(L, std::vector<long>{1}), ContractViolation);
  EXPECT_THROW(em_fit(L, std::vector<long>{1, 1}, MixtureWeights{1.0}), ContractViolation);
}

TEST(Marginal, Examples) {
  const LikelihoodMatrix L(2, 3, {0.2, 0.4, 0.9, 0.8, 0.6, 0.1});
  EXPECT_DOUBLE_EQ(marginal_at(L, std::vector<double>{0, 1, 0}, 0), 0.4);
  const auto u = uniform_weights(3);
  EXPECT_NEAR(marginal_at(L, u, 1), 0.5, 1e-15);
  EXPECT_NEAR(marginal_at(L, u, 0), 0.5, 1e-15);

  const auto spec = ModelSpec::bernoulli();
  const auto grid = grid_of({{0.25}, {0.5}, {0.75}});
  const auto obs = obs_of({BinaryResponse{0}, BinaryResponse{1}}, {5, 5});
  const auto Le = build_likelihood_matrix(spec, grid, obs);
  EXPECT_NEAR(marginal_at(Le, std::vector<double>{0.5, 0.0, 0.5}, 1), 0.5, 1e-15);
}

TEST(LogLikelihood, ExampleOneAndSentinel) {
  const auto grid = grid_of({{0.25}, {0.5}, {0.75}});
  const auto obs = obs_of({BinaryResponse{0}, BinaryResponse{1}}, {5, 5});
  const auto L = build_likelihood_matrix(ModelSpec::bernoulli(), grid, obs);
  EXPECT_NEAR(log_likelihood(L, obs.counts, std::vector<double>{0, 1, 0}), 10 * std::log(0.5),
              1e-12);
  EXPECT_NEAR(log_likelihood(L, obs.counts, std::vector<double>{0.5, 0, 0.5}),
              10 * std::log(0.5), 1e-12);
  const LikelihoodMatrix Z(2, 2, {0.5, 0.0, 0.5, 1.0});
  EXPECT_EQ(log_likelihood(Z, std::vector<long>{1, 1}, std::vector<double>{0, 1}), -INFINITY);
}

TEST(Weights, RandomAndUniform) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto w = random_weights(7, rng);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    for (double v : w) EXPECT_GT(v, 0.0);
  }
  EXPECT_EQ(uniform_weights(4), std::vector<double>(4, 0.25));
  EXPECT_EQ(heaviest_atom(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(heaviest_atom(std::vector<double>{0.5, 0.5}), 0u);
}

TEST(EmFit, Deterministic) {
  const auto c = binomial_case(10, 300, 13);
  const auto a = em_fit(c.L, c.obs.counts, EmOptions{1e-7, 3000, false});
  const auto b = em_fit(c.L, c.obs.counts, EmOptions{1e-7, 3000, false});
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.loglik, b.loglik);
}
