#ifndef MNAR_RNG_HPP
#define MNAR_RNG_HPP

#include <cstdint>
#include <random>
#include <span>

namespace mnar {

// One splitmix64 step: advances `state` and returns a well-mixed word.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed for stream `stream` under master seed `seed`. A pure function of its
// arguments, so replication r always sees the same stream no matter which
// thread runs it or in what order.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream);

// mt19937_64 with samplers written out by hand so draws are identical
// across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // Sum of n Bernoulli(p) draws; intended for small n.
  int binomial(int n, double p);
  int poisson(double lambda);
  // Index drawn with probabilities `probs` (must sum to 1).
  int categorical(std::span<const double> probs);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mnar

#endif  // MNAR_RNG_HPP
