#include "mnar/rng.hpp"

#include <cmath>

#include "mnar/errors.hpp"

namespace mnar {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (stream * 0xd1b54a32d192ed03ULL);
  return splitmix64(state);
}

double Rng::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

int Rng::binomial(int n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw DomainError("invalid binomial parameters");
  int k = 0;
  for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

int Rng::poisson(double lambda) {
  if (!(lambda > 0.0) || lambda > 700.0) throw DomainError("poisson rate must be in (0, 700]");
  // Inversion by sequential search over the pmf.
  const double u = uniform();
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  int k = 0;
  while (u > cdf) {
    ++k;
    pmf *= lambda / k;
    cdf += pmf;
    if (pmf == 0.0 && k > lambda) break;
  }
  return k;
}

int Rng::categorical(std::span<const double> probs) {
  const double u = uniform();
  double cdf = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = static_cast<int>(i);
    cdf += probs[i];
    if (u < cdf) return static_cast<int>(i);
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

}  // namespace mnar
