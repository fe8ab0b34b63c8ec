#pragma once
// Shared scalar/array aliases and the deterministic random stream used
// throughout the toolkit. Every stochastic routine takes an Rng so that a
// single seed fixes all outputs bit for bit.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace weal {

using BoolVec = Eigen::Array<bool, Eigen::Dynamic, 1>;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic random stream. uniform/normal avoid the standard library's
// distribution objects so draws depend only on the engine sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(detail::mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; stateless across calls
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // sample an index from a probability vector (entries >= 0, sum approx. 1)
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    const double u = uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (int i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      cum += probs[i];
      if (u < cum) return i;
    }
    if (last_positive < 0)
      throw std::invalid_argument("categorical: no positive probability");
    return last_positive;
  }

  // independent child stream; deterministic given this stream's state
  Rng spawn() { return Rng(next_u64()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace weal
