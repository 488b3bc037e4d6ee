#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rdirl {

// splitmix64: used only to derive well-separated seeds for independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Deterministic RNG built on std::mt19937_64 with hand-rolled distributions.
// The standard pins the mt19937_64 sequence but not the library distributions,
// so uniform/normal are implemented here to keep outputs identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1): top 53 bits of the raw draw.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Index draw proportional to non-negative weights (need not be normalized).
  int categorical(const Eigen::VectorXd& w) {
    const double total = w.sum();
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::runtime_error("categorical: weights must be finite with positive sum");
    double u = uniform01() * total;
    double cum = 0.0;
    for (int i = 0; i < w.size(); ++i) {
      cum += w[i];
      if (u < cum) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rdirl
