#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace modeconn {

// Counter-based generator: output i of stream (seed, stream) is
// splitmix64(hash(seed, stream) + i * GOLDEN). Draws depend only on
// (seed, stream, counter), so independent streams can be replayed or
// handed to parallel tasks without coupling. Gaussians use Box-Muller
// on consecutive counter pairs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next_u64() { return mix(base_ + (counter_++) * GOLDEN); }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) via rejection-free multiply-shift.
  std::uint64_t next_below(std::uint64_t bound) {
    // 128-bit multiply keeps the mapping unbiased enough for shuffles.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // Guard u1 = 0; log(0) would produce -inf.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fixed stream ids so every consumer draws from a disjoint substream.
namespace rng_stream {
constexpr std::uint64_t edges = 1;
constexpr std::uint64_t features = 2;
constexpr std::uint64_t masks = 3;
constexpr std::uint64_t init = 4;
constexpr std::uint64_t data_order = 5;
constexpr std::uint64_t dropout = 6;
constexpr std::uint64_t path_alpha = 7;
}  // namespace rng_stream

}  // namespace modeconn
