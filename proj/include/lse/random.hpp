#pragma once

// Reproducible random streams.
//
// Every stream is a xoshiro256++ generator whose state is expanded from a
// 64-bit seed with splitmix64. Independent streams for parallel work are
// derived from (root seed, stream index), so results depend only on the root
// seed and the block decomposition, never on thread scheduling. All variate
// transforms are implemented here rather than taken from <random> so the
// same seed yields the same numbers on every standard library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "lse/errors.hpp"

namespace lse {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  using result_type = std::uint64_t;
  using State = std::array<std::uint64_t, 4>;

  explicit RandomStream(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  /// Restores an explicit state. The all-zero state is a fixed point of the
  /// generator and is rejected.
  static RandomStream from_state(const State& state) {
    if (state[0] == 0 && state[1] == 0 && state[2] == 0 && state[3] == 0)
      throw UsageError("RandomStream: all-zero state is invalid");
    RandomStream stream;
    stream.state_ = state;
    return stream;
  }

  /// Stream `index` of the family rooted at `root_seed`.
  static RandomStream derive(std::uint64_t root_seed, std::uint64_t index) {
    std::uint64_t a = root_seed;
    std::uint64_t b = index ^ 0x6A09E667F3BCC909ULL;
    const std::uint64_t mixed = splitmix64(a) ^ (splitmix64(b) * 0xD1342543DE82EF95ULL);
    return RandomStream(mixed);
  }

  const State& state() const noexcept { return state_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (one value per call).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Gamma(shape, 1) by Marsaglia & Tsang, with the U^{1/a} boost for a < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ParameterError("gamma variate: shape must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  State state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fixed decomposition of `count` items into blocks of `block_size`; block b
/// draws from RandomStream::derive(seed, b). `work(stream, begin, end)` runs
/// on worker threads; the output must only depend on (seed, block).
template <class Work>
void for_each_block(std::size_t count, std::uint64_t seed, Work&& work, std::size_t block_size = 1u << 16) {
  if (count == 0) return;
  const std::size_t blocks = (count + block_size - 1) / block_size;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(blocks, std::thread::hardware_concurrency()));
  auto run_range = [&](std::size_t worker) {
    for (std::size_t b = worker; b < blocks; b += workers) {
      RandomStream stream = RandomStream::derive(seed, b);
      work(stream, b * block_size, std::min(count, (b + 1) * block_size));
    }
  };
  if (workers == 1) {
    run_range(0);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run_range, w);
  for (auto& t : threads) t.join();
}

}  // namespace lse
