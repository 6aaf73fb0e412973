#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace metaphor {

/// Seeded generator whose output is identical on every platform: the engine is
/// mt19937_64 (fully specified by the standard) and all derived draws are
/// implemented here rather than through std distributions, whose algorithms
/// differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, n) without modulo bias. n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double normal(double mean = 0.0, double sd = 1.0);
  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
  }

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace metaphor
