#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "metaphor/rng.hpp"
#include "metaphor/simd.hpp"

using namespace metaphor;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

struct Kernels {
  const char* name;
  std::function<double(std::span<const double>, std::span<const double>)> dot;
  std::function<double(std::span<const double>)> squared_norm;
  std::function<void(std::span<double>, std::span<const double>)> accumulate;
  std::function<void(std::span<double>, double)> scale;
};

std::vector<Kernels> variants() {
  std::vector<Kernels> out;
#ifdef METAPHOR_HAVE_AVX2_KERNELS
  if (simd::avx2_supported()) {
    out.push_back({"avx2", simd::avx2::dot, simd::avx2::squared_norm, simd::avx2::accumulate, simd::avx2::scale});
  }
#endif
#ifdef METAPHOR_HAVE_NEON_KERNELS
  if (simd::neon_supported()) {
    out.push_back({"neon", simd::neon::dot, simd::neon::squared_norm, simd::neon::accumulate, simd::neon::scale});
  }
#endif
  return out;
}

// Bound on the difference between two summation orders of n products.
double tolerance(std::span<const double> a, std::span<const double> b) {
  double mag = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mag += std::abs(a[i] * b[i]);
  return 4.0 * static_cast<double>(a.size() + 1) * 2.2e-16 * mag + 1e-300;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar kernels against direct loops") {
    Rng rng(1);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 385u}) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      double d = 0, s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        d += a[i] * b[i];
        s += a[i] * a[i];
      }
      CHECK(std::abs(simd::scalar::dot(a, b) - d) <= tolerance(a, b));
      CHECK(std::abs(simd::scalar::squared_norm(a) - s) <= tolerance(a, a));
    }
  }

  TEST_CASE("every SIMD variant matches the scalar reference") {
    Rng rng(2);
    for (const auto& k : variants()) {
      INFO(k.name);
      for (std::size_t n = 0; n < 70; ++n) {
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        CHECK(std::abs(k.dot(a, b) - simd::scalar::dot(a, b)) <= tolerance(a, b));
        CHECK(std::abs(k.squared_norm(a) - simd::scalar::squared_norm(a)) <= tolerance(a, a));

        auto acc1 = a, acc2 = a;
        k.accumulate(acc1, b);
        simd::scalar::accumulate(acc2, b);
        CHECK(acc1 == acc2);

        auto s1 = a, s2 = a;
        k.scale(s1, 1.7);
        simd::scalar::scale(s2, 1.7);
        CHECK(s1 == s2);
      }
    }
  }

  TEST_CASE("dispatch can be pinned and reset") {
    Rng rng(3);
    const auto a = random_vector(rng, 384);
    const auto b = random_vector(rng, 384);
    simd::force_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    const double scalar_dot = simd::dot(a, b);
    CHECK(scalar_dot == simd::scalar::dot(a, b));
    simd::reset_isa();
    CHECK(std::abs(simd::dot(a, b) - scalar_dot) <= tolerance(a, b));
#ifdef METAPHOR_HAVE_AVX2_KERNELS
    if (simd::avx2_supported()) CHECK(simd::active_isa() == simd::Isa::avx2);
#endif
    simd::force_isa(simd::Isa::neon);
    if (!simd::neon_supported()) CHECK(simd::active_isa() == simd::Isa::scalar);
    simd::reset_isa();
  }

  TEST_CASE("unaligned subspans") {
    Rng rng(4);
    const auto a = random_vector(rng, 101);
    const auto b = random_vector(rng, 101);
    for (std::size_t off = 0; off < 4; ++off) {
      std::span<const double> sa(a.data() + off, 90);
      std::span<const double> sb(b.data() + off, 90);
      CHECK(std::abs(simd::dot(sa, sb) - simd::scalar::dot(sa, sb)) <= tolerance(sa, sb));
    }
  }
}
