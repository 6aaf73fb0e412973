// Compiled with -mavx2 -mfma. Nothing here may run before avx2_supported()
// has returned true.

#include "metaphor/simd.hpp"

#if defined(METAPHOR_HAVE_AVX2_KERNELS)
#include <immintrin.h>

namespace metaphor::simd::avx2 {

namespace {

// (l0 + l1) + (l2 + l3), matching the scalar lane reduction.
inline double reduce(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc);
  }
  double s = reduce(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void accumulate(std::span<double> acc, std::span<const double> x) {
  const std::size_t n = acc.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc.data() + i, _mm256_add_pd(_mm256_loadu_pd(acc.data() + i), _mm256_loadu_pd(x.data() + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void scale(std::span<double> x, double factor) {
  const std::size_t n = x.size();
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), f));
  for (; i < n; ++i) x[i] *= factor;
}

}  // namespace metaphor::simd::avx2

#endif
