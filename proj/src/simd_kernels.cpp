#include <atomic>

#include "metaphor/simd.hpp"

#if defined(METAPHOR_HAVE_NEON_KERNELS)
#include <arm_neon.h>
#endif

namespace metaphor::simd {

// ============================================================================
// Scalar reference kernels
// ============================================================================
//
// Four running sums, combined as (s0 + s1) + (s2 + s3), then the tail. The
// SIMD variants keep the same lane layout.

namespace scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void accumulate(std::span<double> acc, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

void scale(std::span<double> x, double factor) {
  for (double& v : x) v *= factor;
}

}  // namespace scalar

// ============================================================================
// NEON kernels (AArch64: NEON is part of the base ISA)
// ============================================================================

#if defined(METAPHOR_HAVE_NEON_KERNELS)
namespace neon {

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  float64x2_t lo = vdupq_n_f64(0.0);  // lanes 0,1
  float64x2_t hi = vdupq_n_f64(0.0);  // lanes 2,3
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vfmaq_f64(lo, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    hi = vfmaq_f64(hi, vld1q_f64(a.data() + i + 2), vld1q_f64(b.data() + i + 2));
  }
  double s = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) + (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void accumulate(std::span<double> acc, std::span<const double> x) {
  const std::size_t n = acc.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(acc.data() + i, vaddq_f64(vld1q_f64(acc.data() + i), vld1q_f64(x.data() + i)));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void scale(std::span<double> x, double factor) {
  const std::size_t n = x.size();
  const float64x2_t f = vdupq_n_f64(factor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x.data() + i, vmulq_f64(vld1q_f64(x.data() + i), f));
  for (; i < n; ++i) x[i] *= factor;
}

}  // namespace neon
#endif

// ============================================================================
// Runtime dispatch
// ============================================================================

bool avx2_supported() {
#if defined(METAPHOR_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported;
#else
  return false;
#endif
}

bool neon_supported() {
#if defined(METAPHOR_HAVE_NEON_KERNELS)
  return true;
#else
  return false;
#endif
}

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "scalar";
}

namespace {

Isa detect() {
  if (avx2_supported()) return Isa::avx2;
  if (neon_supported()) return Isa::neon;
  return Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  const bool ok = isa == Isa::scalar || (isa == Isa::avx2 && avx2_supported()) ||
                  (isa == Isa::neon && neon_supported());
  selected().store(ok ? isa : Isa::scalar, std::memory_order_relaxed);
}

void reset_isa() { selected().store(detect(), std::memory_order_relaxed); }

double dot(std::span<const double> a, std::span<const double> b) {
  switch (active_isa()) {
#if defined(METAPHOR_HAVE_AVX2_KERNELS)
    case Isa::avx2:
      return avx2::dot(a, b);
#endif
#if defined(METAPHOR_HAVE_NEON_KERNELS)
    case Isa::neon:
      return neon::dot(a, b);
#endif
    default:
      return scalar::dot(a, b);
  }
}

double squared_norm(std::span<const double> a) {
  switch (active_isa()) {
#if defined(METAPHOR_HAVE_AVX2_KERNELS)
    case Isa::avx2:
      return avx2::squared_norm(a);
#endif
#if defined(METAPHOR_HAVE_NEON_KERNELS)
    case Isa::neon:
      return neon::squared_norm(a);
#endif
    default:
      return scalar::squared_norm(a);
  }
}

void accumulate(std::span<double> acc, std::span<const double> x) {
  switch (active_isa()) {
#if defined(METAPHOR_HAVE_AVX2_KERNELS)
    case Isa::avx2:
      return avx2::accumulate(acc, x);
#endif
#if defined(METAPHOR_HAVE_NEON_KERNELS)
    case Isa::neon:
      return neon::accumulate(acc, x);
#endif
    default:
      return scalar::accumulate(acc, x);
  }
}

void scale(std::span<double> x, double factor) {
  switch (active_isa()) {
#if defined(METAPHOR_HAVE_AVX2_KERNELS)
    case Isa::avx2:
      return avx2::scale(x, factor);
#endif
#if defined(METAPHOR_HAVE_NEON_KERNELS)
    case Isa::neon:
      return neon::scale(x, factor);
#endif
    default:
      return scalar::scale(x, factor);
  }
}

}  // namespace metaphor::simd
