#pragma once

#include <span>
#include <string_view>

// Vector kernels behind the discourse-level scores. Each kernel has a scalar
// reference implementation plus SIMD variants (AVX2+FMA on x86-64, NEON on
// AArch64); the public entry points dispatch to the best variant the running
// CPU supports. All variants accumulate in four independent lanes and reduce
// them in the same order, so results agree with the scalar reference up to
// FMA rounding.
namespace metaphor::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

bool avx2_supported();
bool neon_supported();

// The variant used by the dispatching entry points.
Isa active_isa();
// Pins dispatch to `isa` (falls back to scalar when unsupported). Test hook.
void force_isa(Isa isa);
// Returns dispatch to automatic CPU detection.
void reset_isa();

// Precondition for binary kernels: equal lengths (checked by callers).
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
// acc[i] += x[i]
void accumulate(std::span<double> acc, std::span<const double> x);
// x[i] *= factor
void scale(std::span<double> x, double factor);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void accumulate(std::span<double> acc, std::span<const double> x);
void scale(std::span<double> x, double factor);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define METAPHOR_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void accumulate(std::span<double> acc, std::span<const double> x);
void scale(std::span<double> x, double factor);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define METAPHOR_HAVE_NEON_KERNELS 1
namespace neon {
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void accumulate(std::span<double> acc, std::span<const double> x);
void scale(std::span<double> x, double factor);
}  // namespace neon
#endif

}  // namespace metaphor::simd
