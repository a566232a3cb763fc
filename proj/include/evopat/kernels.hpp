#pragma once

#include <cstddef>

namespace evopat::kern {

// Dot product and squared L2 norm over f32 data, accumulated in f64 so the
// scalar and SIMD variants agree to ~1 ulp of the double sum. These back the
// cosine-similarity inner loops of index search and BERTScore.
//
// dot() and squared_norm() dispatch at runtime to the widest variant the CPU
// supports (AVX2 on x86-64, NEON on aarch64, scalar otherwise).
double dot(const float* a, const float* b, std::size_t n);
double squared_norm(const float* a, std::size_t n);

// Name of the variant the dispatcher selected: "avx2", "neon" or "scalar".
const char* active_backend();

// Reference kernels; the SIMD variants are equivalence-tested against these.
double dot_scalar(const float* a, const float* b, std::size_t n);
double squared_norm_scalar(const float* a, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2();
double dot_avx2(const float* a, const float* b, std::size_t n);
double squared_norm_avx2(const float* a, std::size_t n);
#endif

#if defined(__ARM_NEON) || defined(__aarch64__)
double dot_neon(const float* a, const float* b, std::size_t n);
double squared_norm_neon(const float* a, std::size_t n);
#endif

} // namespace evopat::kern
