#include "evopat/kernels.hpp"

#if defined(__ARM_NEON) || defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace evopat::kern {

double dot_scalar(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double squared_norm_scalar(const float* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    }
    return acc;
}

#if defined(__x86_64__) || defined(_M_X64)

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") != 0;
}

#endif

#if defined(__ARM_NEON) || defined(__aarch64__)

double dot_neon(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t va = vld1q_f32(a + i);
        float32x4_t vb = vld1q_f32(b + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        acc1 = vfmaq_f64(acc1, vcvt_f64_f32(vget_high_f32(va)), vcvt_f64_f32(vget_high_f32(vb)));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double squared_norm_neon(const float* a, std::size_t n) {
    return dot_neon(a, a, n);
}

#endif

namespace {

using DotFn = double (*)(const float*, const float*, std::size_t);
using NormFn = double (*)(const float*, std::size_t);

struct Dispatch {
    DotFn dot = &dot_scalar;
    NormFn norm = &squared_norm_scalar;
    const char* name = "scalar";

    Dispatch() {
#if defined(__x86_64__) || defined(_M_X64)
        if (cpu_has_avx2()) {
            dot = &dot_avx2;
            norm = &squared_norm_avx2;
            name = "avx2";
        }
#elif defined(__ARM_NEON) || defined(__aarch64__)
        dot = &dot_neon;
        norm = &squared_norm_neon;
        name = "neon";
#endif
    }
};

const Dispatch& dispatch() {
    static const Dispatch d;
    return d;
}

} // namespace

double dot(const float* a, const float* b, std::size_t n) {
    return dispatch().dot(a, b, n);
}

double squared_norm(const float* a, std::size_t n) {
    return dispatch().norm(a, n);
}

const char* active_backend() {
    return dispatch().name;
}

} // namespace evopat::kern
