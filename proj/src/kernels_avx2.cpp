#if defined(MODNET_HAVE_AVX2)

#include "kernels_impl.hpp"

#include <immintrin.h>

namespace modnet::kernels::detail {
namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

Moments moments_avx2(const double* x, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d q0 = _mm256_setzero_pd();
    __m256d q1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a = _mm256_loadu_pd(x + i);
        __m256d b = _mm256_loadu_pd(x + i + 4);
        s0 = _mm256_add_pd(s0, a);
        s1 = _mm256_add_pd(s1, b);
        q0 = _mm256_fmadd_pd(a, a, q0);
        q1 = _mm256_fmadd_pd(b, b, q1);
    }
    double sum = hsum(_mm256_add_pd(s0, s1));
    double sumsq = hsum(_mm256_add_pd(q0, q1));
    for (; i < n; ++i) {
        sum += x[i];
        sumsq += x[i] * x[i];
    }
    return {sum, sumsq};
}

void add_avx2(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_loadu_pd(dst + i);
        __m256d s = _mm256_loadu_pd(src + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(d, s));
    }
    for (; i < n; ++i) dst[i] += src[i];
}

void add_squares_avx2(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_loadu_pd(dst + i);
        __m256d s = _mm256_loadu_pd(src + i);
        _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(s, s, d));
    }
    for (; i < n; ++i) dst[i] += src[i] * src[i];
}

double sqdev_avx2(const double* x, std::size_t n, double mean) {
    __m256d m = _mm256_set1_pd(mean);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), m);
        a0 = _mm256_fmadd_pd(d0, d0, a0);
        a1 = _mm256_fmadd_pd(d1, d1, a1);
    }
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) {
        double d = x[i] - mean;
        acc += d * d;
    }
    return acc;
}

}  // namespace

const Impl avx2_impl = {moments_avx2, add_avx2, add_squares_avx2, sqdev_avx2};

}  // namespace modnet::kernels::detail

#endif  // MODNET_HAVE_AVX2
