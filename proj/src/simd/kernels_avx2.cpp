// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "banach/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace banach::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, shuf));
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_min_sd(lo, shuf));
}

inline __m256d vabs(__m256d v) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double weighted_sum_avx2(const double* w, const double* x, std::size_t n) {
    return dot_avx2(w, x, n);
}

double weighted_abs_sum_avx2(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), vabs(_mm256_loadu_pd(x + i)), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * std::fabs(x[i]);
    return s;
}

double weighted_square_sum_avx2(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), xv), xv, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * x[i] * x[i];
    return s;
}

double weighted_abs_max_avx2(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_max_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), vabs(_mm256_loadu_pd(x + i))));
    }
    double m = hmax(acc);
    for (; i < n; ++i) m = std::max(m, w[i] * std::fabs(x[i]));
    return m;
}

double abs_max_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, vabs(_mm256_loadu_pd(x + i)));
    double m = hmax(acc);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

std::pair<double, double> min_max_avx2(const double* x, std::size_t n) {
    double lo = x[0];
    double hi = x[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vlo = _mm256_loadu_pd(x);
        __m256d vhi = vlo;
        for (i = 4; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(x + i);
            vlo = _mm256_min_pd(vlo, v);
            vhi = _mm256_max_pd(vhi, v);
        }
        lo = hmin(vlo);
        hi = hmax(vhi);
    }
    for (; i < n; ++i) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    return {lo, hi};
}

void elementwise_max_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = std::max(a[i], b[i]);
}

double capped_weighted_sum_avx2(const double* w, const double* x, double cap, std::size_t n) {
    const __m256d vcap = _mm256_set1_pd(cap);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_min_pd(_mm256_loadu_pd(x + i), vcap), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * std::min(x[i], cap);
    return s;
}

void gemv_avx2(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

}  // namespace

namespace detail {

const KernelTable& avx2_table() noexcept {
    static const KernelTable table{
        Isa::Avx2,
        dot_avx2,
        weighted_sum_avx2,
        weighted_abs_sum_avx2,
        weighted_square_sum_avx2,
        weighted_abs_max_avx2,
        abs_max_avx2,
        min_max_avx2,
        elementwise_max_avx2,
        capped_weighted_sum_avx2,
        gemv_avx2,
    };
    return table;
}

}  // namespace detail
}  // namespace banach::simd
