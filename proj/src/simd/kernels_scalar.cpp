#include "banach/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace banach::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double weighted_sum_scalar(const double* w, const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i];
    return s;
}

double weighted_abs_sum_scalar(const double* w, const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::fabs(x[i]);
    return s;
}

double weighted_square_sum_scalar(const double* w, const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i];
    return s;
}

double weighted_abs_max_scalar(const double* w, const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, w[i] * std::fabs(x[i]));
    return m;
}

double abs_max_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

std::pair<double, double> min_max_scalar(const double* x, std::size_t n) {
    double lo = x[0];
    double hi = x[0];
    for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    return {lo, hi};
}

void elementwise_max_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(a[i], b[i]);
}

double capped_weighted_sum_scalar(const double* w, const double* x, double cap, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::min(x[i], cap);
    return s;
}

void gemv_scalar(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
    static const KernelTable table{
        Isa::Scalar,
        dot_scalar,
        weighted_sum_scalar,
        weighted_abs_sum_scalar,
        weighted_square_sum_scalar,
        weighted_abs_max_scalar,
        abs_max_scalar,
        min_max_scalar,
        elementwise_max_scalar,
        capped_weighted_sum_scalar,
        gemv_scalar,
    };
    return table;
}

}  // namespace banach::simd
