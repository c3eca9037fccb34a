#pragma once

// Data-parallel reductions used by the measure, norm and section layers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once per process from CPUID; tests
// force each variant explicitly and compare them against the scalar path.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

namespace banach::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    /// sum_i a_i b_i
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i w_i x_i
    double (*weighted_sum)(const double* w, const double* x, std::size_t n);
    /// sum_i w_i |x_i|
    double (*weighted_abs_sum)(const double* w, const double* x, std::size_t n);
    /// sum_i w_i x_i^2
    double (*weighted_square_sum)(const double* w, const double* x, std::size_t n);
    /// max_i w_i |x_i|, 0 for n == 0
    double (*weighted_abs_max)(const double* w, const double* x, std::size_t n);
    /// max_i |x_i|, 0 for n == 0
    double (*abs_max)(const double* x, std::size_t n);
    /// (min_i x_i, max_i x_i); n must be positive
    std::pair<double, double> (*min_max)(const double* x, std::size_t n);
    /// out_i = max(a_i, b_i); out may alias a
    void (*elementwise_max)(const double* a, const double* b, double* out, std::size_t n);
    /// sum_i w_i min(x_i, cap)
    double (*capped_weighted_sum)(const double* w, const double* x, double cap, std::size_t n);
    /// y = A x with A row-major rows x cols
    void (*gemv)(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the build or the host lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

/// Kernel table chosen for this process.
const KernelTable& active() noexcept;

/// Switch the process-wide table (used by equivalence tests). Returns false,
/// leaving the selection unchanged, when the requested ISA is unavailable.
bool select(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

// Convenience wrappers over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double weighted_sum(std::span<const double> w, std::span<const double> x) {
    return active().weighted_sum(w.data(), x.data(), x.size());
}

inline double weighted_abs_sum(std::span<const double> w, std::span<const double> x) {
    return active().weighted_abs_sum(w.data(), x.data(), x.size());
}

inline double weighted_square_sum(std::span<const double> w, std::span<const double> x) {
    return active().weighted_square_sum(w.data(), x.data(), x.size());
}

inline double weighted_abs_max(std::span<const double> w, std::span<const double> x) {
    return active().weighted_abs_max(w.data(), x.data(), x.size());
}

inline double abs_max(std::span<const double> x) { return active().abs_max(x.data(), x.size()); }

inline std::pair<double, double> min_max(std::span<const double> x) {
    return active().min_max(x.data(), x.size());
}

inline void elementwise_max(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    active().elementwise_max(a.data(), b.data(), out.data(), out.size());
}

inline double capped_weighted_sum(std::span<const double> w, std::span<const double> x, double cap) {
    return active().capped_weighted_sum(w.data(), x.data(), cap, x.size());
}

inline void gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) {
    active().gemv(a.data(), x.data(), y.data(), y.size(), x.size());
}

}  // namespace banach::simd
