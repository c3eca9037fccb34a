#pragma once

// Norms on R^n, as a closed set of representations.
//
//   InnerProduct   ||v|| = sqrt(v^T G v), G symmetric positive definite
//   WeightedLp     ||v|| = (sum_i d_i |v_i|^r)^(1/r), or max_i d_i |v_i| for r = inf
//   PolyhedralMax  ||v|| = max_i |<a_i, v>|, the a_i spanning the dual space
//   PolytopeGauge  Minkowski gauge of conv(+-V_i), the V_i spanning R^n
//
// The family is closed under duality: inner products dualize to inner
// products, weighted l^r to weighted l^q, and the two polyhedral kinds swap.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace banach {

struct InnerProduct {
    Eigen::MatrixXd gram;
};

struct WeightedLp {
    double exponent;  // in [1, inf]
    std::vector<double> weights;
};

struct PolyhedralMax {
    Eigen::MatrixXd functionals;  // one functional per row
};

struct PolytopeGauge {
    Eigen::MatrixXd vertices;  // one vertex per row; the body is conv(+-rows)
};

using NormKind = std::variant<InnerProduct, WeightedLp, PolyhedralMax, PolytopeGauge>;

enum class NormKindTag { InnerProduct, WeightedLp, PolyhedralMax, PolytopeGauge };

std::string_view kind_name(NormKindTag tag) noexcept;

/// Generic norm evaluator on R^n; the optimizers accept any of these.
using NormFn = std::function<double(std::span<const double>)>;

class NormSpec {
public:
    static NormSpec inner_product(Eigen::MatrixXd gram);
    static NormSpec euclidean(std::size_t dimension);
    static NormSpec weighted_lp(double exponent, std::vector<double> weights);
    static NormSpec lp(double exponent, std::size_t dimension);
    static NormSpec polyhedral_max(Eigen::MatrixXd functionals);
    static NormSpec polytope_gauge(Eigen::MatrixXd vertices);

    std::size_t dimension() const noexcept { return dimension_; }
    const NormKind& kind() const noexcept { return kind_; }
    NormKindTag tag() const noexcept { return static_cast<NormKindTag>(kind_.index()); }

    double norm(std::span<const double> v) const;
    double dual_norm(std::span<const double> covector) const;

    /// Representation of the dual norm on covectors.
    NormSpec dual() const;

    /// A covector w with dual_norm(w) = 1 and <w, v> = norm(v); zero for v = 0.
    std::vector<double> norming_functional(std::span<const double> v) const;

    /// A vector u with norm(u) = 1 and <w, u> = dual_norm(w); zero for w = 0.
    std::vector<double> dual_maximizer(std::span<const double> covector) const;

    /// This norm precomposed with an injective linear map R^k -> R^n given as
    /// an n x k matrix. Supported for InnerProduct, PolyhedralMax and
    /// WeightedLp with r = inf; other kinds raise DomainError.
    NormSpec pullback(const Eigen::MatrixXd& embedding) const;

    NormFn evaluator() const;

    std::string describe() const;

    bool operator==(const NormSpec& other) const;

private:
    NormSpec(std::size_t dimension, NormKind kind);
    void prepare();
    void self_test() const;
    void check_length(std::size_t n, const char* what) const;

    std::size_t dimension_ = 0;
    NormKind kind_;
    // Row-major caches for the kernel layer.
    std::vector<double> rows_;
    std::vector<double> scales_;  // WeightedLp: s_i with ||v|| = ||s o v||_r
    std::vector<double> facets_;  // polyhedral kinds: facet normals of the gauge body, when enumerable
    Eigen::LLT<Eigen::MatrixXd> cholesky_;
};

/// sqrt of the sum of squares; used where the ambient Euclidean length matters.
double euclidean_length(std::span<const double> v);

}  // namespace banach
