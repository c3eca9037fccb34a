#pragma once

// Discrete Banach bundles over a finite atomic space, their sections and
// covector sections, and the fiberwise classifications.
//
// A section stores all fiber vectors in one flat buffer; atom i occupies
// [offset(i), offset(i) + dimension(i)).

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "banach/measure.hpp"
#include "banach/norm_engine.hpp"
#include "banach/norm_spec.hpp"

namespace banach {

struct Fiber {
    std::size_t dimension = 0;
    std::optional<NormSpec> norm;  // empty exactly for the zero fiber

    static Fiber zero() { return Fiber{}; }
    static Fiber of(NormSpec spec);
    /// The subspace image(embedding) of an ambient normed space, carried back
    /// to coordinates on R^k through the n x k embedding.
    static Fiber embedded(const NormSpec& ambient, const Eigen::MatrixXd& embedding);

    double norm_of(std::span<const double> v) const;
    double dual_norm_of(std::span<const double> w) const;

    bool operator==(const Fiber& other) const;
};

class Bundle;
using BundleRef = std::shared_ptr<const Bundle>;

class Bundle {
public:
    /// One fiber per atom; StructuralError otherwise.
    static BundleRef create(SpaceRef space, std::vector<Fiber> fibers);
    /// Every atom carries the same fiber.
    static BundleRef constant(SpaceRef space, const NormSpec& spec);

    const SpaceRef& space() const noexcept { return space_; }
    std::size_t atoms() const noexcept { return fibers_.size(); }
    const std::vector<Fiber>& fibers() const noexcept { return fibers_; }
    const Fiber& fiber(std::size_t i) const { return fibers_.at(i); }
    std::size_t dimension(std::size_t i) const { return fibers_.at(i).dimension; }
    std::size_t offset(std::size_t i) const { return offsets_.at(i); }
    std::size_t total_dimension() const noexcept { return offsets_.back(); }

    /// Every fiber is {0}.
    bool degenerate() const noexcept;
    /// All fibers are the same normed space.
    bool is_constant() const noexcept;

    /// The bundle of dual fibers (E'), over the same space.
    BundleRef dual() const;

    bool operator==(const Bundle& other) const;

private:
    Bundle(SpaceRef space, std::vector<Fiber> fibers);

    SpaceRef space_;
    std::vector<Fiber> fibers_;
    std::vector<std::size_t> offsets_;
};

bool same_bundle(const BundleRef& a, const BundleRef& b);

namespace detail {

// Shared storage of Section and DualSection.
class FiberField {
public:
    FiberField(BundleRef bundle, std::span<const double> flat);
    FiberField(BundleRef bundle, const std::vector<std::vector<double>>& per_atom);

    const BundleRef& bundle() const noexcept { return bundle_; }
    std::span<const double> at(std::size_t atom) const;
    std::span<double> at(std::size_t atom);
    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }
    std::vector<std::vector<double>> per_atom() const;

private:
    BundleRef bundle_;
    std::vector<double> data_;
};

}  // namespace detail

/// An element of Gamma_0(E): one fiber vector per atom.
class Section : public detail::FiberField {
public:
    using FiberField::FiberField;
    static Section zero(const BundleRef& bundle);
};

/// A covector field, i.e. an element of Gamma_0(E').
class DualSection : public detail::FiberField {
public:
    using FiberField::FiberField;
    static DualSection zero(const BundleRef& bundle);
};

// Linear structure.
Section operator+(const Section& a, const Section& b);
Section operator-(const Section& a, const Section& b);
Section operator*(double s, const Section& a);
DualSection operator+(const DualSection& a, const DualSection& b);
DualSection operator-(const DualSection& a, const DualSection& b);
DualSection operator*(double s, const DualSection& a);

/// x -> ||v(x)||, zero on zero fibers.
ScalarField pointwise_norm(const Section& v);

/// || |v| ||_{L^p}.
double gamma_p_norm(const Section& v, double p);

/// (f v)(x) = f(x) v(x).
Section module_action(const ModuleFunction& f, const Section& v);
DualSection module_action(const ModuleFunction& f, const DualSection& w);

/// The indicator 1_E of a set of atom indices.
ModuleFunction indicator(const SpaceRef& space, std::span<const std::size_t> atoms);

/// sum_{x in E} w_x v(x); DomainError when the fibers over E differ in dimension.
std::vector<double> bochner_integral(const Section& v, std::span<const std::size_t> atoms);

/// Fiberwise modulus estimates, one per atom. Zero fibers report delta = 1
/// with an empty witness.
std::vector<ModulusEstimate> fiber_moduli(const Bundle& bundle, double eps, const OptimizerBudget& budget);

/// x -> delta_{E(x)}(eps).
ScalarField pointwise_modulus(const Bundle& bundle, double eps, const OptimizerBudget& budget);

struct BundleClassification {
    bool is_hilbert = false;
    bool is_uniformly_convex = false;
    bool degenerate = false;
    std::vector<double> fiber_defects;
    std::vector<double> epsilons;
    std::vector<double> ess_inf_modulus;  ///< atomwise minimum of the fiber curves
};

inline constexpr double kHilbertDefectTolerance = 1e-9;
inline constexpr double kUniformConvexityThreshold = 1e-6;

BundleClassification classify_bundle(const Bundle& bundle, const OptimizerBudget& budget,
                                     std::span<const double> epsilons = {});

}  // namespace banach
