#pragma once

// Finite atomic measure spaces and the scalar calculus on them.
//
// Every atom carries a strictly positive weight, so "m-a.e." means "at every
// atom" and essential extrema are plain extrema.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace banach {

class MeasureSpace;
using SpaceRef = std::shared_ptr<const MeasureSpace>;

class MeasureSpace {
public:
    /// Throws StructuralError on duplicate ids or length mismatch, DomainError
    /// on a weight that is not strictly positive and finite.
    static SpaceRef create(std::vector<std::string> atoms, std::vector<double> weights);

    /// Atoms named "x0", "x1", ...
    static SpaceRef with_weights(std::vector<double> weights);

    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<std::string>& atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t i) const { return weights_.at(i); }
    double total_mass() const noexcept { return total_; }

    /// Index of an atom id, or size() if absent.
    std::size_t index_of(const std::string& atom) const;

    /// Mass of a subset given as an atom bitmask (atom i <-> bit i).
    double mass(std::uint64_t mask) const;

    bool operator==(const MeasureSpace& other) const;

private:
    MeasureSpace(std::vector<std::string> atoms, std::vector<double> weights);

    std::vector<std::string> atoms_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

/// Same object or equal contents.
bool same_space(const SpaceRef& a, const SpaceRef& b);

/// A real function on the atoms (an element of L^0 on a finite space).
class ScalarField {
public:
    ScalarField(SpaceRef space, std::vector<double> values);
    static ScalarField constant(SpaceRef space, double value);

    const SpaceRef& space() const noexcept { return space_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    SpaceRef space_;
    std::vector<double> values_;
};

/// The L^infinity functions that act on sections are scalar fields as well.
using ModuleFunction = ScalarField;

/// A probability measure equivalent to the base measure (all entries positive).
class ProbabilityReweighting {
public:
    ProbabilityReweighting(SpaceRef space, std::vector<double> probabilities);

    /// Base weights divided by the total mass.
    static ProbabilityReweighting normalized(const SpaceRef& space);

    const SpaceRef& space() const noexcept { return space_; }
    std::span<const double> probabilities() const noexcept { return probs_; }

private:
    SpaceRef space_;
    std::vector<double> probs_;
};

/// (sum_x w_x |f(x)|^p)^(1/p), or max_x |f(x)| for p = inf.
double lp_norm(const ScalarField& f, double p);

struct EssExtrema {
    double ess_inf;
    double ess_sup;
};

/// Throws DomainError on an empty space.
EssExtrema ess_extrema(const ScalarField& f);

/// Atomwise maximum of a non-empty family over one space.
ScalarField lattice_sup(std::span<const ScalarField> fields);

/// Atomwise minimum of a non-empty family over one space.
ScalarField lattice_inf(std::span<const ScalarField> fields);

/// sum_x p_x min(g(x), 1) for g >= 0.
double l0_distance(const ScalarField& g, const ProbabilityReweighting& reweighting);

/// Integral of f against the base measure.
double integrate(const ScalarField& f);

}  // namespace banach
