#pragma once

// Deciding whether a norm on the module of sections comes from an L^p
// pointwise norm, recovering that pointwise norm, and the Radon-Nikodym
// inequality for measures on an atomic space.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "banach/bundle.hpp"

namespace banach {

/// c * ||v||_{Gamma_r}; r = inf gives c * max_x |v|(x).
struct ModuleNormTerm {
    double exponent;
    double coefficient = 1.0;
};

enum class TermCombine { Sum, Max };

class AbstractModuleNorm {
public:
    using Fn = std::function<double(const Section&)>;

    static AbstractModuleNorm induced(BundleRef bundle, double p);
    static AbstractModuleNorm sup_over_atoms(BundleRef bundle);
    /// ||v||_{Gamma_p} + ||v||_{Gamma_p2}
    static AbstractModuleNorm mixed_sum(BundleRef bundle, double p, double p2);
    /// max(||v||_{Gamma_p}, ||v||_{Gamma_p2})
    static AbstractModuleNorm mixed_max(BundleRef bundle, double p, double p2);
    static AbstractModuleNorm composed(BundleRef bundle, std::vector<ModuleNormTerm> terms, TermCombine combine);
    /// Any pure function of the section; it must be a norm.
    static AbstractModuleNorm custom(BundleRef bundle, std::string name, Fn fn);

    double operator()(const Section& v) const;
    const BundleRef& bundle() const noexcept { return bundle_; }
    const std::string& name() const noexcept { return name_; }

    /// The same norm as a function of the pointwise norm |v|; empty for
    /// custom norms.
    const std::function<double(const ScalarField&)>& pointwise_form() const noexcept { return pointwise_; }

private:
    AbstractModuleNorm(BundleRef bundle, std::string name, Fn fn);

    BundleRef bundle_;
    std::string name_;
    Fn fn_;
    std::function<double(const ScalarField&)> pointwise_;
};

struct NormValidation {
    std::size_t probes = 0;
    double max_homogeneity_residual = 0.0;  ///< relative
    double max_triangle_excess = 0.0;       ///< relative
    bool passed = false;
};

inline constexpr double kNormAxiomTolerance = 1e-9;

/// Homogeneity and triangle inequality on random probes.
NormValidation validate_module_norm(const AbstractModuleNorm& norm, std::size_t probes, std::uint64_t seed);

/// Random sections with entries in N(0, 1).
std::vector<Section> random_sections(const BundleRef& bundle, std::size_t count, std::uint64_t seed);

/// Probes rescaled to unit norm; zero probes are kept as they are.
std::vector<Section> unit_probes(const AbstractModuleNorm& norm, const std::vector<Section>& probes);

/// mu_v(E) = ||1_E v||^p for the atom set encoded in `mask`.
double mu_v(const AbstractModuleNorm& norm, double p, const Section& v, std::uint64_t mask);

struct SubsetResidual {
    std::size_t probe = 0;
    std::uint64_t mask = 0;
    double residual = 0.0;
};

struct Condition2aReport {
    double p = 0.0;
    std::size_t probes = 0;
    std::size_t subsets_per_probe = 0;
    bool enumerated = true;  ///< false when subsets were sampled
    double max_residual = 0.0;
    SubsetResidual worst;
    std::vector<SubsetResidual> per_probe_worst;
    bool passed = false;
};

inline constexpr double kCondition2aTolerance = 1e-9;
inline constexpr std::size_t kFullEnumerationAtoms = 16;
inline constexpr std::size_t kSampledSubsets = 4096;

/// max over probes and subsets E of | ||1_E v||^p + ||1_{X\E} v||^p - ||v||^p |.
/// Subsets are enumerated up to 16 atoms and sampled (seeded) beyond.
Condition2aReport check_condition_2a(const AbstractModuleNorm& norm, double p, const std::vector<Section>& probes,
                                     std::uint64_t seed = 1);

/// A bounded family of module functions f_n converging to 0 at every atom.
struct NullSequence {
    std::string name;
    std::function<ScalarField(std::uint64_t n)> term;
    /// max_x |f_n(x)| <= envelope(n), with envelope -> 0.
    std::function<double(std::uint64_t n)> envelope;
};

/// The generator's families for a space; every emitted family passes
/// `is_atomwise_null`.
std::vector<NullSequence> null_sequences(const SpaceRef& space, std::uint64_t seed);

/// Bounded by 1 and below `tolerance` at the horizon on the sampled ladder.
bool is_atomwise_null(const NullSequence& seq, std::uint64_t horizon, double tolerance);

struct SequenceResult {
    std::string name;
    double max_norm_at_horizon = 0.0;  ///< sup over unit probes of ||f_H v||
};

struct Condition2bReport {
    std::uint64_t horizon = 0;
    std::vector<SequenceResult> sequences;
    double max_value = 0.0;
    bool passed = false;
};

inline constexpr double kCondition2bTolerance = 1e-6;
inline constexpr std::uint64_t kDefaultHorizon = 100'000'000'000'000ULL;

Condition2bReport check_condition_2b(const AbstractModuleNorm& norm, const std::vector<Section>& probes,
                                     std::uint64_t seed, std::uint64_t horizon = kDefaultHorizon);

/// |v|(x) = (mu_v({x}) / w_x)^(1/p). Throws DomainError when condition 2a
/// fails for v (mu_v is then not additive).
ScalarField reconstruct_pointwise_norm(const AbstractModuleNorm& norm, double p, const Section& v);

struct AtomicMeasureTriple {
    SpaceRef space;
    std::vector<double> d1, d2, d3;  ///< densities with respect to the base measure
    double alpha = 1.0;
};

struct RnReport {
    std::size_t subsets = 0;
    bool set_level_holds = false;
    bool density_level_holds = false;
    bool violation = false;  ///< set level holds but density level fails
    double min_set_margin = 0.0;
    double min_density_margin = 0.0;
    std::uint64_t worst_mask = 0;
};

inline constexpr std::size_t kRnMaxAtoms = 20;

/// mu_1(E)^a <= mu_2(E)^a + mu_3(E)^a on every subset, and the same for the
/// densities at every atom.
RnReport check_rn_inequality(const AtomicMeasureTriple& triple);

/// Random triples that satisfy the set-level hypothesis (rejection sampled).
std::vector<AtomicMeasureTriple> sample_rn_triples(std::size_t count, std::size_t max_atoms, std::uint64_t seed);

}  // namespace banach
