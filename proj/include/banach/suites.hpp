#pragma once

// Randomized instance generation and the executable forms of the
// equivalence theorems for section spaces.
//
// A suite emits one CheckRow per measured quantity. A row compares `value`
// against `reference + tolerance` (or requires it to exceed that, for
// relation ">"); `holds` is that outcome and `expected` is what the theorem
// predicts for the instance. A row is a discrepancy when the two differ.
// Rows whose check does not hold always carry a replayable witness.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "banach/bundle.hpp"
#include "banach/norm_engine.hpp"

namespace banach {

struct InstanceRecipe {
    std::uint64_t seed = 1;
    std::size_t instances = 20;
    std::size_t min_atoms = 1;
    std::size_t max_atoms = 4;
    std::size_t min_dimension = 1;
    std::size_t max_dimension = 3;
    /// Relative frequency of inner_product, weighted_lp, polyhedral_max and
    /// polytope_gauge fibers.
    std::array<double, 4> kind_weights{1.0, 1.0, 1.0, 1.0};
    /// r values drawn for weighted_lp fibers.
    std::vector<double> fiber_exponents{1.0, 1.5, 2.0, 3.0, 4.0, std::numeric_limits<double>::infinity()};
    /// Atom weights are log-uniform on [weight_min, weight_max].
    double weight_min = 0.25;
    double weight_max = 4.0;
    /// Share of instances whose atoms all carry the same fiber.
    double constant_fraction = 0.2;
    /// The exponents p at which Gamma_p(E) is examined.
    std::vector<double> exponents{1.5, 2.0, 3.0};
};

/// ConfigError when the recipe is inconsistent.
void validate_recipe(const InstanceRecipe& recipe);

/// Instance `index` of the recipe; a pure function of (recipe, index).
BundleRef generate_instance(const InstanceRecipe& recipe, std::size_t index);
std::vector<BundleRef> generate_instances(const InstanceRecipe& recipe);

/// The instances a suite runs over, with the exponents p examined on each.
struct SuiteInput {
    std::vector<BundleRef> instances;
    std::vector<double> exponents{1.5, 2.0, 3.0};
    std::uint64_t seed = 1;

    static SuiteInput from_recipe(const InstanceRecipe& recipe);
};

/// ConfigError for exponents outside (1, inf) or bundles above 64 atoms.
void validate_input(const SuiteInput& input);

struct SuiteBudget {
    OptimizerBudget fiber{16, 120, 1};   ///< fiberwise modulus and defect searches
    OptimizerBudget module{2, 40, 1};    ///< searches on the flattened section space
    std::size_t samples = 20;            ///< random sections or pairs per instance and exponent
    std::size_t probe_directions = 12;   ///< random directions of the pointwise probe
    std::size_t rn_triples = 10'000;
    std::size_t rn_max_atoms = 8;
    /// Worker threads; 0 picks the hardware concurrency.
    std::size_t threads = 0;
};

struct CheckRow {
    std::string claim;
    std::string suite;
    std::size_t instance = 0;
    std::string digest;
    std::string check;
    double p = std::numeric_limits<double>::quiet_NaN();
    double eps = std::numeric_limits<double>::quiet_NaN();
    long atom = -1;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    std::string relation = "<=";
    bool holds = true;
    bool expected = true;
    std::string witness;

    bool discrepancy() const noexcept { return holds != expected; }
};

enum class Verdict { Pass, Fail };

std::string_view verdict_name(Verdict v) noexcept;

struct TheoremReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::size_t instances = 0;
    std::size_t evaluated = 0;
    bool vacuous = false;
    std::vector<std::string> claims;
    std::vector<CheckRow> rows;
    std::vector<std::string> notes;
    Verdict verdict = Verdict::Pass;

    std::size_t discrepancies() const noexcept;
    double max_value(std::string_view check) const noexcept;
};

/// Fills `holds` from the comparison, then the verdict: PASS iff no row is a
/// discrepancy. InternalError if a row that does not hold lacks a witness,
/// or if the verdict contradicts the rows.
void finalize_report(TheoremReport& report);

// Claim tags, one per verified statement.
inline constexpr std::string_view kClaimHilbert = "hilbert-bundle-iff-hilbert-module";
inline constexpr std::string_view kClaimModulusBelowPointwise = "module-modulus-below-pointwise-modulus";
inline constexpr std::string_view kClaimBundleUpperBound = "section-modulus-below-fiber-modulus";
inline constexpr std::string_view kClaimPointwiseEquivalence = "pointwise-uniform-convexity-lower-bound";
inline constexpr std::string_view kClaimUniformlyConvexBundle = "uniformly-convex-bundle-gives-uniformly-convex-module";
inline constexpr std::string_view kClaimPointwiseEquality = "fiber-modulus-equals-pointwise-modulus";
inline constexpr std::string_view kClaimDual = "dual-of-section-space";
inline constexpr std::string_view kClaimTheta = "theta-isometric-embedding";
inline constexpr std::string_view kClaimReflexive = "section-space-reflexive";
inline constexpr std::string_view kClaimConstantBundle = "constant-bundle-reflexivity";
inline constexpr std::string_view kClaimCriterion = "norm-induced-by-pointwise-norm";
inline constexpr std::string_view kClaimRn = "radon-nikodym-inequality";

inline constexpr std::array<std::string_view, 12> kClaimTags{
    kClaimHilbert,        kClaimModulusBelowPointwise, kClaimBundleUpperBound, kClaimPointwiseEquivalence,
    kClaimUniformlyConvexBundle, kClaimPointwiseEquality, kClaimDual,          kClaimTheta,
    kClaimReflexive,      kClaimConstantBundle,        kClaimCriterion,        kClaimRn,
};

inline constexpr std::array<std::string_view, 7> kSuiteNames{"hilbert", "uc-upper", "uc-lower", "pointwise",
                                                            "duality", "criterion", "rn"};

// Tolerances.
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kArithmeticTolerance = 1e-9;
inline constexpr double kClosedFormTolerance = 1e-6;
inline constexpr double kOptimizerTolerance = 2e-3;
inline constexpr double kOptimizerFloor = 1e-4;
inline constexpr double kLowerBoundHypothesis = 0.01;

TheoremReport suite_hilbert_equivalence(const SuiteInput& input, const SuiteBudget& budget);
TheoremReport suite_uc_upper_bound(const SuiteInput& input, std::span<const double> epsilons,
                                   const SuiteBudget& budget);
TheoremReport suite_uc_qualitative_lower(const SuiteInput& input, std::span<const double> epsilons,
                                         const SuiteBudget& budget);
TheoremReport suite_pointwise_equality(const SuiteInput& input, std::span<const double> epsilons,
                                       const SuiteBudget& budget);
TheoremReport suite_duality(const SuiteInput& input, const SuiteBudget& budget);
TheoremReport suite_criterion(const SuiteInput& input, const SuiteBudget& budget);
TheoremReport suite_rn_inequality(std::uint64_t seed, const SuiteBudget& budget);

/// Dispatch by name (one of kSuiteNames); ConfigError for unknown names.
TheoremReport run_suite(std::string_view name, const SuiteInput& input, std::span<const double> epsilons,
                        const SuiteBudget& budget);

/// Gamma_p modulus of the bundle at eps, searched on the flattened section
/// space. `seeds` start extra local searches.
ModulusEstimate section_modulus(const BundleRef& bundle, double p, double eps, const OptimizerBudget& budget,
                                std::span<const SpherePair> seeds = {});

struct SectionCurve {
    double p = 2.0;
    std::vector<double> epsilons;
    std::vector<double> fiber_ess_inf;  ///< min over atoms of the monotone fiber curves
    std::vector<ModulusEstimate> raw;   ///< one seeded section search per epsilon
    std::vector<double> deltas;         ///< monotone (suffix minimum of raw)
};

/// Gamma_p modulus curves for each exponent, with every section search
/// seeded by localized witnesses of the atoms attaining the fiber minimum.
std::vector<SectionCurve> section_modulus_curves(const BundleRef& bundle, std::span<const double> exponents,
                                                std::span<const double> epsilons, const OptimizerBudget& fiber,
                                                const OptimizerBudget& module);

/// Pair of Gamma_p unit sections supported on `atom`, built from a fiber
/// witness by scaling with w_atom^(-1/p); empty for a zero fiber.
std::vector<SpherePair> localized_witness(const Bundle& bundle, std::size_t atom, double p,
                                          const SpherePair& fiber_pair);

struct PointwiseProbe {
    double delta = 1.0;
    Section v;
    Section w;
};

/// Module-level estimate of the pointwise modulus at `atom`: sections
/// supported on that atom, boundary pairs located by bisection along chords,
/// then a shrinking random refinement. Shares no code with the fiber
/// optimizer.
PointwiseProbe pointwise_modulus_probe(const BundleRef& bundle, std::size_t atom, double eps,
                                       std::size_t random_directions, std::uint64_t seed);

}  // namespace banach
