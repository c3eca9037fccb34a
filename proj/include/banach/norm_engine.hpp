#pragma once

// Unit-sphere numerics for finite-dimensional norms: sampling, the modulus of
// convexity and the parallelogram defect.
//
// Both estimators run a deterministic multi-start pattern search. The modulus
// estimate is the best feasible value found, hence an upper bound on the true
// infimum; the defect estimate is the best value found, hence a lower bound on
// the true supremum.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "banach/norm_spec.hpp"

namespace banach {

struct OptimizerBudget {
    std::size_t restarts = 64;
    std::size_t iterations = 200;
    std::uint64_t seed = 1;
};

struct SpherePair {
    std::vector<double> v;
    std::vector<double> w;
};

struct ModulusEstimate {
    double delta = 1.0;
    double distance = 0.0;  ///< norm(v - w) of the witness
    SpherePair witness;
};

struct ModulusCurve {
    std::vector<double> epsilons;
    std::vector<double> deltas;      ///< monotone (suffix-minimum of the raw values)
    std::vector<double> raw_deltas;  ///< one independent optimization per epsilon
    std::vector<SpherePair> witnesses;
    OptimizerBudget budget;
};

struct DefectEstimate {
    double defect = 0.0;         ///< |signed_defect|
    double signed_defect = 0.0;  ///< ||v+w||^2 + ||v-w||^2 - 2||v||^2 - 2||w||^2
    SpherePair witness;
};

/// {0.1, 0.2, ..., 2.0}
std::vector<double> default_epsilon_grid();

/// Grid start, start+step, ... up to and including stop (within 1e-9).
std::vector<double> epsilon_grid(double start, double stop, double step);

/// Gaussian directions rescaled onto the unit sphere of `norm`.
std::vector<std::vector<double>> sphere_sample(const NormFn& norm, std::size_t dimension, std::size_t count,
                                               std::uint64_t seed);
std::vector<std::vector<double>> sphere_sample(const NormSpec& spec, std::size_t count, std::uint64_t seed);

/// Unit vectors that tend to sit on faces or vertices of polyhedral balls:
/// coordinate axes, sign vectors (dimension <= 4) and the defining rows of
/// polyhedral kinds.
std::vector<std::vector<double>> structured_directions(const NormSpec& spec);
std::vector<std::vector<double>> structured_directions(const NormFn& norm, std::size_t dimension);

/// 1 - norm((v + w) / 2).
double midpoint_gap(const NormFn& norm, std::span<const double> v, std::span<const double> w);

/// ||v+w||^2 + ||v-w||^2 - 2||v||^2 - 2||w||^2.
double parallelogram_residual(const NormFn& norm, std::span<const double> v, std::span<const double> w);

/// Upper-bound estimate of the modulus of convexity at eps in (0, 2].
///
/// `anchors` are extra unit vectors mixed into the start set; `seeds` are
/// feasible pairs that start their own local searches.
ModulusEstimate modulus_of_convexity(const NormFn& norm, std::size_t dimension, double eps,
                                     const OptimizerBudget& budget,
                                     std::span<const std::vector<double>> anchors = {},
                                     std::span<const SpherePair> seeds = {});
ModulusEstimate modulus_of_convexity(const NormSpec& spec, double eps, const OptimizerBudget& budget);

ModulusCurve modulus_curve(const NormSpec& spec, std::span<const double> epsilons, const OptimizerBudget& budget);
ModulusCurve modulus_curve(const NormFn& norm, std::size_t dimension, std::span<const double> epsilons,
                           const OptimizerBudget& budget, std::span<const std::vector<double>> anchors = {});

/// Replace raw[i] by min_{j >= i} raw[j]; valid because each raw value bounds
/// a non-decreasing function from above.
std::vector<double> isotonic_clamp(std::span<const double> raw);

/// Lower-bound estimate of sup |parallelogram_residual| over unit pairs.
DefectEstimate parallelogram_defect(const NormFn& norm, std::size_t dimension, const OptimizerBudget& budget,
                                    std::span<const std::vector<double>> anchors = {});
DefectEstimate parallelogram_defect(const NormSpec& spec, const OptimizerBudget& budget);

}  // namespace banach
