#pragma once

// Dual sections, the pairings I and theta, operator norms of module
// functionals and the reflexivity diagram for section spaces.
//
// Continuous linear functionals on Gamma_p(E) (and on Gamma_q(E'), and so on)
// are finite-dimensional here. They are stored as coefficient vectors t over
// the flat section layout, acting by the plain dot product t . v.

#include <cstdint>
#include <vector>

#include "banach/bundle.hpp"

namespace banach {

/// x -> ||w(x)||_{E(x)'}.
ScalarField dual_pointwise_norm(const DualSection& w);

/// || |w| ||_{L^q}.
double gamma_q_norm(const DualSection& w, double q);

/// x -> <w(x), v(x)>, the integrand of I(w) applied to v.
ScalarField apply_I(const DualSection& w, const Section& v);

/// x -> <w(x), v(x)>, the integrand of theta(v) applied to w.
ScalarField apply_theta(const Section& v, const DualSection& w);

/// int <w, v> dm.
double pairing(const DualSection& w, const Section& v);

/// Unit vector of Gamma_p(E) at which int <w, .> dm attains its supremum;
/// zero when w vanishes. Requires p in (1, inf).
Section holder_maximizer(const DualSection& w, double p);

/// Unit vector of Gamma_q(E') at which int <., v> dm attains its supremum.
DualSection theta_maximizer(const Section& v, double p);

/// Norm of I(w) in Gamma_p(E)*, evaluated at the Hoelder maximizer.
double operator_norm(const DualSection& w, double p);

/// Norm of theta(v) in Gamma_q(E')*, evaluated at its maximizer.
double theta_norm(const Section& v, double p);

/// Multi-start search for sup { int <w, v> dm : ||v||_{Gamma_p} <= 1 }.
/// A lower bound on operator_norm, independent of the closed form.
double operator_norm_search(const DualSection& w, double p, const OptimizerBudget& budget);

/// int <w, v> dm, i.e. <J(v), w>.
double james_pairing(const Section& v, const DualSection& w);

/// x -> sup { <w, v(x)> : ||w||_{E(x)'} <= 1 }, the pointwise norm of J(v).
ScalarField bidual_pointwise_norm(const Section& v);

// Coefficient forms of the maps in the reflexivity diagram.

/// I(w) as a functional on Gamma_p(E).
std::vector<double> functional_of_I(const DualSection& w);
/// J = I^{-1}: recovers the dual section representing a functional t.
DualSection inverse_I(const BundleRef& bundle, std::span<const double> t);
/// theta(v) as a functional on Gamma_q(E').
std::vector<double> functional_of_theta(const Section& v);
/// J^ad(phi) as a functional on Gamma_p(E)*, for phi a functional on Gamma_q(E').
std::vector<double> adjoint_of_inverse_I(const BundleRef& bundle, std::span<const double> phi);
/// J_{Gamma_p(E)}(v) as a functional on Gamma_p(E)*.
std::vector<double> james_embedding(const Section& v);

struct ReflexivityReport {
    bool degenerate = false;
    bool constant_bundle = false;
    std::size_t samples = 0;
    double max_diagram_residual = 0.0;        ///< |<(J^ad o theta)(v), T> - <T, v>|
    double max_bidual_norm_residual = 0.0;    ///< max_x ||J(v)|(x) - |v|(x)|
    double max_constant_chain_residual = 0.0; ///< same pairing through iota and j (constant bundles)
    bool passed = false;
};

inline constexpr double kDiagramTolerance = 1e-9;
inline constexpr double kBidualNormTolerance = 1e-6;

ReflexivityReport check_reflexivity_diagram(const BundleRef& bundle, double p, std::size_t samples,
                                            std::uint64_t seed);

}  // namespace banach
