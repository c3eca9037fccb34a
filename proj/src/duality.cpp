#include "banach/duality.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "banach/errors.hpp"
#include "banach/exponent.hpp"
#include "banach/simd/kernels.hpp"

namespace banach {
namespace {

void check_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError(fmt::format("exponent must lie in (1,∞), got {}", p));
}

void check_shared(const BundleRef& a, const BundleRef& b) {
    if (!same_bundle(a, b)) throw StructuralError("section and dual section live on different bundles");
}

// Per-atom weights repeated over the flat layout.
std::vector<double> flat_weights(const Bundle& bundle) {
    std::vector<double> out;
    out.reserve(bundle.total_dimension());
    for (std::size_t i = 0; i < bundle.atoms(); ++i) out.insert(out.end(), bundle.dimension(i), bundle.space()->weight(i));
    return out;
}

}  // namespace

ScalarField dual_pointwise_norm(const DualSection& w) {
    const auto& bundle = *w.bundle();
    std::vector<double> out(bundle.atoms());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bundle.fiber(i).dual_norm_of(w.at(i));
    return ScalarField(bundle.space(), std::move(out));
}

double gamma_q_norm(const DualSection& w, double q) { return lp_norm(dual_pointwise_norm(w), q); }

ScalarField apply_I(const DualSection& w, const Section& v) {
    check_shared(w.bundle(), v.bundle());
    const auto& bundle = *v.bundle();
    std::vector<double> out(bundle.atoms());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = simd::dot(w.at(i), v.at(i));
    return ScalarField(bundle.space(), std::move(out));
}

ScalarField apply_theta(const Section& v, const DualSection& w) { return apply_I(w, v); }

double pairing(const DualSection& w, const Section& v) { return integrate(apply_I(w, v)); }

Section holder_maximizer(const DualSection& w, double p) {
    check_exponent(p);
    const double q = conjugate_exponent(p);
    const auto& bundle = *w.bundle();
    const auto a = dual_pointwise_norm(w);
    const double total = lp_norm(a, q);
    Section v = Section::zero(w.bundle());
    if (total == 0.0) return v;
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        if (a[i] == 0.0) continue;
        // |v|(x) = (|w|(x) / ||w||_q)^(q-1) gives ||v||_p = 1 and equality in Hoelder.
        const double magnitude = std::pow(a[i] / total, q - 1.0);
        const auto u = bundle.fiber(i).norm->dual_maximizer(w.at(i));
        auto dst = v.at(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = magnitude * u[j];
    }
    return v;
}

DualSection theta_maximizer(const Section& v, double p) {
    check_exponent(p);
    const auto& bundle = *v.bundle();
    const auto b = pointwise_norm(v);
    const double total = lp_norm(b, p);
    DualSection w = DualSection::zero(v.bundle());
    if (total == 0.0) return w;
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        if (b[i] == 0.0) continue;
        const double magnitude = std::pow(b[i] / total, p - 1.0);
        const auto f = bundle.fiber(i).norm->norming_functional(v.at(i));
        auto dst = w.at(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = magnitude * f[j];
    }
    return w;
}

double operator_norm(const DualSection& w, double p) {
    const Section v = holder_maximizer(w, p);
    const double n = gamma_p_norm(v, p);
    return n == 0.0 ? 0.0 : pairing(w, v) / n;
}

double theta_norm(const Section& v, double p) {
    const DualSection w = theta_maximizer(v, p);
    const double n = gamma_q_norm(w, conjugate_exponent(p));
    return n == 0.0 ? 0.0 : pairing(w, v) / n;
}

double operator_norm_search(const DualSection& w, double p, const OptimizerBudget& budget) {
    check_exponent(p);
    const auto& bundle = *w.bundle();
    const std::size_t n = bundle.total_dimension();
    if (n == 0) return 0.0;
    auto ratio = [&](const std::vector<double>& flat) {
        const Section v(w.bundle(), flat);
        const double norm = gamma_p_norm(v, p);
        return norm > 0.0 ? pairing(w, v) / norm : -std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> starts;
    {
        // Fiber maximizers with a flat magnitude profile.
        std::vector<double> flat(n, 0.0);
        for (std::size_t i = 0; i < bundle.atoms(); ++i) {
            if (bundle.dimension(i) == 0) continue;
            const auto u = bundle.fiber(i).norm->dual_maximizer(w.at(i));
            std::copy(u.begin(), u.end(), flat.begin() + static_cast<std::ptrdiff_t>(bundle.offset(i)));
        }
        starts.push_back(std::move(flat));
    }
    std::mt19937_64 rng(budget.seed);
    std::normal_distribution<double> gauss;
    for (std::size_t r = 0; r < budget.restarts; ++r) {
        std::vector<double> flat(n);
        for (double& x : flat) x = gauss(rng);
        starts.push_back(std::move(flat));
    }

    double best = -std::numeric_limits<double>::infinity();
    for (auto& x : starts) {
        double value = ratio(x);
        double step = 0.5;
        for (std::size_t it = 0; it < budget.iterations && step > 1e-10; ++it) {
            bool improved = false;
            const double before = value;
            const double scale = std::max(1e-12, *std::max_element(x.begin(), x.end(), [](double a, double b) {
                return std::fabs(a) < std::fabs(b);
            }));
            // Rescaling one atom's block moves along the magnitude profile.
            for (std::size_t i = 0; i < bundle.atoms(); ++i) {
                for (double sign : {1.0, -1.0}) {
                    auto trial = x;
                    const double f = 1.0 + sign * step;
                    for (std::size_t j = 0; j < bundle.dimension(i); ++j) trial[bundle.offset(i) + j] *= f;
                    const double t = ratio(trial);
                    if (t > value + 1e-15) {
                        x = std::move(trial);
                        value = t;
                        improved = true;
                        break;
                    }
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                for (double sign : {1.0, -1.0}) {
                    auto trial = x;
                    trial[j] += sign * step * std::fabs(scale);
                    const double t = ratio(trial);
                    if (t > value + 1e-15) {
                        x = std::move(trial);
                        value = t;
                        improved = true;
                        break;
                    }
                }
            }
            // Random directions get past ridges of polyhedral fiber norms,
            // where every coordinate move is uphill in some facet.
            for (std::size_t d = 0; d < n; ++d) {
                std::vector<double> dir(n);
                for (double& c : dir) c = gauss(rng);
                const double len = euclidean_length(dir);
                for (double sign : {1.0, -1.0}) {
                    auto trial = x;
                    for (std::size_t j = 0; j < n; ++j) trial[j] += sign * step * std::fabs(scale) * dir[j] / len;
                    const double t = ratio(trial);
                    if (t > value + 1e-15) {
                        x = std::move(trial);
                        value = t;
                        improved = true;
                        break;
                    }
                }
            }
            // Gains that are small for the current step do not justify keeping it.
            if (!improved || value - before < 1e-3 * step * std::fabs(value)) step *= 0.5;
        }
        best = std::max(best, value);
    }
    return std::max(best, 0.0);
}

double james_pairing(const Section& v, const DualSection& w) { return pairing(w, v); }

ScalarField bidual_pointwise_norm(const Section& v) {
    const auto& bundle = *v.bundle();
    std::vector<double> out(bundle.atoms(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (bundle.dimension(i) == 0) continue;
        out[i] = bundle.fiber(i).norm->dual().dual_norm(v.at(i));
    }
    return ScalarField(bundle.space(), std::move(out));
}

std::vector<double> functional_of_I(const DualSection& w) {
    const auto weights = flat_weights(*w.bundle());
    std::vector<double> t(weights.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = weights[k] * w.flat()[k];
    return t;
}

DualSection inverse_I(const BundleRef& bundle, std::span<const double> t) {
    const auto weights = flat_weights(*bundle);
    if (t.size() != weights.size()) throw StructuralError("functional length does not match the bundle");
    std::vector<double> out(t.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = t[k] / weights[k];
    return DualSection(bundle, out);
}

std::vector<double> functional_of_theta(const Section& v) {
    const auto weights = flat_weights(*v.bundle());
    std::vector<double> s(weights.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = weights[k] * v.flat()[k];
    return s;
}

std::vector<double> adjoint_of_inverse_I(const BundleRef& bundle, std::span<const double> phi) {
    // <J^ad(phi), T> = <phi, J(T)> = sum_k phi_k t_k / w_k.
    const auto weights = flat_weights(*bundle);
    if (phi.size() != weights.size()) throw StructuralError("functional length does not match the bundle");
    std::vector<double> r(phi.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = phi[k] / weights[k];
    return r;
}

std::vector<double> james_embedding(const Section& v) { return {v.flat().begin(), v.flat().end()}; }

namespace {

// The Bochner-space chain j_{L^p(B)} = (iota_B^{-1})^ad o iota_{B'} o j_B,
// evaluated on L = I(w) at v; returns |lhs - rhs| and the bidual norm gap of j_B.
std::pair<double, double> constant_chain_residual(const Section& v, std::span<const double> L) {
    const auto& bundle = *v.bundle();
    const NormSpec& b = *bundle.fiber(0).norm;
    const NormSpec bidual = b.dual().dual();
    const std::size_t n = b.dimension();
    double norm_gap = 0.0;
    // j_B(v(x)) in B'' has the same coordinates; its norm there must be ||v(x)||_B.
    std::vector<double> jb(v.flat().begin(), v.flat().end());
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        norm_gap = std::max(norm_gap, std::fabs(bidual.norm(v.at(i)) - b.norm(v.at(i))));
    }
    // iota_{B'}(Phi) on L^q(B'): coefficients w_x Phi(x).
    std::vector<double> iota_bprime(jb.size());
    // (iota_B^{-1})^ad(T) on L^p(B)': <T, iota_B^{-1}(L)> with iota_B^{-1}(L)(x) = L(x) / w_x.
    double lhs = 0.0;
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        const double w = bundle.space()->weight(i);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = i * n + j;
            iota_bprime[k] = w * jb[k];
            lhs += iota_bprime[k] * (L[k] / w);
        }
    }
    const double rhs = simd::dot(L, v.flat());
    return {std::fabs(lhs - rhs), norm_gap};
}

}  // namespace

ReflexivityReport check_reflexivity_diagram(const BundleRef& bundle, double p, std::size_t samples,
                                            std::uint64_t seed) {
    check_exponent(p);
    ReflexivityReport report;
    report.degenerate = bundle->degenerate();
    report.constant_bundle = !report.degenerate && bundle->is_constant();
    if (report.degenerate) {
        report.passed = true;
        return report;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const std::size_t n = bundle->total_dimension();
    auto draw = [&] {
        std::vector<double> x(n);
        for (double& c : x) c = gauss(rng);
        return x;
    };
    for (std::size_t s = 0; s < samples; ++s) {
        const Section v(bundle, draw());
        // T is drawn through its representing dual section.
        const DualSection omega(bundle, draw());
        const auto t = functional_of_I(omega);

        const auto lhs_functional = adjoint_of_inverse_I(bundle, functional_of_theta(v));
        const double lhs = simd::dot(lhs_functional, t);
        const double rhs = simd::dot(james_embedding(v), t);
        const double direct = simd::dot(t, v.flat());
        const double via_theta = pairing(inverse_I(bundle, t), v);
        report.max_diagram_residual =
            std::max({report.max_diagram_residual, std::fabs(lhs - rhs), std::fabs(lhs - direct),
                      std::fabs(via_theta - direct)});

        const auto a = bidual_pointwise_norm(v);
        const auto b = pointwise_norm(v);
        for (std::size_t i = 0; i < a.size(); ++i) {
            report.max_bidual_norm_residual = std::max(report.max_bidual_norm_residual, std::fabs(a[i] - b[i]));
        }

        if (report.constant_bundle) {
            const auto [chain, gap] = constant_chain_residual(v, t);
            report.max_constant_chain_residual = std::max(report.max_constant_chain_residual, chain);
            report.max_bidual_norm_residual = std::max(report.max_bidual_norm_residual, gap);
        }
        ++report.samples;
    }
    report.passed = report.max_diagram_residual <= kDiagramTolerance &&
                    report.max_constant_chain_residual <= kDiagramTolerance &&
                    report.max_bidual_norm_residual <= kBidualNormTolerance;
    return report;
}

}  // namespace banach
