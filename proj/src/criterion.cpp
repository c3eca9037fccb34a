#include "banach/criterion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "banach/errors.hpp"

namespace banach {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string exponent_text(double p) { return std::isinf(p) ? "inf" : fmt::format("{}", p); }

void check_finite_exponent(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw DomainError(fmt::format("condition 2a needs a finite exponent p >= 1, got {}", p));
    }
}

void check_mask_capacity(const Bundle& bundle) {
    if (bundle.atoms() > 64) {
        throw StructuralError(fmt::format("module criterion supports at most 64 atoms, got {}", bundle.atoms()));
    }
}

ScalarField masked(const ScalarField& f, std::uint64_t mask) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (mask >> i & 1U) ? f[i] : 0.0;
    return ScalarField(f.space(), std::move(out));
}

Section masked(const Section& v, std::uint64_t mask) {
    Section out = v;
    for (std::size_t i = 0; i < v.bundle()->atoms(); ++i) {
        if (!(mask >> i & 1U)) {
            for (double& x : out.at(i)) x = 0.0;
        }
    }
    return out;
}

std::uint64_t full_mask(std::size_t atoms) { return atoms >= 64 ? ~0ULL : (1ULL << atoms) - 1; }

// Norms of 1_E v for many subsets E of one probe. Catalogue norms only see
// |v|, so the fiber norms are evaluated once per probe.
class MaskedEvaluator {
public:
    MaskedEvaluator(const AbstractModuleNorm& norm, const Section& v,
                    const std::function<double(const ScalarField&)>* pointwise)
        : norm_(norm), v_(v), pointwise_(pointwise) {
        if (pointwise_ && *pointwise_) field_.emplace(pointwise_norm(v));
    }

    double operator()(std::uint64_t mask) const {
        if (field_) return (*pointwise_)(masked(*field_, mask));
        return norm_(masked(v_, mask));
    }

private:
    const AbstractModuleNorm& norm_;
    const Section& v_;
    const std::function<double(const ScalarField&)>* pointwise_;
    std::optional<ScalarField> field_;
};

}  // namespace

namespace {

std::function<double(const ScalarField&)> terms_on_field(std::vector<ModuleNormTerm> terms, TermCombine combine) {
    return [terms = std::move(terms), combine](const ScalarField& f) {
        double acc = 0.0;
        for (const auto& t : terms) {
            const double x = t.coefficient * lp_norm(f, t.exponent);
            acc = combine == TermCombine::Sum ? acc + x : std::max(acc, x);
        }
        return acc;
    };
}

}  // namespace

AbstractModuleNorm::AbstractModuleNorm(BundleRef bundle, std::string name, Fn fn)
    : bundle_(std::move(bundle)), name_(std::move(name)), fn_(std::move(fn)) {
    if (!bundle_) throw StructuralError("module norm: missing bundle");
}

double AbstractModuleNorm::operator()(const Section& v) const {
    if (!same_bundle(v.bundle(), bundle_)) throw StructuralError("module norm applied to a section of another bundle");
    return fn_(v);
}

AbstractModuleNorm AbstractModuleNorm::composed(BundleRef bundle, std::vector<ModuleNormTerm> terms,
                                                TermCombine combine) {
    if (terms.empty()) throw ConfigError("terms", "a composed module norm needs at least one term");
    std::string name;
    for (const auto& t : terms) {
        if (!(t.exponent >= 1.0)) throw DomainError(fmt::format("term exponent must be >= 1, got {}", t.exponent));
        if (!(t.coefficient > 0.0) || !std::isfinite(t.coefficient)) {
            throw DomainError(fmt::format("term coefficient must be positive, got {}", t.coefficient));
        }
        if (!name.empty()) name += combine == TermCombine::Sum ? " + " : " v ";
        name += t.coefficient == 1.0 ? fmt::format("G{}", exponent_text(t.exponent))
                                     : fmt::format("{}*G{}", t.coefficient, exponent_text(t.exponent));
    }
    if (combine == TermCombine::Max && terms.size() > 1) name = "max(" + name + ")";
    auto on_field = terms_on_field(terms, combine);
    AbstractModuleNorm out(bundle, name, [on_field](const Section& v) { return on_field(pointwise_norm(v)); });
    out.pointwise_ = on_field;
    return out;
}

AbstractModuleNorm AbstractModuleNorm::induced(BundleRef bundle, double p) {
    auto out = composed(std::move(bundle), {{p, 1.0}}, TermCombine::Sum);
    out.name_ = fmt::format("induced-G{}", exponent_text(p));
    return out;
}

AbstractModuleNorm AbstractModuleNorm::sup_over_atoms(BundleRef bundle) {
    auto out = composed(std::move(bundle), {{kInf, 1.0}}, TermCombine::Sum);
    out.name_ = "sup-over-atoms";
    return out;
}

AbstractModuleNorm AbstractModuleNorm::mixed_sum(BundleRef bundle, double p, double p2) {
    return composed(std::move(bundle), {{p, 1.0}, {p2, 1.0}}, TermCombine::Sum);
}

AbstractModuleNorm AbstractModuleNorm::mixed_max(BundleRef bundle, double p, double p2) {
    return composed(std::move(bundle), {{p, 1.0}, {p2, 1.0}}, TermCombine::Max);
}

AbstractModuleNorm AbstractModuleNorm::custom(BundleRef bundle, std::string name, Fn fn) {
    return AbstractModuleNorm(std::move(bundle), std::move(name), std::move(fn));
}

std::vector<Section> random_sections(const BundleRef& bundle, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Section> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> flat(bundle->total_dimension());
        for (double& x : flat) x = g(rng);
        out.emplace_back(bundle, flat);
    }
    return out;
}

NormValidation validate_module_norm(const AbstractModuleNorm& norm, std::size_t probes, std::uint64_t seed) {
    NormValidation out;
    const auto& bundle = norm.bundle();
    if (bundle->total_dimension() == 0) {
        out.passed = true;
        return out;
    }
    const auto a = random_sections(bundle, probes, seed);
    const auto b = random_sections(bundle, probes, seed ^ 0x5bd1e995ULL);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> lam(-5.0, 5.0);
    bool positive = true;
    for (std::size_t k = 0; k < probes; ++k) {
        const double na = norm(a[k]);
        const double nb = norm(b[k]);
        positive = positive && na > 0.0 && nb > 0.0;
        const double l = lam(rng);
        const double scale = std::max(std::fabs(l) * na, 1e-300);
        out.max_homogeneity_residual =
            std::max(out.max_homogeneity_residual, std::fabs(norm(l * a[k]) - std::fabs(l) * na) / scale);
        out.max_triangle_excess = std::max(out.max_triangle_excess, (norm(a[k] + b[k]) - na - nb) / (na + nb));
        ++out.probes;
    }
    out.passed = positive && out.max_homogeneity_residual <= kNormAxiomTolerance &&
                 out.max_triangle_excess <= kNormAxiomTolerance;
    return out;
}

double mu_v(const AbstractModuleNorm& norm, double p, const Section& v, std::uint64_t mask) {
    check_finite_exponent(p);
    check_mask_capacity(*v.bundle());
    return std::pow(norm(masked(v, mask)), p);
}

Condition2aReport check_condition_2a(const AbstractModuleNorm& norm, double p, const std::vector<Section>& probes,
                                     std::uint64_t seed) {
    check_finite_exponent(p);
    if (probes.empty()) throw DomainError("condition 2a needs at least one probe section");
    const auto& bundle = *norm.bundle();
    check_mask_capacity(bundle);
    const std::size_t atoms = bundle.atoms();
    const std::uint64_t all = full_mask(atoms);

    Condition2aReport report;
    report.p = p;
    report.enumerated = atoms <= kFullEnumerationAtoms;

    std::vector<std::uint64_t> masks;
    if (report.enumerated) {
        masks.resize(std::size_t{1} << atoms);
        for (std::size_t m = 0; m < masks.size(); ++m) masks[m] = m;
    } else {
        std::mt19937_64 rng(seed);
        masks.resize(kSampledSubsets);
        for (auto& m : masks) m = rng() & all;
    }
    report.subsets_per_probe = masks.size();

    for (std::size_t k = 0; k < probes.size(); ++k) {
        const Section& v = probes[k];
        if (!same_bundle(v.bundle(), norm.bundle())) throw StructuralError("probe section lives on another bundle");
        MaskedEvaluator eval(norm, v, &norm.pointwise_form());
        const double whole = std::pow(eval(all), p);
        SubsetResidual worst{k, 0, 0.0};
        for (std::uint64_t m : masks) {
            const double r = std::fabs(std::pow(eval(m), p) + std::pow(eval(all & ~m), p) - whole);
            if (r > worst.residual) worst = SubsetResidual{k, m, r};
        }
        report.per_probe_worst.push_back(worst);
        if (worst.residual >= report.max_residual) {
            report.max_residual = worst.residual;
            report.worst = worst;
        }
        ++report.probes;
    }
    report.passed = report.max_residual <= kCondition2aTolerance;
    return report;
}

namespace {

// Deterministic per-(seed, n) stream for the random family.
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<NullSequence> null_sequences(const SpaceRef& space, std::uint64_t seed) {
    const std::size_t atoms = space->size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<double> subset(atoms, 0.0);
    for (std::size_t i = 0; i < atoms; ++i) subset[i] = (rng() & 1U) ? 1.0 : 0.0;
    if (atoms > 0) subset[rng() % atoms] = 1.0;
    std::vector<double> profile(atoms);
    for (double& x : profile) x = unit(rng);

    std::vector<NullSequence> out;
    out.push_back({"harmonic-indicator",
                   [space](std::uint64_t n) { return ScalarField::constant(space, 1.0 / static_cast<double>(n)); },
                   [](std::uint64_t n) { return 1.0 / static_cast<double>(n); }});
    out.push_back({"alternating-harmonic-subset",
                   [space, subset](std::uint64_t n) {
                       const double s = (n % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(n);
                       std::vector<double> v(subset);
                       for (double& x : v) x *= s;
                       return ScalarField(space, std::move(v));
                   },
                   [](std::uint64_t n) { return 1.0 / static_cast<double>(n); }});
    out.push_back({"geometric-profile",
                   [space, profile](std::uint64_t n) {
                       const double s = std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(n, 2000)));
                       std::vector<double> v(profile);
                       for (double& x : v) x *= s;
                       return ScalarField(space, std::move(v));
                   },
                   [](std::uint64_t n) { return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(n, 2000))); }});
    out.push_back({"random-over-sqrt",
                   [space, seed](std::uint64_t n) {
                       std::mt19937_64 local(splitmix(seed ^ splitmix(n)));
                       std::uniform_real_distribution<double> u(-1.0, 1.0);
                       std::vector<double> v(space->size());
                       const double s = 1.0 / std::sqrt(static_cast<double>(n));
                       for (double& x : v) x = s * u(local);
                       return ScalarField(space, std::move(v));
                   },
                   [](std::uint64_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }});
    return out;
}

bool is_atomwise_null(const NullSequence& seq, std::uint64_t horizon, double tolerance) {
    if (horizon == 0) return false;
    for (std::uint64_t n = 1;; n = n > horizon / 10 ? horizon : n * 10) {
        const ScalarField f = seq.term(n);
        const double env = seq.envelope(n);
        if (!(env <= 1.0)) return false;
        for (double x : f.values()) {
            if (!(std::fabs(x) <= env * (1.0 + 1e-12))) return false;
        }
        if (n == horizon) return env <= tolerance;
    }
}

Condition2bReport check_condition_2b(const AbstractModuleNorm& norm, const std::vector<Section>& probes,
                                     std::uint64_t seed, std::uint64_t horizon) {
    Condition2bReport report;
    report.horizon = horizon;
    const auto sequences = null_sequences(norm.bundle()->space(), seed);
    for (const auto& seq : sequences) {
        if (!is_atomwise_null(seq, horizon, kCondition2bTolerance)) {
            throw InternalError(fmt::format("null-sequence generator emitted '{}', which is not atomwise null", seq.name));
        }
        SequenceResult r{seq.name, 0.0};
        const ScalarField f = seq.term(horizon);
        for (const auto& v : probes) {
            const double nv = norm(v);
            if (nv == 0.0) continue;
            r.max_norm_at_horizon = std::max(r.max_norm_at_horizon, norm(module_action(f, v)) / nv);
        }
        report.max_value = std::max(report.max_value, r.max_norm_at_horizon);
        report.sequences.push_back(std::move(r));
    }
    report.passed = report.max_value <= kCondition2bTolerance;
    return report;
}

std::vector<Section> unit_probes(const AbstractModuleNorm& norm, const std::vector<Section>& probes) {
    std::vector<Section> out;
    out.reserve(probes.size());
    for (const auto& v : probes) {
        const double n = norm(v);
        out.push_back(n > 0.0 ? (1.0 / n) * v : v);
    }
    return out;
}

ScalarField reconstruct_pointwise_norm(const AbstractModuleNorm& norm, double p, const Section& v) {
    // 2a is homogeneous of degree p, so it is checked on v / ||v||.
    const auto check = check_condition_2a(norm, p, unit_probes(norm, {v}));
    if (!check.passed) {
        throw DomainError(fmt::format(
            "norm '{}' fails condition 2a for this section (residual {:.3e} on subset mask {:#x}); "
            "mu_v is not additive, so no pointwise norm can be recovered",
            norm.name(), check.max_residual, check.worst.mask));
    }
    const auto& bundle = *v.bundle();
    std::vector<double> out(bundle.atoms());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double mu = mu_v(norm, p, v, 1ULL << i);
        out[i] = std::pow(mu / bundle.space()->weight(i), 1.0 / p);
    }
    return ScalarField(bundle.space(), std::move(out));
}

RnReport check_rn_inequality(const AtomicMeasureTriple& t) {
    if (!t.space) throw StructuralError("measure triple: missing space");
    const std::size_t n = t.space->size();
    if (n > kRnMaxAtoms) {
        throw DomainError(fmt::format("measure triple has {} atoms; full subset enumeration is limited to {}", n,
                                      kRnMaxAtoms));
    }
    if (t.d1.size() != n || t.d2.size() != n || t.d3.size() != n) {
        throw StructuralError("measure triple: density lengths must match the atom count");
    }
    if (!(t.alpha > 0.0) || !std::isfinite(t.alpha)) throw DomainError("measure triple: alpha must be positive");
    for (const auto* d : {&t.d1, &t.d2, &t.d3}) {
        for (double x : *d) {
            if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("measure triple: densities must be nonnegative");
        }
    }

    const std::size_t count = std::size_t{1} << n;
    std::vector<double> m1(count, 0.0), m2(count, 0.0), m3(count, 0.0);
    RnReport r;
    r.subsets = count;
    r.set_level_holds = true;
    r.min_set_margin = kInf;
    for (std::size_t mask = 1; mask < count; ++mask) {
        const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
        const std::size_t rest = mask & (mask - 1);
        const double w = t.space->weight(low);
        m1[mask] = m1[rest] + w * t.d1[low];
        m2[mask] = m2[rest] + w * t.d2[low];
        m3[mask] = m3[rest] + w * t.d3[low];
        const double margin = std::pow(m2[mask], t.alpha) + std::pow(m3[mask], t.alpha) - std::pow(m1[mask], t.alpha);
        if (margin < r.min_set_margin) {
            r.min_set_margin = margin;
            r.worst_mask = mask;
        }
        if (margin < 0.0) r.set_level_holds = false;
    }
    if (count == 1) r.min_set_margin = 0.0;

    r.density_level_holds = true;
    r.min_density_margin = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        const double lhs = std::pow(t.d1[i], t.alpha);
        const double margin = std::pow(t.d2[i], t.alpha) + std::pow(t.d3[i], t.alpha) - lhs;
        r.min_density_margin = std::min(r.min_density_margin, margin);
        if (margin < -1e-12 * (1.0 + lhs)) r.density_level_holds = false;
    }
    if (n == 0) r.min_density_margin = 0.0;
    r.violation = r.set_level_holds && !r.density_level_holds;
    return r;
}

std::vector<AtomicMeasureTriple> sample_rn_triples(std::size_t count, std::size_t max_atoms, std::uint64_t seed) {
    if (max_atoms == 0 || max_atoms > kRnMaxAtoms) {
        throw DomainError(fmt::format("max_atoms must lie in [1, {}]", kRnMaxAtoms));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(0.1, 3.0);
    std::uniform_real_distribution<double> density(0.0, 2.0);
    std::uniform_real_distribution<double> shrink(0.0, 1.1);
    std::uniform_real_distribution<double> alpha(0.1, 4.0);
    std::vector<AtomicMeasureTriple> out;
    out.reserve(count);
    while (out.size() < count) {
        const std::size_t n = 1 + rng() % max_atoms;
        std::vector<double> w(n);
        for (double& x : w) x = weight(rng);
        AtomicMeasureTriple t;
        t.space = MeasureSpace::with_weights(std::move(w));
        t.alpha = alpha(rng);
        t.d1.resize(n);
        t.d2.resize(n);
        t.d3.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            t.d2[i] = rng() % 5 == 0 ? 0.0 : density(rng);
            t.d3[i] = rng() % 5 == 0 ? 0.0 : density(rng);
            const double cap = std::pow(std::pow(t.d2[i], t.alpha) + std::pow(t.d3[i], t.alpha), 1.0 / t.alpha);
            t.d1[i] = shrink(rng) * cap;
        }
        if (check_rn_inequality(t).set_level_holds) out.push_back(std::move(t));
    }
    return out;
}

}  // namespace banach
