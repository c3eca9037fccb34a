#include "banach/bundle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "banach/errors.hpp"

namespace banach {

Fiber Fiber::of(NormSpec spec) {
    const std::size_t n = spec.dimension();
    return Fiber{n, std::move(spec)};
}

Fiber Fiber::embedded(const NormSpec& ambient, const Eigen::MatrixXd& embedding) {
    if (static_cast<std::size_t>(embedding.rows()) != ambient.dimension()) {
        throw StructuralError(fmt::format("fiber embedding has {} rows, ambient dimension is {}", embedding.rows(),
                                          ambient.dimension()));
    }
    if (embedding.cols() == 0) return zero();
    return of(ambient.pullback(embedding));
}

double Fiber::norm_of(std::span<const double> v) const {
    if (v.size() != dimension) {
        throw StructuralError(fmt::format("fiber vector has length {}, fiber dimension is {}", v.size(), dimension));
    }
    return dimension == 0 ? 0.0 : norm->norm(v);
}

double Fiber::dual_norm_of(std::span<const double> w) const {
    if (w.size() != dimension) {
        throw StructuralError(fmt::format("fiber covector has length {}, fiber dimension is {}", w.size(), dimension));
    }
    return dimension == 0 ? 0.0 : norm->dual_norm(w);
}

bool Fiber::operator==(const Fiber& other) const {
    if (dimension != other.dimension) return false;
    if (dimension == 0) return true;
    return *norm == *other.norm;
}

Bundle::Bundle(SpaceRef space, std::vector<Fiber> fibers) : space_(std::move(space)), fibers_(std::move(fibers)) {
    offsets_.reserve(fibers_.size() + 1);
    offsets_.push_back(0);
    for (const auto& f : fibers_) offsets_.push_back(offsets_.back() + f.dimension);
}

BundleRef Bundle::create(SpaceRef space, std::vector<Fiber> fibers) {
    if (!space) throw StructuralError("bundle: missing measure space");
    if (fibers.size() != space->size()) {
        throw StructuralError(
            fmt::format("bundle: {} fibers for {} atoms; one fiber per atom is required", fibers.size(), space->size()));
    }
    for (std::size_t i = 0; i < fibers.size(); ++i) {
        const auto& f = fibers[i];
        if (f.dimension == 0 && f.norm) {
            throw StructuralError(fmt::format("bundle: zero fiber at atom {} carries a norm", i));
        }
        if (f.dimension > 0 && (!f.norm || f.norm->dimension() != f.dimension)) {
            throw StructuralError(fmt::format("bundle: fiber at atom {} needs a norm of dimension {}", i, f.dimension));
        }
    }
    return BundleRef(new Bundle(std::move(space), std::move(fibers)));
}

BundleRef Bundle::constant(SpaceRef space, const NormSpec& spec) {
    std::vector<Fiber> fibers(space ? space->size() : 0, Fiber::of(spec));
    return create(std::move(space), std::move(fibers));
}

bool Bundle::degenerate() const noexcept {
    return std::all_of(fibers_.begin(), fibers_.end(), [](const Fiber& f) { return f.dimension == 0; });
}

bool Bundle::is_constant() const noexcept {
    return std::all_of(fibers_.begin(), fibers_.end(), [&](const Fiber& f) { return f == fibers_.front(); });
}

BundleRef Bundle::dual() const {
    std::vector<Fiber> duals;
    duals.reserve(fibers_.size());
    for (const auto& f : fibers_) duals.push_back(f.dimension == 0 ? Fiber::zero() : Fiber::of(f.norm->dual()));
    return create(space_, std::move(duals));
}

bool Bundle::operator==(const Bundle& other) const {
    return same_space(space_, other.space_) && fibers_ == other.fibers_;
}

bool same_bundle(const BundleRef& a, const BundleRef& b) {
    if (a == b) return true;
    return a && b && *a == *b;
}

namespace detail {

FiberField::FiberField(BundleRef bundle, std::span<const double> flat)
    : bundle_(std::move(bundle)), data_(flat.begin(), flat.end()) {
    if (!bundle_) throw StructuralError("section: missing bundle");
    if (data_.size() != bundle_->total_dimension()) {
        throw StructuralError(fmt::format("section: {} coordinates for a bundle of total dimension {}", data_.size(),
                                          bundle_->total_dimension()));
    }
}

FiberField::FiberField(BundleRef bundle, const std::vector<std::vector<double>>& per_atom) : bundle_(std::move(bundle)) {
    if (!bundle_) throw StructuralError("section: missing bundle");
    if (per_atom.size() != bundle_->atoms()) {
        throw StructuralError(
            fmt::format("section: {} fiber entries for {} atoms", per_atom.size(), bundle_->atoms()));
    }
    data_.reserve(bundle_->total_dimension());
    for (std::size_t i = 0; i < per_atom.size(); ++i) {
        if (per_atom[i].size() != bundle_->dimension(i)) {
            throw StructuralError(fmt::format("section: entry at atom {} has length {}, fiber dimension is {}", i,
                                              per_atom[i].size(), bundle_->dimension(i)));
        }
        data_.insert(data_.end(), per_atom[i].begin(), per_atom[i].end());
    }
}

std::span<const double> FiberField::at(std::size_t atom) const {
    return std::span<const double>(data_).subspan(bundle_->offset(atom), bundle_->dimension(atom));
}

std::span<double> FiberField::at(std::size_t atom) {
    return std::span<double>(data_).subspan(bundle_->offset(atom), bundle_->dimension(atom));
}

std::vector<std::vector<double>> FiberField::per_atom() const {
    std::vector<std::vector<double>> out;
    out.reserve(bundle_->atoms());
    for (std::size_t i = 0; i < bundle_->atoms(); ++i) {
        auto s = at(i);
        out.emplace_back(s.begin(), s.end());
    }
    return out;
}

}  // namespace detail

Section Section::zero(const BundleRef& bundle) {
    return Section(bundle, std::vector<double>(bundle->total_dimension(), 0.0));
}

DualSection DualSection::zero(const BundleRef& bundle) {
    return DualSection(bundle, std::vector<double>(bundle->total_dimension(), 0.0));
}

namespace {

template <class F>
F combine(const F& a, double alpha, const F& b, double beta) {
    if (!same_bundle(a.bundle(), b.bundle())) throw StructuralError("sections live on different bundles");
    std::vector<double> out(a.flat().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * a.flat()[i] + beta * b.flat()[i];
    return F(a.bundle(), std::move(out));
}

template <class F>
F scaled(double s, const F& a) {
    std::vector<double> out(a.flat().begin(), a.flat().end());
    for (double& x : out) x *= s;
    return F(a.bundle(), std::move(out));
}

template <class F>
F act(const ModuleFunction& f, const F& v) {
    if (!same_space(f.space(), v.bundle()->space())) {
        throw StructuralError("module action: function and section live on different spaces");
    }
    F out = v;
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (double& x : out.at(i)) x *= f[i];
    }
    return out;
}

}  // namespace

Section operator+(const Section& a, const Section& b) { return combine(a, 1.0, b, 1.0); }
Section operator-(const Section& a, const Section& b) { return combine(a, 1.0, b, -1.0); }
Section operator*(double s, const Section& a) { return scaled(s, a); }
DualSection operator+(const DualSection& a, const DualSection& b) { return combine(a, 1.0, b, 1.0); }
DualSection operator-(const DualSection& a, const DualSection& b) { return combine(a, 1.0, b, -1.0); }
DualSection operator*(double s, const DualSection& a) { return scaled(s, a); }

ScalarField pointwise_norm(const Section& v) {
    const auto& bundle = *v.bundle();
    std::vector<double> out(bundle.atoms());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bundle.fiber(i).norm_of(v.at(i));
    return ScalarField(bundle.space(), std::move(out));
}

double gamma_p_norm(const Section& v, double p) { return lp_norm(pointwise_norm(v), p); }

Section module_action(const ModuleFunction& f, const Section& v) { return act(f, v); }
DualSection module_action(const ModuleFunction& f, const DualSection& w) { return act(f, w); }

ModuleFunction indicator(const SpaceRef& space, std::span<const std::size_t> atoms) {
    std::vector<double> values(space->size(), 0.0);
    for (std::size_t a : atoms) {
        if (a >= values.size()) throw StructuralError(fmt::format("indicator: atom index {} out of range", a));
        values[a] = 1.0;
    }
    return ScalarField(space, std::move(values));
}

std::vector<double> bochner_integral(const Section& v, std::span<const std::size_t> atoms) {
    const auto& bundle = *v.bundle();
    if (atoms.empty()) {
        return std::vector<double>(bundle.atoms() > 0 ? bundle.dimension(0) : 0, 0.0);
    }
    const std::size_t n = bundle.dimension(atoms.front());
    std::vector<double> out(n, 0.0);
    for (std::size_t a : atoms) {
        if (a >= bundle.atoms()) throw StructuralError(fmt::format("bochner integral: atom index {} out of range", a));
        if (bundle.dimension(a) != n) {
            throw DomainError("bochner integral: fiber dimension varies over the set; the bundle is not constant there");
        }
        const double w = bundle.space()->weight(a);
        auto x = v.at(a);
        for (std::size_t j = 0; j < n; ++j) out[j] += w * x[j];
    }
    return out;
}

std::vector<ModulusEstimate> fiber_moduli(const Bundle& bundle, double eps, const OptimizerBudget& budget) {
    if (!(eps > 0.0 && eps <= 2.0)) throw DomainError(fmt::format("epsilon must lie in (0, 2], got {}", eps));
    std::vector<ModulusEstimate> out(bundle.atoms());
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        const auto& f = bundle.fiber(i);
        if (f.dimension == 0) continue;
        // Repeated fibers reuse the first estimate, which keeps constant bundles cheap.
        std::size_t first = i;
        for (std::size_t j = 0; j < i; ++j) {
            if (bundle.fiber(j) == f) {
                first = j;
                break;
            }
        }
        out[i] = first < i ? out[first] : modulus_of_convexity(*f.norm, eps, budget);
    }
    return out;
}

ScalarField pointwise_modulus(const Bundle& bundle, double eps, const OptimizerBudget& budget) {
    const auto est = fiber_moduli(bundle, eps, budget);
    std::vector<double> values(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) values[i] = est[i].delta;
    return ScalarField(bundle.space(), std::move(values));
}

BundleClassification classify_bundle(const Bundle& bundle, const OptimizerBudget& budget,
                                     std::span<const double> epsilons) {
    BundleClassification out;
    out.epsilons = epsilons.empty() ? default_epsilon_grid() : std::vector<double>(epsilons.begin(), epsilons.end());
    out.degenerate = bundle.degenerate();
    out.fiber_defects.assign(bundle.atoms(), 0.0);
    out.ess_inf_modulus.assign(out.epsilons.size(), 1.0);

    std::vector<std::size_t> representative(bundle.atoms());
    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        representative[i] = i;
        for (std::size_t j = 0; j < i; ++j) {
            if (bundle.fiber(j) == bundle.fiber(i)) {
                representative[i] = j;
                break;
            }
        }
    }

    for (std::size_t i = 0; i < bundle.atoms(); ++i) {
        const auto& f = bundle.fiber(i);
        if (f.dimension == 0) continue;
        if (representative[i] < i) {
            out.fiber_defects[i] = out.fiber_defects[representative[i]];
            continue;
        }
        out.fiber_defects[i] = parallelogram_defect(*f.norm, budget).defect;
        const auto curve = modulus_curve(*f.norm, out.epsilons, budget);
        for (std::size_t k = 0; k < curve.deltas.size(); ++k) {
            out.ess_inf_modulus[k] = std::min(out.ess_inf_modulus[k], curve.deltas[k]);
        }
    }

    out.is_hilbert = std::all_of(out.fiber_defects.begin(), out.fiber_defects.end(),
                                 [](double d) { return d <= kHilbertDefectTolerance; });
    out.is_uniformly_convex = std::all_of(out.ess_inf_modulus.begin(), out.ess_inf_modulus.end(),
                                          [](double d) { return d > kUniformConvexityThreshold; });
    return out;
}

}  // namespace banach
