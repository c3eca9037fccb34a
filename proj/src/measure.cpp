#include "banach/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "banach/errors.hpp"
#include "banach/simd/kernels.hpp"

namespace banach {

MeasureSpace::MeasureSpace(std::vector<std::string> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

SpaceRef MeasureSpace::create(std::vector<std::string> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size()) {
        throw StructuralError(
            fmt::format("measure space: {} atom ids but {} weights", atoms.size(), weights.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& a : atoms) {
        if (!seen.insert(a).second) throw StructuralError(fmt::format("measure space: duplicate atom id '{}'", a));
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw DomainError(fmt::format("measure space: weight of atom '{}' must be positive and finite, got {}",
                                          atoms[i], w));
        }
    }
    return SpaceRef(new MeasureSpace(std::move(atoms), std::move(weights)));
}

SpaceRef MeasureSpace::with_weights(std::vector<double> weights) {
    std::vector<std::string> atoms;
    atoms.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) atoms.push_back(fmt::format("x{}", i));
    return create(std::move(atoms), std::move(weights));
}

std::size_t MeasureSpace::index_of(const std::string& atom) const {
    auto it = std::find(atoms_.begin(), atoms_.end(), atom);
    return static_cast<std::size_t>(it - atoms_.begin());
}

double MeasureSpace::mass(std::uint64_t mask) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights_.size() && i < 64; ++i) {
        if (mask >> i & 1U) s += weights_[i];
    }
    return s;
}

bool MeasureSpace::operator==(const MeasureSpace& other) const {
    return atoms_ == other.atoms_ && weights_ == other.weights_;
}

bool same_space(const SpaceRef& a, const SpaceRef& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

ScalarField::ScalarField(SpaceRef space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw StructuralError("scalar field: missing measure space");
    if (values_.size() != space_->size()) {
        throw StructuralError(
            fmt::format("scalar field: {} values for {} atoms", values_.size(), space_->size()));
    }
}

ScalarField ScalarField::constant(SpaceRef space, double value) {
    const std::size_t n = space ? space->size() : 0;
    return ScalarField(std::move(space), std::vector<double>(n, value));
}

ProbabilityReweighting::ProbabilityReweighting(SpaceRef space, std::vector<double> probabilities)
    : space_(std::move(space)), probs_(std::move(probabilities)) {
    if (!space_) throw StructuralError("reweighting: missing measure space");
    if (probs_.size() != space_->size()) {
        throw StructuralError(
            fmt::format("reweighting: {} probabilities for {} atoms", probs_.size(), space_->size()));
    }
    double total = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw DomainError("reweighting: probabilities must be strictly positive (mutual absolute continuity)");
        }
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw DomainError(fmt::format("reweighting: probabilities sum to {}", total));
}

ProbabilityReweighting ProbabilityReweighting::normalized(const SpaceRef& space) {
    std::vector<double> p(space->weights().begin(), space->weights().end());
    const double total = space->total_mass();
    for (double& x : p) x /= total;
    return ProbabilityReweighting(space, std::move(p));
}

double lp_norm(const ScalarField& f, double p) {
    if (std::isnan(p) || p < 1.0) throw DomainError(fmt::format("lp_norm: exponent must lie in [1, inf], got {}", p));
    const auto w = f.space()->weights();
    const auto x = f.values();
    if (x.empty()) return 0.0;
    if (std::isinf(p)) return simd::abs_max(x);
    if (p == 1.0) return simd::weighted_abs_sum(w, x);
    if (p == 2.0) return std::sqrt(simd::weighted_square_sum(w, x));
    const double scale = simd::abs_max(x);
    if (scale == 0.0) return 0.0;
    std::vector<double> powered(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) powered[i] = std::pow(std::fabs(x[i]) / scale, p);
    return scale * std::pow(simd::weighted_sum(w, powered), 1.0 / p);
}

EssExtrema ess_extrema(const ScalarField& f) {
    if (f.size() == 0) throw DomainError("ess_extrema: undefined on an empty atom set");
    const auto [lo, hi] = simd::min_max(f.values());
    return {lo, hi};
}

namespace {

void require_family(std::span<const ScalarField> fields, const char* what) {
    if (fields.empty()) throw DomainError(fmt::format("{}: empty family", what));
    for (const auto& f : fields) {
        if (!same_space(f.space(), fields.front().space())) {
            throw StructuralError(fmt::format("{}: fields live on different measure spaces", what));
        }
    }
}

}  // namespace

ScalarField lattice_sup(std::span<const ScalarField> fields) {
    require_family(fields, "lattice_sup");
    std::vector<double> out(fields.front().values().begin(), fields.front().values().end());
    for (std::size_t k = 1; k < fields.size(); ++k) simd::elementwise_max(out, fields[k].values(), out);
    return ScalarField(fields.front().space(), std::move(out));
}

ScalarField lattice_inf(std::span<const ScalarField> fields) {
    require_family(fields, "lattice_inf");
    std::vector<double> out(fields.front().values().begin(), fields.front().values().end());
    for (std::size_t k = 1; k < fields.size(); ++k) {
        const auto v = fields[k].values();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], v[i]);
    }
    return ScalarField(fields.front().space(), std::move(out));
}

double l0_distance(const ScalarField& g, const ProbabilityReweighting& reweighting) {
    if (!same_space(g.space(), reweighting.space())) {
        throw StructuralError("l0_distance: field and reweighting live on different spaces");
    }
    for (double v : g.values()) {
        if (v < 0.0 || std::isnan(v)) throw DomainError("l0_distance: pointwise distance must be nonnegative");
    }
    return simd::capped_weighted_sum(reweighting.probabilities(), g.values(), 1.0);
}

double integrate(const ScalarField& f) { return simd::weighted_sum(f.space()->weights(), f.values()); }

}  // namespace banach
