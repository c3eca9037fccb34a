#include "banach/norm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "banach/errors.hpp"

namespace banach {
namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();
// Seeds closer than this to feasibility are repaired rather than dropped.
constexpr double kSeedRepairGap = 1e-9;
// Near eps = 2 no repair can lengthen the chord; seeds this close are kept.
constexpr double kSeedRoundingSlack = 8.0 * std::numeric_limits<double>::epsilon();
constexpr std::size_t kMaxStructured = 24;
constexpr int kPullSteps = 30;
constexpr double kMinStep = 1e-9;

using Vec = std::vector<double>;

std::optional<Vec> normalized(const NormFn& norm, Vec x) {
    const double n = norm(x);
    if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
    for (double& c : x) c /= n;
    return x;
}

Vec difference(std::span<const double> a, std::span<const double> b) {
    Vec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

Vec negated(std::span<const double> a) {
    Vec d(a.begin(), a.end());
    for (double& c : d) c = -c;
    return d;
}

struct PairState {
    Vec v;
    Vec w;
    double value = kInfeasible;
    double distance = 0.0;
};

// Evaluates a candidate pair of unit vectors for the modulus problem.
void score_modulus(const NormFn& norm, double eps, PairState& s) {
    s.distance = norm(difference(s.v, s.w));
    s.value = s.distance >= eps ? midpoint_gap(norm, s.v, s.w) : kInfeasible;
}

// Moves `moving` toward `fixed` as far as the distance constraint allows.
bool pull_toward(const NormFn& norm, double eps, PairState& s, bool move_w) {
    const Vec& fixed = move_w ? s.v : s.w;
    const Vec& moving = move_w ? s.w : s.v;
    auto at = [&](double t) -> std::optional<Vec> {
        Vec x(moving.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = moving[i] + t * (fixed[i] - moving[i]);
        return normalized(norm, std::move(x));
    };
    double lo = 0.0;
    double hi = 1.0;
    std::optional<Vec> best;
    for (int k = 0; k < kPullSteps; ++k) {
        const double mid = 0.5 * (lo + hi);
        auto cand = at(mid);
        if (cand && norm(difference(fixed, *cand)) >= eps) {
            lo = mid;
            best = std::move(cand);
        } else {
            hi = mid;
        }
    }
    if (!best) return false;
    PairState trial = s;
    (move_w ? trial.w : trial.v) = std::move(*best);
    score_modulus(norm, eps, trial);
    if (trial.value < s.value - 1e-15) {
        s = std::move(trial);
        return true;
    }
    return false;
}

// Coordinate pattern search shared by both estimators; `score` fills value.
template <class Score, class Extra>
PairState pattern_search(const NormFn& norm, std::size_t n, PairState s, std::size_t iterations, Score score,
                         Extra extra_moves) {
    double step = 0.5;
    for (std::size_t it = 0; it < iterations; ++it) {
        bool improved = false;
        // Moves 0..2n-1 perturb one vector; 2n..4n-1 perturb both together,
        // which lets the pair slide along the constraint boundary.
        for (std::size_t j = 0; j < 4 * n; ++j) {
            for (double sign : {1.0, -1.0}) {
                PairState trial = s;
                const std::size_t c = j % n;
                const std::size_t mode = j / n;
                if (mode != 1) trial.v[c] += sign * step;
                if (mode == 1) trial.w[c] += sign * step;
                if (mode == 2) trial.w[c] += sign * step;
                if (mode == 3) trial.w[c] -= sign * step;
                auto uv = normalized(norm, std::move(trial.v));
                auto uw = normalized(norm, std::move(trial.w));
                if (!uv || !uw) continue;
                trial.v = std::move(*uv);
                trial.w = std::move(*uw);
                score(trial);
                if (trial.value < s.value - 1e-15) {
                    s = std::move(trial);
                    improved = true;
                    break;
                }
            }
        }
        if (extra_moves(s)) improved = true;
        if (!improved) {
            step *= 0.5;
            if (step < kMinStep) break;
        }
    }
    return s;
}

// Drops near-duplicates and caps the list.
std::vector<Vec> distinct_capped(std::vector<Vec> dirs) {
    std::vector<Vec> out;
    for (auto& d : dirs) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Vec& o) {
            double diff = 0.0;
            for (std::size_t i = 0; i < o.size(); ++i) diff = std::max(diff, std::fabs(o[i] - d[i]));
            return diff < 1e-12;
        });
        if (!seen) out.push_back(std::move(d));
        if (out.size() == kMaxStructured) break;
    }
    return out;
}

std::vector<Vec> with_negatives(const std::vector<Vec>& dirs) {
    std::vector<Vec> out;
    out.reserve(2 * dirs.size());
    for (const auto& d : dirs) {
        out.push_back(d);
        out.push_back(negated(d));
    }
    return out;
}

std::vector<Vec> axis_and_sign_directions(const NormFn& norm, std::size_t n) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1.0;
        if (auto u = normalized(norm, e)) out.push_back(std::move(*u));
    }
    if (n >= 2 && n <= 4) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
            Vec s(n, 1.0);
            for (std::size_t i = 1; i < n; ++i) {
                if (mask >> (i - 1) & 1U) s[i] = -1.0;
            }
            if (auto u = normalized(norm, s)) out.push_back(std::move(*u));
        }
    }
    return out;
}

void check_eps(double eps) {
    if (!(eps > 0.0) || eps > 2.0) throw DomainError(fmt::format("modulus: epsilon must lie in (0, 2], got {}", eps));
}

}  // namespace

std::vector<double> default_epsilon_grid() { return epsilon_grid(0.1, 2.0, 0.1); }

std::vector<double> epsilon_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(start > 0.0) || stop > 2.0 + 1e-12 || stop < start) {
        throw DomainError(fmt::format("epsilon grid {}:{}:{} must satisfy 0 < start <= stop <= 2, step > 0", start,
                                      stop, step));
    }
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        // Computed as start + k*step and rounded to 12 digits so 0.1-steps land on decimals.
        double e = start + static_cast<double>(k) * step;
        e = std::round(e * 1e12) / 1e12;
        if (e > stop + 1e-9) break;
        grid.push_back(std::min(e, 2.0));
    }
    return grid;
}

std::vector<std::vector<double>> sphere_sample(const NormFn& norm, std::size_t dimension, std::size_t count,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> out;
    out.reserve(count);
    while (out.size() < count) {
        Vec x(dimension);
        for (double& c : x) c = gauss(rng);
        if (auto u = normalized(norm, std::move(x))) out.push_back(std::move(*u));
    }
    return out;
}

std::vector<std::vector<double>> sphere_sample(const NormSpec& spec, std::size_t count, std::uint64_t seed) {
    return sphere_sample(spec.evaluator(), spec.dimension(), count, seed);
}

std::vector<std::vector<double>> structured_directions(const NormFn& norm, std::size_t dimension) {
    return axis_and_sign_directions(norm, dimension);
}

std::vector<std::vector<double>> structured_directions(const NormSpec& spec) {
    const NormFn norm = spec.evaluator();
    std::vector<Vec> out = axis_and_sign_directions(norm, spec.dimension());
    auto add_rows = [&](const Eigen::MatrixXd& rows, bool as_functionals) {
        for (Eigen::Index i = 0; i < rows.rows() && out.size() < kMaxStructured; ++i) {
            Vec r(static_cast<std::size_t>(rows.cols()));
            for (Eigen::Index j = 0; j < rows.cols(); ++j) r[static_cast<std::size_t>(j)] = rows(i, j);
            if (as_functionals) r = spec.dual_maximizer(r);
            if (auto u = normalized(norm, std::move(r))) out.push_back(std::move(*u));
        }
    };
    if (const auto* k = std::get_if<PolyhedralMax>(&spec.kind())) add_rows(k->functionals, true);
    if (const auto* k = std::get_if<PolytopeGauge>(&spec.kind())) add_rows(k->vertices, false);
    if (out.size() > kMaxStructured) out.resize(kMaxStructured);
    return out;
}

double midpoint_gap(const NormFn& norm, std::span<const double> v, std::span<const double> w) {
    Vec m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m[i] = 0.5 * (v[i] + w[i]);
    return 1.0 - norm(m);
}

double parallelogram_residual(const NormFn& norm, std::span<const double> v, std::span<const double> w) {
    Vec s(v.size());
    Vec d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        s[i] = v[i] + w[i];
        d[i] = v[i] - w[i];
    }
    const double a = norm(s);
    const double b = norm(d);
    const double nv = norm(Vec(v.begin(), v.end()));
    const double nw = norm(Vec(w.begin(), w.end()));
    return a * a + b * b - 2.0 * nv * nv - 2.0 * nw * nw;
}

ModulusEstimate modulus_of_convexity(const NormFn& norm, std::size_t dimension, double eps,
                                     const OptimizerBudget& budget, std::span<const std::vector<double>> anchors,
                                     std::span<const SpherePair> seeds) {
    check_eps(eps);
    if (dimension == 0) return ModulusEstimate{1.0, 0.0, {}};
    if (dimension == 1) {
        // The unit sphere is {u, -u}; only the antipodal pair is feasible.
        auto u = normalized(norm, Vec{1.0});
        if (!u) throw InternalError("modulus: degenerate one-dimensional norm");
        Vec w = negated(*u);
        return ModulusEstimate{1.0, norm(difference(*u, w)), SpherePair{*u, std::move(w)}};
    }

    auto score = [&](PairState& s) { score_modulus(norm, eps, s); };
    auto pulls = [&](PairState& s) {
        bool a = pull_toward(norm, eps, s, true);
        bool b = pull_toward(norm, eps, s, false);
        return a || b;
    };

    std::vector<PairState> starts;
    // Structured pairs are scored exhaustively; the best few start local searches.
    std::vector<Vec> structured;
    for (const auto& a : anchors) structured.push_back(a);
    for (auto& d : axis_and_sign_directions(norm, dimension)) structured.push_back(std::move(d));
    structured = with_negatives(distinct_capped(std::move(structured)));
    std::vector<PairState> scored;
    for (std::size_t i = 0; i < structured.size(); ++i) {
        for (std::size_t j = 0; j < structured.size(); ++j) {
            if (i == j) continue;
            PairState s{structured[i], structured[j]};
            score(s);
            if (std::isfinite(s.value)) scored.push_back(std::move(s));
        }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const PairState& a, const PairState& b) { return a.value < b.value; });
    for (std::size_t k = 0; k < scored.size() && k < 4; ++k) starts.push_back(scored[k]);

    for (const auto& seed : seeds) {
        PairState s{seed.v, seed.w};
        score(s);
        // A rescaled witness can miss the constraint by a rounding error;
        // push w away from v until it holds.
        for (double t = 1e-12; !std::isfinite(s.value) && s.distance >= eps - kSeedRepairGap && t < 1e-6; t *= 4.0) {
            Vec x(seed.w.size());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = seed.w[i] + t * (seed.w[i] - seed.v[i]);
            auto u = normalized(norm, std::move(x));
            if (!u) break;
            s.w = std::move(*u);
            score(s);
        }
        if (!std::isfinite(s.value) && s.distance >= eps * (1.0 - kSeedRoundingSlack)) {
            s.value = midpoint_gap(norm, s.v, s.w);
        }
        if (std::isfinite(s.value)) starts.push_back(std::move(s));
    }

    const auto sample = sphere_sample(norm, dimension, 2 * budget.restarts, budget.seed);
    for (std::size_t r = 0; r < budget.restarts; ++r) {
        PairState s{sample[2 * r], sample[2 * r + 1]};
        score(s);
        if (!std::isfinite(s.value)) {
            s.w = negated(s.v);
            score(s);
        }
        starts.push_back(std::move(s));
    }

    PairState best;
    for (auto& start : starts) {
        PairState local = pattern_search(norm, dimension, std::move(start), budget.iterations, score, pulls);
        if (local.value < best.value) best = std::move(local);
    }
    if (!std::isfinite(best.value)) throw InternalError("modulus: no feasible pair found");
    return ModulusEstimate{std::clamp(best.value, 0.0, 1.0), best.distance, SpherePair{best.v, best.w}};
}

ModulusEstimate modulus_of_convexity(const NormSpec& spec, double eps, const OptimizerBudget& budget) {
    const auto anchors = structured_directions(spec);
    return modulus_of_convexity(spec.evaluator(), spec.dimension(), eps, budget, anchors);
}

std::vector<double> isotonic_clamp(std::span<const double> raw) {
    std::vector<double> out(raw.begin(), raw.end());
    for (std::size_t i = out.size(); i-- > 1;) out[i - 1] = std::min(out[i - 1], out[i]);
    return out;
}

ModulusCurve modulus_curve(const NormFn& norm, std::size_t dimension, std::span<const double> epsilons,
                           const OptimizerBudget& budget, std::span<const std::vector<double>> anchors) {
    ModulusCurve curve;
    curve.budget = budget;
    curve.epsilons.assign(epsilons.begin(), epsilons.end());
    for (std::size_t i = 1; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > epsilons[i - 1])) throw DomainError("modulus curve: epsilon grid must be increasing");
    }
    for (double eps : epsilons) {
        auto est = modulus_of_convexity(norm, dimension, eps, budget, anchors);
        curve.raw_deltas.push_back(est.delta);
        curve.witnesses.push_back(std::move(est.witness));
    }
    curve.deltas = isotonic_clamp(curve.raw_deltas);
    // A witness for a larger epsilon stays feasible for a smaller one.
    for (std::size_t i = curve.deltas.size(); i-- > 1;) {
        if (curve.deltas[i - 1] < curve.raw_deltas[i - 1]) curve.witnesses[i - 1] = curve.witnesses[i];
    }
    return curve;
}

ModulusCurve modulus_curve(const NormSpec& spec, std::span<const double> epsilons, const OptimizerBudget& budget) {
    const auto anchors = structured_directions(spec);
    return modulus_curve(spec.evaluator(), spec.dimension(), epsilons, budget, anchors);
}

DefectEstimate parallelogram_defect(const NormFn& norm, std::size_t dimension, const OptimizerBudget& budget,
                                    std::span<const std::vector<double>> anchors) {
    if (dimension == 0) return {};
    // Minimizing -|residual| keeps a single search routine.
    auto score = [&](PairState& s) { s.value = -std::fabs(parallelogram_residual(norm, s.v, s.w)); };
    auto no_extra = [](PairState&) { return false; };

    std::vector<Vec> structured(anchors.begin(), anchors.end());
    for (auto& d : axis_and_sign_directions(norm, dimension)) structured.push_back(std::move(d));
    structured = with_negatives(distinct_capped(std::move(structured)));

    std::vector<PairState> starts;
    std::vector<PairState> scored;
    for (std::size_t i = 0; i < structured.size(); ++i) {
        for (std::size_t j = i + 1; j < structured.size(); ++j) {
            PairState s{structured[i], structured[j]};
            score(s);
            scored.push_back(std::move(s));
        }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const PairState& a, const PairState& b) { return a.value < b.value; });
    for (std::size_t k = 0; k < scored.size() && k < 4; ++k) starts.push_back(scored[k]);
    const auto sample = sphere_sample(norm, dimension, 2 * budget.restarts, budget.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t r = 0; r < budget.restarts; ++r) {
        PairState s{sample[2 * r], sample[2 * r + 1]};
        score(s);
        starts.push_back(std::move(s));
    }

    PairState best;
    best.value = 1.0;
    for (auto& start : starts) {
        PairState local = pattern_search(norm, dimension, std::move(start), budget.iterations, score, no_extra);
        if (local.value < best.value) best = std::move(local);
    }
    DefectEstimate out;
    out.signed_defect = parallelogram_residual(norm, best.v, best.w);
    out.defect = std::fabs(out.signed_defect);
    out.witness = SpherePair{best.v, best.w};
    return out;
}

DefectEstimate parallelogram_defect(const NormSpec& spec, const OptimizerBudget& budget) {
    return parallelogram_defect(spec.evaluator(), spec.dimension(), budget, structured_directions(spec));
}

}  // namespace banach
