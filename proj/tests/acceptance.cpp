// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "banach/cli.hpp"
#include "banach/criterion.hpp"
#include "banach/errors.hpp"
#include "banach/norm_engine.hpp"
#include "banach/suites.hpp"

using namespace banach;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

double euclid_delta(double eps) { return 1.0 - std::sqrt(1.0 - eps * eps / 4.0); }

double l1(const std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) s += std::fabs(c);
    return s;
}

double linf(const std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) s = std::max(s, std::fabs(c));
    return s;
}

// Fibers whose norm comes from an inner product, decided from the norm data.
bool hilbert_fiber(const Fiber& f) {
    if (f.dimension <= 1 || !f.norm) return true;
    if (f.norm->tag() == NormKindTag::InnerProduct) return true;
    if (const auto* lp = std::get_if<WeightedLp>(&f.norm->kind())) return lp->exponent == 2.0;
    return false;
}

bool hilbert_bundle(const Bundle& b) {
    for (const auto& f : b.fibers()) {
        if (!hilbert_fiber(f)) return false;
    }
    return true;
}

Outcome criterion_1() {
    double worst = 0.0, slowest = 0.0;
    for (std::size_t n : {2, 3}) {
        const auto t0 = Clock::now();
        const auto curve = modulus_curve(NormSpec::euclidean(n), default_epsilon_grid(), OptimizerBudget{});
        slowest = std::max(slowest, seconds_since(t0));
        for (std::size_t e = 0; e < curve.epsilons.size(); ++e) {
            worst = std::max(worst, std::fabs(curve.deltas[e] - euclid_delta(curve.epsilons[e])));
        }
    }
    return {worst <= 1e-3 && slowest < 10.0,
            fmt::format("max |delta - closed form| = {:.3g} (tol 1e-3), slowest spec {:.2f} s (limit 10 s)", worst,
                        slowest)};
}

Outcome criterion_2() {
    double worst = 0.0;
    std::size_t witnesses = 0, points = 0;
    const std::pair<NormSpec, std::function<double(const std::vector<double>&)>> specs[] = {
        {NormSpec::lp(1.0, 2), l1}, {NormSpec::lp(std::numeric_limits<double>::infinity(), 2), linf}};
    for (const auto& [spec, norm] : specs) {
        const auto curve = modulus_curve(spec, default_epsilon_grid(), OptimizerBudget{});
        for (std::size_t e = 0; e < curve.epsilons.size(); ++e) {
            ++points;
            worst = std::max(worst, curve.deltas[e]);
            const auto& w = curve.witnesses[e];
            if (w.v.size() != 2 || w.w.size() != 2) continue;
            std::vector<double> diff{w.v[0] - w.w[0], w.v[1] - w.w[1]};
            std::vector<double> mid{(w.v[0] + w.w[0]) / 2, (w.v[1] + w.w[1]) / 2};
            const bool replayed = std::fabs(norm(w.v) - 1.0) <= 1e-9 && std::fabs(norm(w.w) - 1.0) <= 1e-9 &&
                                  norm(diff) >= curve.epsilons[e] - 1e-9 && 1.0 - norm(mid) <= 1e-9;
            if (replayed) ++witnesses;
        }
    }
    return {worst <= 1e-9 && witnesses == points,
            fmt::format("max delta = {:.3g} (tol 1e-9), {}/{} witness pairs replay", worst, witnesses, points)};
}

Outcome criterion_3() {
    InstanceRecipe r;
    r.seed = 301;
    r.instances = 240;
    const auto input = SuiteInput::from_recipe(r);
    const auto rep = suite_hilbert_equivalence(input, SuiteBudget{});
    std::size_t hilbert = 0, witnessed = 0, misclassified = 0;
    double max_residual = 0.0, min_witness = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < input.instances.size(); ++i) {
        const bool truth = hilbert_bundle(*input.instances[i]);
        std::size_t integrated = 0, localized = 0;
        for (const auto& row : rep.rows) {
            if (row.instance != i) continue;
            if (row.check == "integrated-parallelogram") {
                ++integrated;
                max_residual = std::max(max_residual, row.value);
                if (row.value > 1e-9) ++misclassified;
            } else if (row.check == "localized-witness") {
                ++localized;
                min_witness = std::min(min_witness, row.value);
                if (!(row.value > 0.0) || row.witness.empty()) ++misclassified;
            }
        }
        if (truth ? (integrated != 1 || localized != 0) : (integrated != 0 || localized != 1)) ++misclassified;
        hilbert += truth;
        witnessed += !truth;
    }
    return {input.instances.size() >= 200 && misclassified == 0 && rep.discrepancies() == 0,
            fmt::format("{} bundles ({} Hilbert, {} not): max integrated residual {:.3g} (tol 1e-9), min witness "
                        "defect {:.3g} (> 0), misclassified {}",
                        input.instances.size(), hilbert, witnessed, max_residual, min_witness, misclassified)};
}

Outcome criterion_4() {
    InstanceRecipe r;
    r.seed = 401;
    r.instances = 100;
    r.exponents = {1.5, 2.0, 3.0};
    const auto rep = suite_uc_upper_bound(SuiteInput::from_recipe(r), default_epsilon_grid(), SuiteBudget{});
    std::size_t checks = 0, violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& row : rep.rows) {
        if (row.check != "section-modulus-vs-fiber-modulus") continue;
        ++checks;
        worst = std::max(worst, row.value - row.reference);
        if (row.value > row.reference + 2e-3) ++violations;
    }
    return {rep.evaluated >= 100 && violations == 0 && rep.discrepancies() == 0,
            fmt::format("{} instances evaluated, {} (instance, p, eps) checks, max excess {:.3g} (tol 2e-3), "
                        "violations {}",
                        rep.evaluated, checks, worst, violations)};
}

Outcome criterion_5_6(bool isometry) {
    InstanceRecipe r;
    r.seed = 501;
    r.instances = 120;
    r.constant_fraction = 0.3;
    SuiteBudget budget;
    budget.samples = 12;
    const auto input = SuiteInput::from_recipe(r);
    const auto rep = suite_duality(input, budget);
    std::size_t nondegenerate = 0, constant = 0;
    for (const auto& b : input.instances) {
        if (b->degenerate()) continue;
        ++nondegenerate;
        constant += b->is_constant();
    }
    const std::size_t triples = nondegenerate * r.exponents.size() * budget.samples;
    if (isometry) {
        const double iso = rep.max_value("isometry-of-I");
        const double holder = rep.max_value("holder-equality");
        return {triples >= 1000 && iso <= 1e-6 && holder <= 1e-9,
                fmt::format("{} (bundle, omega, p) triples: max isometry residual {:.3g} (tol 1e-6), max Hoelder "
                            "defect {:.3g} (tol 1e-9)",
                            triples, iso, holder)};
    }
    const double diagram = rep.max_value("diagram-residual");
    const double chain = rep.max_value("constant-bundle-chain");
    return {triples >= 1000 && constant > 0 && diagram <= 1e-9 && chain <= 1e-9,
            fmt::format("{} (v, T) pairs, {} constant bundles: max diagram residual {:.3g}, max constant-bundle "
                        "chain residual {:.3g} (tol 1e-9)",
                        triples, constant, diagram, chain)};
}

Outcome criterion_7() {
    InstanceRecipe r;
    r.seed = 701;
    r.instances = 60;
    r.min_atoms = 1;
    r.max_atoms = 6;
    SuiteBudget budget;
    budget.samples = 4;
    const auto input = SuiteInput::from_recipe(r);
    const auto rep = suite_criterion(input, budget);
    const std::size_t cases = input.instances.size() * r.exponents.size() * budget.samples;
    const double trip = rep.max_value("reconstruction-round-trip");

    std::size_t fixture_rows = 0, fixture_witnessed = 0, mismatched_needed = 0, mismatched_witnessed = 0;
    for (std::size_t i = 0; i < input.instances.size(); ++i) {
        std::size_t nonzero = 0;
        for (const auto& f : input.instances[i]->fibers()) nonzero += f.dimension > 0;
        for (const auto& row : rep.rows) {
            if (row.instance != i || nonzero < 2) continue;
            const bool witnessed = !row.holds && row.witness.find("mask=0x") != std::string::npos;
            if (row.check == "2a-sup-over-atoms" || row.check == "2a-mixed-sum") {
                ++fixture_rows;
                fixture_witnessed += witnessed;
            } else if (row.check == "2a-mismatched-exponent") {
                ++mismatched_needed;
                mismatched_witnessed += witnessed;
            }
        }
    }
    return {cases >= 500 && trip <= 1e-9 && fixture_rows > 0 && fixture_witnessed == fixture_rows &&
                mismatched_witnessed == mismatched_needed && rep.discrepancies() == 0,
            fmt::format("{} (bundle, p, v) cases: max round-trip error {:.3g} (tol 1e-9); sup/mixed fixtures failing "
                        "2a with subset witness {}/{}; mismatched exponent witnessed {}/{}",
                        cases, trip, fixture_witnessed, fixture_rows, mismatched_witnessed, mismatched_needed)};
}

Outcome criterion_8() {
    SuiteBudget budget;
    budget.rn_triples = 10'000;
    const auto rep = suite_rn_inequality(801, budget);
    const double violations = rep.max_value("density-level-violations");
    const double failures = rep.max_value("set-level-hypothesis-failures");
    return {violations == 0.0 && failures == 0.0 && rep.verdict == Verdict::Pass,
            fmt::format("10000 triples (<= {} atoms, every subset enumerated): {} density-level violations, {} "
                        "hypothesis failures",
                        budget.rn_max_atoms, violations, failures)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_9() {
    auto config = cli::parse_config(Json::parse(R"({
        "command": "suite", "seed": 909, "suites": "all", "grid": "0.25:2:0.25",
        "recipe": {"instances": 6},
        "budget": {"samples": 8, "rn_triples": 500}
    })"));
    const auto root = fs::temp_directory_path() / "banachlab-acceptance";
    fs::remove_all(root);
    const auto a = cli::cmd_suite(config, root / "a");
    const auto b = cli::cmd_suite(config, root / "b");
    std::size_t compared = 0, identical = 0;
    for (const auto& file : a.files) {
        if (file.filename() == "summary.md") continue;
        ++compared;
        identical += slurp(file) == slurp(root / "b" / fs::relative(file, root / "a"));
    }
    const auto csv = slurp(root / "a" / "checks.csv");
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    return {compared > 0 && identical == compared && a.files.size() == b.files.size() && rows > 1,
            fmt::format("{} of {} table/plot files byte-identical across two runs ({} CSV lines)", identical,
                        compared, rows)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"modulus oracle (Euclidean R^2, R^3)", criterion_1},
        {"flat-norm detection (l1, l-inf in R^2)", criterion_2},
        {"Hilbert bundle iff Hilbert module", criterion_3},
        {"section modulus below fiber modulus", criterion_4},
        {"dual of the section space is isometric", [] { return criterion_5_6(true); }},
        {"reflexivity diagram commutes", [] { return criterion_5_6(false); }},
        {"pointwise-norm criterion round trip", criterion_7},
        {"Radon-Nikodym inequality", criterion_8},
        {"deterministic suite tables", criterion_9},
    };
    const auto start = Clock::now();
    int failed = 0;
    for (std::size_t k = 0; k < std::size(criteria); ++k) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !o.pass;
        fmt::print("criterion {}: {} {}: {} [{:.1f} s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail,
                   seconds_since(t0));
        std::fflush(stdout);
    }
    fmt::print("acceptance: {} of {} criteria passed in {:.1f} s\n", std::size(criteria) - failed, std::size(criteria),
               seconds_since(start));
    return failed == 0 ? 0 : 1;
}
