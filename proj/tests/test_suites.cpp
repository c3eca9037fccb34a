#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "banach/errors.hpp"
#include "banach/serialize.hpp"
#include "banach/suites.hpp"
#include "test_support.hpp"

using namespace banach;

namespace {

double euclid_delta(double eps) { return 1.0 - std::sqrt(1.0 - eps * eps / 4.0); }

const std::vector<double> kCoarse{0.5, 1.0, 1.5, 2.0};

SuiteInput single(BundleRef b, std::vector<double> exponents = {2.0}) {
    return SuiteInput{{std::move(b)}, std::move(exponents), 7};
}

BundleRef euclidean_bundle(std::vector<double> weights, std::size_t n) {
    return Bundle::constant(MeasureSpace::with_weights(std::move(weights)), NormSpec::euclidean(n));
}

std::vector<const CheckRow*> rows_of(const TheoremReport& r, std::string_view check) {
    std::vector<const CheckRow*> out;
    for (const auto& row : r.rows) {
        if (row.check == check) out.push_back(&row);
    }
    return out;
}

std::string fingerprint(const TheoremReport& r) {
    std::string s = std::string(verdict_name(r.verdict));
    for (const auto& row : r.rows) {
        s += row.claim + row.check + row.digest + format_number(row.value) + format_number(row.reference) +
             row.witness + (row.holds ? "1" : "0");
    }
    for (const auto& n : r.notes) s += n;
    return s;
}

// Independent estimate of the Gamma_p modulus: random unit pairs moved onto
// the constraint boundary by bisection, then kept if they lower the gap.
double sampled_section_modulus(const BundleRef& b, double p, double eps, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = b->total_dimension();
    auto norm = [&](const std::vector<double>& x) { return gamma_p_norm(Section(b, x), p); };
    auto unit = [&](std::vector<double> x) {
        const double r = norm(x);
        for (double& c : x) c /= r;
        return x;
    };
    std::mt19937_64 rng(seed);
    double best = 1.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const auto v = unit(testsupport::random_vector(rng, n));
        const auto d = unit(testsupport::random_vector(rng, n));
        std::vector<double> diff(n);
        for (std::size_t k = 0; k < n; ++k) diff[k] = v[k] - d[k];
        if (norm(diff) < eps) continue;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            std::vector<double> w(n);
            for (std::size_t k = 0; k < n; ++k) w[k] = (1 - mid) * v[k] + mid * d[k];
            w = unit(w);
            for (std::size_t k = 0; k < n; ++k) diff[k] = v[k] - w[k];
            (norm(diff) >= eps ? hi : lo) = mid;
        }
        std::vector<double> w(n), mid(n);
        for (std::size_t k = 0; k < n; ++k) w[k] = (1 - hi) * v[k] + hi * d[k];
        w = unit(w);
        for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (v[k] + w[k]);
        best = std::min(best, 1.0 - norm(mid));
    }
    return best;
}

}  // namespace

TEST_CASE("instance generation is a pure function of the recipe") {
    InstanceRecipe r;
    r.seed = 99;
    r.instances = 12;
    const auto a = generate_instances(r);
    const auto b = generate_instances(r);
    REQUIRE(a.size() == 12);
    std::set<std::string> digests;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(*a[i] == *b[i]);
        CHECK(instance_digest(*a[i]) == instance_digest(*b[i]));
        CHECK(*generate_instance(r, i) == *a[i]);
        CHECK(a[i]->atoms() >= r.min_atoms);
        CHECK(a[i]->atoms() <= r.max_atoms);
        digests.insert(instance_digest(*a[i]));
    }
    CHECK(digests.size() == a.size());
    r.seed = 100;
    CHECK_FALSE(*generate_instance(r, 0) == *a[0]);
}

TEST_CASE("recipe validation") {
    InstanceRecipe r;
    r.min_atoms = 3;
    r.max_atoms = 2;
    CHECK_THROWS_AS(validate_recipe(r), ConfigError);
    r = InstanceRecipe{};
    r.kind_weights = {0, 0, 0, 0};
    CHECK_THROWS_AS(validate_recipe(r), ConfigError);
    r = InstanceRecipe{};
    r.exponents = {1.0};
    CHECK_THROWS_AS(validate_recipe(r), ConfigError);
    r = InstanceRecipe{};
    r.weight_min = 0.0;
    CHECK_THROWS_AS(validate_recipe(r), ConfigError);
    SuiteInput in;
    in.exponents = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(validate_input(in), ConfigError);
}

TEST_CASE("recipes honour the kind mixture and zero-dimensional fibers") {
    InstanceRecipe r;
    r.instances = 30;
    r.kind_weights = {0, 0, 1, 0};
    r.min_dimension = 0;
    r.max_dimension = 2;
    bool saw_zero = false;
    for (const auto& b : generate_instances(r)) {
        for (const auto& f : b->fibers()) {
            if (f.dimension == 0) {
                saw_zero = true;
                CHECK_FALSE(f.norm.has_value());
            } else {
                CHECK(f.norm->tag() == NormKindTag::PolyhedralMax);
            }
        }
    }
    CHECK(saw_zero);
}

TEST_CASE("hilbert suite: all-Euclidean recipes pass with tiny residuals") {
    InstanceRecipe r;
    r.instances = 10;
    r.kind_weights = {1, 0, 0, 0};
    const auto rep = suite_hilbert_equivalence(SuiteInput::from_recipe(r), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    CHECK_FALSE(rep.vacuous);
    CHECK(rows_of(rep, "integrated-parallelogram").size() == 10);
    CHECK(rep.max_value("integrated-parallelogram") <= 1e-9);
}

TEST_CASE("hilbert suite: an l1 fiber is detected through the localized witness") {
    // l1 on R^2 has parallelogram defect 4 (e1, e2); localized to an atom of
    // mass w the integrated defect is 4 w.
    const auto space = MeasureSpace::with_weights({0.7, 1.9});
    const auto b = Bundle::create(space, {Fiber::of(NormSpec::euclidean(2)), Fiber::of(NormSpec::lp(1.0, 2))});
    const auto rep = suite_hilbert_equivalence(single(b), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    const auto rows = rows_of(rep, "localized-witness");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]->atom == 1);
    CHECK_FALSE(rows[0]->holds);
    CHECK_FALSE(rows[0]->expected);
    CHECK(rows[0]->value == doctest::Approx(4.0 * 1.9).epsilon(1e-9));
    CHECK(rows[0]->witness.find("v=[") != std::string::npos);
}

TEST_CASE("hilbert suite: zero instances give a flagged vacuous pass") {
    InstanceRecipe r;
    r.instances = 0;
    const auto rep = suite_hilbert_equivalence(SuiteInput::from_recipe(r), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.vacuous);
    CHECK(rep.rows.empty());
}

TEST_CASE("localized witnesses are unit sections at the fiber distance") {
    const auto space = MeasureSpace::with_weights({0.3, 2.5});
    const auto b = Bundle::create(space, {Fiber::of(NormSpec::lp(4.0, 2)), Fiber::of(NormSpec::euclidean(3))});
    const SpherePair pair{{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0}, {0.0, -1.0, 0.0}};
    for (double p : {1.5, 2.0, 3.0}) {
        const auto seeds = localized_witness(*b, 1, p, pair);
        REQUIRE(seeds.size() == 1);
        const Section v(b, seeds[0].v), w(b, seeds[0].w);
        CHECK(gamma_p_norm(v, p) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(gamma_p_norm(w, p) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(gamma_p_norm(v - w, p) == doctest::Approx(NormSpec::euclidean(3).norm(std::vector<double>{
                                                             1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0) + 1.0, 0.0}))
                                            .epsilon(1e-14));
        CHECK(v.at(0)[0] == 0.0);
    }
}

TEST_CASE("uc-upper suite: constant Euclidean plane over two unit atoms is tight") {
    const auto b = euclidean_bundle({1.0, 1.0}, 2);
    const auto rep = suite_uc_upper_bound(single(b), default_epsilon_grid(), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    const auto rows = rows_of(rep, "section-modulus-vs-fiber-modulus");
    REQUIRE(rows.size() == 20);
    for (const auto* r : rows) {
        CHECK(std::fabs(r->value - euclid_delta(r->eps)) <= 2e-3);
        CHECK(std::fabs(r->reference - euclid_delta(r->eps)) <= 2e-3);
    }
}

TEST_CASE("uc-upper suite: an l1 fiber makes both sides flat") {
    const auto space = MeasureSpace::with_weights({1.0, 2.0});
    const auto b = Bundle::create(space, {Fiber::of(NormSpec::euclidean(2)), Fiber::of(NormSpec::lp(1.0, 2))});
    const auto rep = suite_uc_upper_bound(single(b, {1.5, 2.0, 3.0}), kCoarse, SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    for (const auto* r : rows_of(rep, "section-modulus-vs-fiber-modulus")) {
        CHECK(r->reference <= 1e-9);
        CHECK(r->value <= 2e-3);
    }
}

TEST_CASE("uc-upper suite: a single unit atom reproduces the fiber modulus") {
    const auto b = Bundle::constant(MeasureSpace::with_weights({1.0}), NormSpec::lp(3.0, 2));
    const auto rep = suite_uc_upper_bound(single(b, {1.5, 3.0}), kCoarse, SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    for (const auto* r : rows_of(rep, "section-modulus-vs-fiber-modulus")) {
        CHECK(std::fabs(r->value - r->reference) <= 2e-3);
    }
}

TEST_CASE("uc-upper suite: flat witnesses survive localization at eps = 2") {
    const auto b = bundle_from_json(Json::parse(R"({"space": {"weights": [0.3196879356084918, 3.567508497996513, 1.1274781432094012]},
        "fibers": [
          {"dimension": 2, "norm": {"kind": "inner_product", "gram": [[0.8039656810973255, 1.0638628282882487], [1.0638628282882487, 2.0979182189960266]]}},
          {"dimension": 2, "norm": {"kind": "polyhedral_max", "functionals": [[-0.7838147268068852, 2.1848593032012884], [1.9361979870898263, -1.5606674477490072], [0.7661952738415103, -0.0752684095743507]]}},
          {"dimension": 1, "norm": {"kind": "polyhedral_max", "functionals": [[-0.0008998473369055165], [-1.1119959552597836], [0.313355967062073]]}}]})"));
    const auto rep = suite_uc_upper_bound(single(b), std::vector<double>{1.9, 2.0}, SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    for (const auto* r : rows_of(rep, "section-modulus-vs-fiber-modulus")) CHECK(r->value <= 2e-3);
}

TEST_CASE("uc-upper suite: random recipes never exceed the fiber bound") {
    InstanceRecipe r;
    r.instances = 6;
    r.seed = 3;
    const auto rep = suite_uc_upper_bound(SuiteInput::from_recipe(r), kCoarse, SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.discrepancies() == 0);
}

TEST_CASE("uc-lower suite: Euclidean fibers at p = 2, eps = 1") {
    const auto b = euclidean_bundle({0.5, 1.5}, 2);
    const std::vector<double> grid{1.0, 1.5, 2.0};
    const auto rep = suite_uc_qualitative_lower(single(b), grid, SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    // Euclid(eps/5 = 0.2) = 0.005 is below the hypothesis threshold, so the
    // eps = 1 point is skipped; the estimate itself is the closed form.
    const auto est = section_modulus(b, 2.0, 1.0, SuiteBudget{}.module);
    CHECK(est.delta == doctest::Approx(euclid_delta(1.0)).epsilon(2e-3));
    CHECK(est.delta > kOptimizerFloor);
    const auto rows = rows_of(rep, "section-modulus-positive");
    REQUIRE_FALSE(rows.empty());
    for (const auto* r : rows) CHECK(r->eps >= 1.5);
    bool phi_note = false;
    for (const auto& n : rep.notes) phi_note = phi_note || n.find("not checkable") != std::string::npos;
    CHECK(phi_note);
}

TEST_CASE("uc-lower suite: l4 fibers stay strictly convex at eps = 1") {
    const auto b = Bundle::constant(MeasureSpace::with_weights({1.0, 0.6}), NormSpec::lp(4.0, 2));
    const auto fiber = modulus_of_convexity(NormSpec::lp(4.0, 2), 1.0, SuiteBudget{}.fiber);
    std::vector<SpherePair> seeds;
    for (std::size_t atom = 0; atom < 2; ++atom) {
        for (auto& s : localized_witness(*b, atom, 2.0, fiber.witness)) seeds.push_back(std::move(s));
    }
    const auto est = section_modulus(b, 2.0, 1.0, SuiteBudget{}.module, seeds);
    const double oracle = sampled_section_modulus(b, 2.0, 1.0, 40000, 5);
    CHECK(est.delta > kOptimizerFloor);
    CHECK(est.delta <= oracle + 1e-12);
    CHECK(est.delta == doctest::Approx(fiber.delta).epsilon(2e-3));
}

TEST_CASE("uc-lower suite: non-uniformly-convex fibers are excluded by the precondition") {
    const auto space = MeasureSpace::with_weights({1.0, 1.0});
    const auto b = Bundle::create(space, {Fiber::of(NormSpec::euclidean(2)), Fiber::of(NormSpec::lp(1.0, 2))});
    const auto rep = suite_uc_qualitative_lower(single(b), kCoarse, SuiteBudget{});
    CHECK(rep.vacuous);
    CHECK(rep.verdict == Verdict::Pass);
    REQUIRE(rep.notes.size() >= 1);
    CHECK(rep.notes.front().find("excluded") != std::string::npos);
}

TEST_CASE("uc-lower suite: the fixed floor is stricter than positivity for one-dimensional fibers") {
    // With one-dimensional fibers the hypothesis holds at every eps, while
    // Gamma_3 is a weighted l^3 whose modulus at 0.1 is 1 - (1 - 0.05^3)^(1/3),
    // positive but below the 1e-4 floor.
    const auto b = Bundle::constant(MeasureSpace::with_weights({1.0, 2.0, 0.5}), NormSpec::euclidean(1));
    const auto rep = suite_uc_qualitative_lower(single(b, {3.0}), std::vector<double>{0.1, 0.5}, SuiteBudget{});
    const double exact = 1.0 - std::cbrt(1.0 - std::pow(0.05, 3));
    const auto rows = rows_of(rep, "section-modulus-positive");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]->value == doctest::Approx(exact).epsilon(1e-3));
    CHECK(rows[0]->value > 0.0);
    CHECK_FALSE(rows[0]->holds);
    CHECK(rows[1]->holds);
    CHECK(rep.verdict == Verdict::Fail);
}

TEST_CASE("pointwise probe matches closed forms") {
    const auto b = euclidean_bundle({1.3}, 2);
    for (double eps : {0.3, 1.0, 1.7}) {
        const auto probe = pointwise_modulus_probe(b, 0, eps, 12, 4);
        CHECK(std::fabs(probe.delta - euclid_delta(eps)) <= 1e-3);
        CHECK(pointwise_norm(probe.v).values()[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pointwise_norm(probe.w).values()[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pointwise_norm(probe.v - probe.w).values()[0] >= eps - 1e-9);
    }
    const auto flat = Bundle::constant(MeasureSpace::with_weights({1.0, 1.0}), NormSpec::lp(testsupport::kInf, 2));
    CHECK(pointwise_modulus_probe(flat, 1, 1.0, 12, 4).delta <= 1e-9);
}

TEST_CASE("pointwise suite: examples") {
    const std::vector<double> grid{0.5, 1.0, 2.0};
    SUBCASE("single Euclidean atom") {
        const auto rep = suite_pointwise_equality(single(euclidean_bundle({1.0}, 2)), grid, SuiteBudget{});
        CHECK(rep.verdict == Verdict::Pass);
        CHECK(rep.max_value("fiber-vs-module-pointwise") <= 2e-3);
    }
    SUBCASE("l1 fiber") {
        const auto b = Bundle::constant(MeasureSpace::with_weights({2.0}), NormSpec::lp(1.0, 2));
        const auto rep = suite_pointwise_equality(single(b), grid, SuiteBudget{});
        CHECK(rep.verdict == Verdict::Pass);
        CHECK(rep.max_value("fiber-vs-module-pointwise") <= 1e-9);
    }
    SUBCASE("zero fiber") {
        const auto space = MeasureSpace::with_weights({1.0, 1.0});
        const auto b = Bundle::create(space, {Fiber::zero(), Fiber::of(NormSpec::euclidean(2))});
        const auto rep = suite_pointwise_equality(single(b), grid, SuiteBudget{});
        CHECK(rep.verdict == Verdict::Pass);
        CHECK(rows_of(rep, "convention").size() == 1);
        CHECK(rep.notes.front().find("convention") != std::string::npos);
    }
    SUBCASE("random recipe") {
        InstanceRecipe r;
        r.instances = 5;
        r.seed = 11;
        const auto rep = suite_pointwise_equality(SuiteInput::from_recipe(r), kCoarse, SuiteBudget{});
        CHECK(rep.verdict == Verdict::Pass);
    }
}

TEST_CASE("duality suite: residuals on random instances") {
    InstanceRecipe r;
    r.instances = 8;
    SuiteBudget budget;
    budget.samples = 100;
    const auto rep = suite_duality(SuiteInput::from_recipe(r), budget);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.max_value("isometry-of-I") <= 1e-6);
    CHECK(rep.max_value("isometry-of-theta") <= 1e-6);
    CHECK(rep.max_value("holder-equality") <= 1e-9);
    CHECK(rep.max_value("diagram-residual") <= 1e-9);
}

TEST_CASE("duality suite: constant line bundle and the degenerate bundle") {
    const auto line = Bundle::constant(MeasureSpace::with_weights({0.5, 2.0, 1.0}), NormSpec::euclidean(1));
    const auto rep = suite_duality(single(line, {1.5, 4.0}), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rows_of(rep, "constant-bundle-chain").size() == 2);
    CHECK(rep.max_value("constant-bundle-chain") <= 1e-12);

    const auto zero = Bundle::create(MeasureSpace::with_weights({1.0, 3.0}), {Fiber::zero(), Fiber::zero()});
    const auto z = suite_duality(single(zero), SuiteBudget{});
    CHECK(z.verdict == Verdict::Pass);
    CHECK(z.vacuous);
}

TEST_CASE("criterion suite: fixtures fail 2a with witness subsets") {
    InstanceRecipe r;
    r.instances = 6;
    r.min_atoms = 2;
    const auto rep = suite_criterion(SuiteInput::from_recipe(r), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.max_value("2a-induced") <= 1e-9);
    CHECK(rep.max_value("reconstruction-round-trip") <= 1e-9);
    std::size_t witnessed = 0;
    for (const auto* row : rows_of(rep, "2a-sup-over-atoms")) {
        if (!row->holds) {
            CHECK(row->witness.find("mask=0x") != std::string::npos);
            ++witnessed;
        }
    }
    CHECK(witnessed > 0);
}

TEST_CASE("criterion suite: mixed max collapses to the induced norm on heavy atoms") {
    const auto b = Bundle::constant(MeasureSpace::with_weights({1.5, 2.0}), NormSpec::euclidean(2));
    const auto rep = suite_criterion(single(b), SuiteBudget{});
    CHECK(rep.verdict == Verdict::Pass);
    for (const auto* row : rows_of(rep, "2a-mixed-max")) CHECK(row->holds);
    for (const auto* row : rows_of(rep, "2a-mixed-sum")) CHECK_FALSE(row->holds);
}

TEST_CASE("rn suite: no violations") {
    SuiteBudget budget;
    budget.rn_triples = 2000;
    const auto rep = suite_rn_inequality(5, budget);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.max_value("density-level-violations") == 0.0);
    CHECK(rep.max_value("set-level-hypothesis-failures") == 0.0);
}

TEST_CASE("reports are deterministic and independent of the thread count") {
    InstanceRecipe r;
    r.instances = 4;
    r.seed = 21;
    const auto input = SuiteInput::from_recipe(r);
    SuiteBudget one;
    one.threads = 1;
    SuiteBudget three;
    three.threads = 3;
    for (auto name : {"hilbert", "duality", "criterion", "uc-upper"}) {
        const auto a = run_suite(name, input, kCoarse, one);
        const auto b = run_suite(name, input, kCoarse, three);
        const auto c = run_suite(name, input, kCoarse, one);
        CHECK(fingerprint(a) == fingerprint(b));
        CHECK(fingerprint(a) == fingerprint(c));
    }
}

TEST_CASE("report assembly refuses inconsistent reports") {
    TheoremReport rep;
    rep.suite = "synthetic";
    CheckRow ok;
    ok.value = 0.5;
    ok.reference = 1.0;
    rep.rows.push_back(ok);
    finalize_report(rep);
    CHECK(rep.verdict == Verdict::Pass);

    CheckRow bad;
    bad.value = 2.0;
    bad.reference = 1.0;
    rep.rows.push_back(bad);
    CHECK_THROWS_AS(finalize_report(rep), InternalError);

    rep.rows.back().witness = "v=[1]";
    finalize_report(rep);
    CHECK(rep.verdict == Verdict::Fail);
    CHECK(rep.discrepancies() == 1);

    rep.rows.back().expected = false;
    finalize_report(rep);
    CHECK(rep.verdict == Verdict::Pass);

    rep.rows.back().relation = "~";
    CHECK_THROWS_AS(finalize_report(rep), InternalError);
}

TEST_CASE("unknown suite names are configuration errors") {
    try {
        run_suite("nope", SuiteInput{}, kCoarse, SuiteBudget{});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (auto name : kSuiteNames) CHECK(msg.find(std::string(name)) != std::string::npos);
    }
}

TEST_CASE("the suites together touch every claim tag") {
    InstanceRecipe r;
    r.instances = 6;
    r.seed = 2;
    r.kind_weights = {1, 1, 0, 0};
    r.fiber_exponents = {2.0, 3.0};
    r.constant_fraction = 0.5;
    r.max_dimension = 2;
    SuiteBudget budget;
    budget.rn_triples = 200;
    budget.samples = 5;
    std::set<std::string> touched;
    for (auto name : kSuiteNames) {
        const auto rep = run_suite(name, SuiteInput::from_recipe(r), kCoarse, budget);
        for (const auto& row : rep.rows) touched.insert(row.claim);
        for (const auto& c : rep.claims) CHECK(std::find(kClaimTags.begin(), kClaimTags.end(), c) != kClaimTags.end());
    }
    for (auto tag : kClaimTags) {
        INFO(tag);
        CHECK(touched.count(std::string(tag)) == 1);
    }
}
