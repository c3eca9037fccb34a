#include <cmath>
#include <random>

#include "doctest.h"

#include "banach/criterion.hpp"
#include "banach/errors.hpp"
#include "test_support.hpp"

using namespace banach;
using testsupport::kInf;

namespace {

using Atoms = std::vector<std::vector<double>>;

BundleRef line_bundle(std::vector<double> weights) {
    return Bundle::constant(MeasureSpace::with_weights(std::move(weights)), NormSpec::lp(2.0, 1));
}

BundleRef random_bundle(std::mt19937_64& rng, std::size_t atoms) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::vector<double> w(atoms);
    for (double& x : w) x = u(rng);
    std::vector<Fiber> fibers;
    for (std::size_t i = 0; i < atoms; ++i) {
        fibers.push_back(Fiber::of(testsupport::random_spec(rng, 1 + i % 3, static_cast<int>(i))));
    }
    return Bundle::create(MeasureSpace::with_weights(w), std::move(fibers));
}

}  // namespace

TEST_CASE("catalogue norms are norms") {
    std::mt19937_64 rng(61);
    const auto b = random_bundle(rng, 5);
    for (const auto& n : {AbstractModuleNorm::induced(b, 2.0), AbstractModuleNorm::induced(b, 1.0),
                          AbstractModuleNorm::sup_over_atoms(b), AbstractModuleNorm::mixed_sum(b, 2.0, 3.0),
                          AbstractModuleNorm::mixed_max(b, 1.5, 4.0)}) {
        const auto v = validate_module_norm(n, 50, 3);
        CHECK(v.passed);
        CHECK(v.probes == 50);
    }
    // Not homogeneous: fails validation.
    const auto bad = AbstractModuleNorm::custom(b, "squared", [](const Section& s) {
        const double x = gamma_p_norm(s, 2.0);
        return x * x;
    });
    CHECK_FALSE(validate_module_norm(bad, 20, 3).passed);
    CHECK_THROWS_AS(AbstractModuleNorm::composed(b, {}, TermCombine::Sum), ConfigError);
}

TEST_CASE("condition 2a examples") {
    std::mt19937_64 rng(67);
    const auto b = random_bundle(rng, 6);
    const auto probes = random_sections(b, 5, 7);
    const auto induced = check_condition_2a(AbstractModuleNorm::induced(b, 2.0), 2.0, probes);
    CHECK(induced.passed);
    CHECK(induced.max_residual <= 1e-12);
    CHECK(induced.enumerated);
    CHECK(induced.subsets_per_probe == 64);

    const auto two = line_bundle({1.0, 1.0});
    const std::vector<Section> units{Section(two, Atoms{{1.0}, {1.0}})};
    const auto sup = check_condition_2a(AbstractModuleNorm::sup_over_atoms(two), 2.0, units);
    CHECK_FALSE(sup.passed);
    CHECK(sup.max_residual == doctest::Approx(1.0).epsilon(1e-15));

    const auto mixed = check_condition_2a(AbstractModuleNorm::mixed_sum(two, 2.0, 3.0), 2.0, units);
    const double whole = std::sqrt(2.0) + std::cbrt(2.0);
    CHECK_FALSE(mixed.passed);
    CHECK(mixed.max_residual == doctest::Approx(8.0 - whole * whole).epsilon(1e-12));
    CHECK(std::popcount(mixed.worst.mask) == 1);

    CHECK_THROWS_AS(check_condition_2a(AbstractModuleNorm::induced(b, 2.0), kInf, probes), DomainError);
    CHECK_THROWS_AS(check_condition_2a(AbstractModuleNorm::induced(b, 2.0), 2.0, {}), DomainError);
}

TEST_CASE("condition 2a samples subsets beyond sixteen atoms") {
    std::vector<double> w(20, 0.5);
    const auto b = line_bundle(w);
    const auto probes = random_sections(b, 2, 1);
    const auto r = check_condition_2a(AbstractModuleNorm::induced(b, 3.0), 3.0, probes, 5);
    CHECK_FALSE(r.enumerated);
    CHECK(r.subsets_per_probe == kSampledSubsets);
    CHECK(r.passed);
    CHECK_FALSE(check_condition_2a(AbstractModuleNorm::mixed_max(b, 3.0, 2.0), 3.0, probes, 5).passed);
}

TEST_CASE("detector soundness: induced norms fail with a mismatched exponent") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const auto b = random_bundle(rng, 2 + static_cast<std::size_t>(trial % 5));
        const auto probes = random_sections(b, 3, static_cast<std::uint64_t>(trial));
        for (double p : {1.5, 2.0, 3.0}) {
            const auto n = AbstractModuleNorm::induced(b, p);
            CHECK(check_condition_2a(n, p, probes).passed);
            for (double other : {1.0, 1.5, 2.0, 3.0}) {
                if (other == p) continue;
                const auto r = check_condition_2a(n, other, probes);
                CHECK_FALSE(r.passed);
                CHECK(r.worst.mask != 0);
                CHECK(r.worst.mask != (1ULL << b->atoms()) - 1);
            }
        }
    }
}

TEST_CASE("mu_v is additive for norms passing 2a") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t atoms = 2 + static_cast<std::size_t>(trial % 6);
        const auto b = random_bundle(rng, atoms);
        const auto v = random_sections(b, 1, static_cast<std::uint64_t>(trial))[0];
        const double p = trial % 2 == 0 ? 2.0 : 1.5;
        const auto n = AbstractModuleNorm::induced(b, p);
        const std::uint64_t all = (1ULL << atoms) - 1;
        for (std::uint64_t e = 0; e <= all; ++e) {
            const std::uint64_t rest = all & ~e;
            // F ranges over subsets of the complement of E.
            for (std::uint64_t f = rest;; f = (f - 1) & rest) {
                CHECK(std::fabs(mu_v(n, p, v, e | f) - mu_v(n, p, v, e) - mu_v(n, p, v, f)) <= 1e-9);
                if (f == 0) break;
            }
        }
    }
}

TEST_CASE("reconstruct_pointwise_norm examples") {
    const auto a = line_bundle({1.0, 1.0});
    const Section v(a, Atoms{{3.0}, {4.0}});
    const auto n2 = AbstractModuleNorm::induced(a, 2.0);
    const auto r = reconstruct_pointwise_norm(n2, 2.0, v);
    CHECK(r[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(n2(v) == doctest::Approx(5.0).epsilon(1e-15));

    const auto b = line_bundle({4.0, 1.0});
    const Section u(b, Atoms{{1.0}, {1.0}});
    const auto n1 = AbstractModuleNorm::induced(b, 1.0);
    const auto r1 = reconstruct_pointwise_norm(n1, 1.0, u);
    CHECK(r1[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n1(u) == doctest::Approx(5.0).epsilon(1e-15));

    const auto c = Bundle::create(MeasureSpace::with_weights({1.0, 1.0}),
                                  {Fiber::of(NormSpec::lp(1.0, 2)), Fiber::of(NormSpec::lp(kInf, 2))});
    const auto r3 = reconstruct_pointwise_norm(AbstractModuleNorm::induced(c, 3.0), 3.0,
                                               Section(c, Atoms{{1.0, -2.0}, {1.0, -2.0}}));
    CHECK(r3[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r3[1] == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(reconstruct_pointwise_norm(AbstractModuleNorm::sup_over_atoms(a), 2.0, v), DomainError);
}

TEST_CASE("reconstruction round trip on random bundles") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 25; ++trial) {
        const auto b = random_bundle(rng, 1 + static_cast<std::size_t>(trial % 7));
        for (double p : {1.5, 2.0, 3.0}) {
            const auto n = AbstractModuleNorm::induced(b, p);
            for (const auto& v : random_sections(b, 2, static_cast<std::uint64_t>(trial))) {
                const auto rec = reconstruct_pointwise_norm(n, p, v);
                const auto pw = pointwise_norm(v);
                double integral = 0.0;
                for (std::size_t i = 0; i < rec.size(); ++i) {
                    CHECK(std::fabs(rec[i] - pw[i]) <= 1e-9);
                    integral += b->space()->weight(i) * std::pow(rec[i], p);
                }
                CHECK(std::fabs(integral - std::pow(n(v), p)) <= 1e-9 * (1.0 + integral));
            }
        }
    }
}

TEST_CASE("condition 2b holds for every catalogue norm") {
    std::mt19937_64 rng(83);
    const auto b = random_bundle(rng, 4);
    const auto probes = random_sections(b, 4, 2);
    for (const auto& n : {AbstractModuleNorm::induced(b, 2.0), AbstractModuleNorm::sup_over_atoms(b),
                          AbstractModuleNorm::mixed_sum(b, 2.0, 3.0), AbstractModuleNorm::mixed_max(b, 1.5, 3.0)}) {
        const auto r = check_condition_2b(n, probes, 11);
        CHECK(r.passed);
        CHECK(r.sequences.size() == 4);
        CHECK(r.max_value <= kCondition2bTolerance);
    }
    // Harmonic indicator: ||f_n v|| = ||v|| / n exactly for an induced norm.
    const auto n2 = AbstractModuleNorm::induced(b, 2.0);
    const auto seqs = null_sequences(b->space(), 11);
    CHECK(n2(module_action(seqs[0].term(1000), probes[0])) == doctest::Approx(n2(probes[0]) / 1000.0).epsilon(1e-12));
}

TEST_CASE("null-sequence generator contract") {
    const auto space = MeasureSpace::with_weights({1.0, 2.0, 3.0});
    for (const auto& s : null_sequences(space, 4)) CHECK(is_atomwise_null(s, kDefaultHorizon, kCondition2bTolerance));
    const NullSequence alternating{
        "alternating-signs",
        [space](std::uint64_t n) { return ScalarField::constant(space, n % 2 == 0 ? 1.0 : -1.0); },
        [](std::uint64_t) { return 1.0; }};
    CHECK_FALSE(is_atomwise_null(alternating, kDefaultHorizon, kCondition2bTolerance));
}

TEST_CASE("Radon-Nikodym inequality examples") {
    AtomicMeasureTriple t{MeasureSpace::with_weights({1.0, 1.0}), {4.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}, 0.5};
    const auto r = check_rn_inequality(t);
    CHECK(r.subsets == 4);
    CHECK(r.set_level_holds);
    CHECK(r.density_level_holds);
    CHECK_FALSE(r.violation);
    CHECK(r.min_set_margin == doctest::Approx(0.0).epsilon(1e-15));
    // E = X: sqrt(2) + 1 - sqrt(5) > 0.
    CHECK(std::sqrt(2.0) + 1.0 - std::sqrt(5.0) > 0.0);

    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 30; ++k) {
        std::vector<double> d(4), zero(4, 0.0), a(4), c(4), sum(4);
        for (double& x : d) x = u(rng);
        AtomicMeasureTriple same{MeasureSpace::with_weights({1.0, 0.5, 2.0, 1.5}), d, d, zero, 0.3 + 0.1 * k};
        const auto rs = check_rn_inequality(same);
        CHECK(rs.set_level_holds);
        CHECK(rs.density_level_holds);
        CHECK(rs.min_set_margin >= 0.0);
        for (std::size_t i = 0; i < 4; ++i) {
            a[i] = u(rng);
            c[i] = u(rng);
            sum[i] = a[i] + c[i];
        }
        AtomicMeasureTriple linear{same.space, sum, a, c, 1.0};
        const auto rl = check_rn_inequality(linear);
        CHECK(rl.density_level_holds);
        CHECK(rl.min_set_margin >= -1e-12);
    }

    AtomicMeasureTriple bad{MeasureSpace::with_weights({1.0}), {3.0}, {1.0}, {1.0}, 1.0};
    const auto rb = check_rn_inequality(bad);
    CHECK_FALSE(rb.set_level_holds);
    CHECK_FALSE(rb.density_level_holds);
    CHECK_FALSE(rb.violation);

    std::vector<double> big(21, 1.0);
    CHECK_THROWS_AS(check_rn_inequality({MeasureSpace::with_weights(big), big, big, big, 1.0}), DomainError);
}

TEST_CASE("the lemma is never violated on sampled triples") {
    const auto triples = sample_rn_triples(10000, 8, 97);
    REQUIRE(triples.size() == 10000);
    std::size_t violations = 0;
    for (const auto& t : triples) {
        const auto r = check_rn_inequality(t);
        CHECK(r.set_level_holds);
        if (r.violation) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("condition 2a is scale free on unit probes") {
    // A one-dimensional gauge with a tiny vertex stretches norms by about 60,
    // so the p-th powers of raw probes reach 1e6.
    const auto space = MeasureSpace::with_weights({0.3, 3.8, 1.8});
    Eigen::MatrixXd vertex(1, 1);
    vertex << -0.0157;
    const auto b = Bundle::create(space, {Fiber::of(NormSpec::euclidean(3)), Fiber::of(NormSpec::euclidean(1)),
                                          Fiber::of(NormSpec::polytope_gauge(vertex))});
    const auto norm = AbstractModuleNorm::induced(b, 3.0);
    auto probes = random_sections(b, 6, 41);
    for (auto& v : probes) v = 40.0 * v;
    const auto units = unit_probes(norm, probes);
    for (const auto& u : units) CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(check_condition_2a(norm, 3.0, units).max_residual <= 1e-12);
    for (const auto& v : probes) {
        const auto rec = reconstruct_pointwise_norm(norm, 3.0, v);
        const auto truth = pointwise_norm(v);
        for (std::size_t x = 0; x < 3; ++x) {
            CHECK(rec.values()[x] == doctest::Approx(truth.values()[x]).epsilon(1e-12));
        }
    }
    const auto zero = Section::zero(b);
    CHECK(unit_probes(norm, {zero}).front().flat()[0] == 0.0);
}
