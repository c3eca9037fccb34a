#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "banach/cli.hpp"
#include "banach/criterion.hpp"
#include "banach/duality.hpp"
#include "banach/errors.hpp"
#include "banach/exponent.hpp"
#include "banach/norm_engine.hpp"

namespace banach::cli {
namespace {

namespace fs = std::filesystem;

std::string cell(double x) { return std::isnan(x) ? std::string() : format_number(x); }

void write_file(const fs::path& path, const std::string& body, RunResult& result) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out", fmt::format("cannot write '{}'", path.string()));
    out << body;
    if (!out) throw ConfigError("out", fmt::format("write to '{}' failed", path.string()));
    result.files.push_back(path);
}

std::string timestamp() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                    std::chrono::system_clock::now())));
}

std::string summary_header(const RunConfig& config, std::string_view title) {
    return fmt::format("# banachlab {}\n\nGenerated {}\n\n- command: {}\n- config digest: {}\n- seed: {}\n\n", title,
                       timestamp(), command_name(config.command), config_digest(config), config.seed);
}

std::string plot_data(std::span<const double> x, std::initializer_list<std::span<const double>> columns) {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += format_number(x[i]);
        for (const auto& c : columns) out += " " + format_number(c[i]);
        out += '\n';
    }
    return out;
}

std::string status(const CheckRow& r) {
    if (!r.discrepancy()) return r.holds ? "ok" : "expected-fail";
    return "unexpected";
}

std::string report_table(const std::vector<TheoremReport>& reports) {
    std::string out = "| suite | verdict | instances | evaluated | rows | discrepancies | vacuous |\n"
                      "|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", r.suite, verdict_name(r.verdict), r.instances,
                           r.evaluated, r.rows.size(), r.discrepancies(), r.vacuous ? "yes" : "no");
    }
    return out;
}

std::string claim_table(const std::vector<TheoremReport>& reports) {
    struct Tally {
        std::vector<std::string> suites;
        std::size_t rows = 0, expected_fail = 0, unexpected = 0;
    };
    std::map<std::string, Tally> tally;
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            auto& t = tally[row.claim];
            if (t.suites.empty() || t.suites.back() != r.suite) t.suites.push_back(r.suite);
            ++t.rows;
            if (row.discrepancy()) {
                ++t.unexpected;
            } else if (!row.holds) {
                ++t.expected_fail;
            }
        }
    }
    std::string out = "| claim | suites | rows | expected failures | unexpected |\n|---|---|---|---|---|\n";
    for (auto tag : kClaimTags) {
        const bool covered = std::any_of(reports.begin(), reports.end(), [&](const TheoremReport& r) {
            return std::find(r.claims.begin(), r.claims.end(), tag) != r.claims.end();
        });
        if (!covered) continue;
        const auto it = tally.find(std::string(tag));
        if (it == tally.end()) {
            out += fmt::format("| {} | - | 0 | 0 | 0 |\n", tag);
            continue;
        }
        const auto& t = it->second;
        out += fmt::format("| {} | {} | {} | {} | {} |\n", tag, fmt::join(t.suites, ", "), t.rows, t.expected_fail,
                           t.unexpected);
    }
    return out;
}

std::string discrepancy_list(const std::vector<TheoremReport>& reports, std::size_t limit) {
    std::string out;
    std::size_t shown = 0, total = 0;
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            if (!row.discrepancy()) continue;
            if (shown < limit) {
                out += fmt::format("- {} / {} instance {} ({}) p={} eps={}: value {} vs {} + {} ({}); witness {}\n",
                                   r.suite, row.check, row.instance, row.digest, cell(row.p), cell(row.eps),
                                   format_number(row.value), format_number(row.reference),
                                   format_number(row.tolerance), row.relation, row.witness);
                ++shown;
            }
            ++total;
        }
    }
    if (total == 0) return "none\n";
    if (total > shown) out += fmt::format("- ... {} more in the CSV\n", total - shown);
    return out;
}

std::string notes_section(const std::vector<TheoremReport>& reports) {
    std::string out;
    for (const auto& r : reports) {
        for (const auto& n : r.notes) out += fmt::format("- {}: {}\n", r.suite, n);
    }
    return out.empty() ? "none\n" : out;
}

std::string checks_table(const std::vector<TheoremReport>& reports, std::uint64_t seed) {
    std::string out = checks_csv_header();
    for (const auto& r : reports) {
        for (const auto& row : r.rows) out += checks_csv_row(row, seed);
    }
    return out;
}

void write_check_outputs(const RunConfig& config, const fs::path& out, std::string_view title, std::string_view csv,
                         RunResult& result) {
    write_file(out / csv, checks_table(result.reports, config.seed), result);
    std::string summary = summary_header(config, title);
    summary += "## Verdicts\n\n" + report_table(result.reports);
    summary += "\n## Claims\n\n" + claim_table(result.reports);
    summary += "\n## Unexpected verdicts\n\n" + discrepancy_list(result.reports, 20);
    summary += "\n## Notes\n\n" + notes_section(result.reports);
    write_file(out / "summary.md", summary, result);
    write_file(out / "config.json", to_json(config).dump(2) + "\n", result);
    for (const auto& r : result.reports) {
        if (r.verdict == Verdict::Fail) result.exit_code = kExitUnexpected;
    }
}

SuiteInput suite_input(const RunConfig& config) {
    if (!config.instances.empty()) return SuiteInput{config.instances, config.exponents, config.seed};
    return SuiteInput::from_recipe(config.recipe);
}

std::vector<BundleRef> target_bundles(const RunConfig& config) {
    if (config.bundle) return {config.bundle};
    if (!config.instances.empty()) return config.instances;
    return generate_instances(config.recipe);
}

std::string modulus_header() { return "digest,seed,target,p,eps,delta,raw_delta,distance,witness_v,witness_w\n"; }

std::string modulus_row(std::string_view digest, std::uint64_t seed, std::string_view target, double p, double eps,
                        double delta, double raw, double distance, std::span<const double> v,
                        std::span<const double> w) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{}\n", digest, seed, target, cell(p), format_number(eps),
                       format_number(delta), format_number(raw), cell(distance), format_vector(v), format_vector(w));
}

double witness_distance(const NormSpec& spec, const SpherePair& pair) {
    if (pair.v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> d(pair.v.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = pair.v[i] - pair.w[i];
    return spec.norm(d);
}

void append_curve(std::string& csv, std::string_view digest, std::uint64_t seed, std::string_view target,
                  const NormSpec& spec, const ModulusCurve& curve) {
    for (std::size_t e = 0; e < curve.epsilons.size(); ++e) {
        const auto& wit = curve.witnesses[e];
        csv += modulus_row(digest, seed, target, std::numeric_limits<double>::quiet_NaN(), curve.epsilons[e],
                           curve.deltas[e], curve.raw_deltas[e], witness_distance(spec, wit), wit.v, wit.w);
    }
}

}  // namespace

std::string checks_csv_header() {
    return "suite,claim,instance,digest,seed,check,p,eps,atom,value,reference,tolerance,relation,holds,expected,"
           "status,witness\n";
}

std::string checks_csv_row(const CheckRow& r, std::uint64_t seed) {
    for (const auto* text : {&r.claim, &r.suite, &r.digest, &r.check, &r.relation, &r.witness}) {
        if (text->find_first_of(",\n\r\"") != std::string::npos) {
            throw InternalError(fmt::format("CSV cell '{}' needs quoting", *text));
        }
    }
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.suite, r.claim, r.instance, r.digest,
                       seed, r.check, cell(r.p), cell(r.eps), r.atom < 0 ? std::string() : std::to_string(r.atom),
                       format_number(r.value), format_number(r.reference), format_number(r.tolerance), r.relation,
                       r.holds ? 1 : 0, r.expected ? 1 : 0, status(r), r.witness);
}

RunResult cmd_modulus(const RunConfig& config, const fs::path& out) {
    if (!config.norm && !config.bundle) throw ConfigError("norm", "modulus needs a norm or a bundle");
    RunResult result;
    OptimizerBudget fb = config.budget.fiber;
    fb.seed = config.seed;
    std::string csv = modulus_header();
    std::string summary = summary_header(config, "modulus report");
    summary += "| target | delta(eps) at the grid ends |\n|---|---|\n";
    auto summarize = [&](std::string_view target, std::span<const double> deltas) {
        summary += fmt::format("| {} | {} .. {} |\n", target, format_number(deltas.front()),
                               format_number(deltas.back()));
    };

    if (config.norm) {
        const auto curve = modulus_curve(*config.norm, config.epsilons, fb);
        const auto digest = fmt::format("{:016x}", fnv1a(to_json(*config.norm).dump()));
        append_curve(csv, digest, config.seed, "norm", *config.norm, curve);
        write_file(out / "plots" / "norm.dat", plot_data(curve.epsilons, {curve.deltas}), result);
        summarize("norm", curve.deltas);
    }
    if (config.bundle) {
        const auto& b = config.bundle;
        const auto digest = instance_digest(*b);
        std::vector<std::optional<ModulusCurve>> cache(b->atoms());
        for (std::size_t x = 0; x < b->atoms(); ++x) {
            const auto target = fmt::format("fiber[{}]", x);
            const auto& f = b->fiber(x);
            if (!f.norm) {
                // Zero fiber: the convention value 1 with no witness.
                std::vector<double> ones(config.epsilons.size(), 1.0);
                for (double eps : config.epsilons) {
                    csv += modulus_row(digest, config.seed, target, std::numeric_limits<double>::quiet_NaN(), eps, 1.0,
                                       1.0, std::numeric_limits<double>::quiet_NaN(), {}, {});
                }
                write_file(out / "plots" / fmt::format("fiber_{}.dat", x), plot_data(config.epsilons, {ones}), result);
                summarize(target, ones);
                continue;
            }
            for (std::size_t y = 0; y < x && !cache[x]; ++y) {
                if (cache[y] && b->fiber(y).norm && *b->fiber(y).norm == *f.norm) cache[x] = cache[y];
            }
            if (!cache[x]) cache[x] = modulus_curve(*f.norm, config.epsilons, fb);
            append_curve(csv, digest, config.seed, target, *f.norm, *cache[x]);
            write_file(out / "plots" / fmt::format("fiber_{}.dat", x), plot_data(cache[x]->epsilons, {cache[x]->deltas}),
                       result);
            summarize(target, cache[x]->deltas);
        }
        if (b->degenerate()) {
            summary += "\nThe bundle is degenerate; no section curves were computed.\n";
        } else {
            OptimizerBudget mb = config.budget.module;
            mb.seed = config.seed;
            for (const auto& curve : section_modulus_curves(b, config.exponents, config.epsilons, fb, mb)) {
                for (std::size_t e = 0; e < curve.epsilons.size(); ++e) {
                    const auto& raw = curve.raw[e];
                    csv += modulus_row(digest, config.seed, "gamma_p", curve.p, curve.epsilons[e], curve.deltas[e],
                                       raw.delta, raw.distance, raw.witness.v, raw.witness.w);
                }
                write_file(out / "plots" / fmt::format("gamma_p{}.dat", format_number(curve.p)),
                           plot_data(curve.epsilons, {curve.deltas, curve.fiber_ess_inf}), result);
                summarize(fmt::format("gamma_p (p={})", format_number(curve.p)), curve.deltas);
            }
        }
    }
    write_file(out / "modulus.csv", csv, result);
    write_file(out / "summary.md", summary, result);
    write_file(out / "config.json", to_json(config).dump(2) + "\n", result);
    return result;
}

RunResult cmd_suite(const RunConfig& config, const fs::path& out) {
    RunResult result;
    const auto input = suite_input(config);
    for (const auto& name : resolve_suites(config)) {
        result.reports.push_back(run_suite(name, input, config.epsilons, config.budget));
    }
    for (const auto& r : result.reports) {
        if (r.suite != "uc-upper") continue;
        std::map<std::pair<std::size_t, double>, std::vector<const CheckRow*>> curves;
        for (const auto& row : r.rows) {
            if (row.check == "section-modulus-vs-fiber-modulus") curves[{row.instance, row.p}].push_back(&row);
        }
        for (const auto& [key, rows] : curves) {
            std::vector<double> eps, module, fiber;
            for (const auto* row : rows) {
                eps.push_back(row->eps);
                module.push_back(row->value);
                fiber.push_back(row->reference);
            }
            write_file(out / "plots" / fmt::format("uc-upper_{}_p{}.dat", key.first, format_number(key.second)),
                       plot_data(eps, {module, fiber}), result);
        }
    }
    write_check_outputs(config, out, "suite report", "checks.csv", result);
    return result;
}

RunResult cmd_dual_check(const RunConfig& config, const fs::path& out) {
    if (!config.bundle) throw ConfigError("bundle", "dual-check needs a bundle");
    const auto& bundle = config.bundle;
    RunResult result;
    TheoremReport explicit_pairs;
    explicit_pairs.suite = "dual-check";
    explicit_pairs.seed = config.seed;
    explicit_pairs.instances = 1;
    explicit_pairs.evaluated = config.sections.empty() ? 0 : 1;
    explicit_pairs.vacuous = config.sections.empty();
    explicit_pairs.claims = {std::string(kClaimDual), std::string(kClaimTheta), std::string(kClaimReflexive)};
    const auto digest = instance_digest(*bundle);
    for (double p : config.exponents) {
        const double q = Exponent(p).conjugate().value();
        for (std::size_t k = 0; k < config.sections.size(); ++k) {
            const auto& v = config.sections[k];
            const auto& w = config.dual_sections[k];
            const auto base = [&](std::string_view claim, std::string_view check, double tol) {
                CheckRow r;
                r.claim = std::string(claim);
                r.suite = "dual-check";
                r.instance = k;
                r.digest = digest;
                r.check = std::string(check);
                r.p = p;
                r.tolerance = tol;
                r.witness = fmt::format("pair={};v={};omega={}", k, format_vector(v.flat()), format_vector(w.flat()));
                return r;
            };
            const double closed = gamma_q_norm(w, q);
            CheckRow iso = base(kClaimDual, "isometry-of-I", kClosedFormTolerance);
            iso.value = std::fabs(operator_norm(w, p) - closed);
            explicit_pairs.rows.push_back(iso);

            const auto u = holder_maximizer(w, p);
            CheckRow holder = base(kClaimDual, "holder-equality", kArithmeticTolerance);
            holder.value = std::max(closed > 0.0 ? std::fabs(gamma_p_norm(u, p) - 1.0) : 0.0,
                                    std::fabs(pairing(w, u) - closed));
            explicit_pairs.rows.push_back(holder);

            CheckRow theta = base(kClaimTheta, "isometry-of-theta", kClosedFormTolerance);
            theta.value = std::fabs(theta_norm(v, p) - gamma_p_norm(v, p));
            explicit_pairs.rows.push_back(theta);

            const auto t = functional_of_I(w);
            const auto lhs_functional = adjoint_of_inverse_I(bundle, functional_of_theta(v));
            double lhs = 0.0, rhs = 0.0;
            const auto jv = james_embedding(v);
            for (std::size_t i = 0; i < t.size(); ++i) {
                lhs += lhs_functional[i] * t[i];
                rhs += jv[i] * t[i];
            }
            CheckRow diagram = base(kClaimReflexive, "diagram-residual", kDiagramTolerance);
            diagram.value = std::max(std::fabs(lhs - rhs), std::fabs(lhs - pairing(w, v)));
            explicit_pairs.rows.push_back(diagram);
        }
    }
    finalize_report(explicit_pairs);
    result.reports.push_back(std::move(explicit_pairs));
    if (config.samples > 0) {
        SuiteBudget budget = config.budget;
        budget.samples = config.samples;
        result.reports.push_back(suite_duality(SuiteInput{{bundle}, config.exponents, config.seed}, budget));
    }
    write_check_outputs(config, out, "dual-check report", "residuals.csv", result);
    return result;
}

RunResult cmd_criterion(const RunConfig& config, const fs::path& out) {
    const auto& cc = config.criterion;
    const bool expect_induced = cc.expect_induced.value_or(cc.norm == "induced");
    const auto bundles = target_bundles(config);
    RunResult result;
    TheoremReport report;
    report.suite = "criterion-check";
    report.seed = config.seed;
    report.instances = bundles.size();
    report.evaluated = bundles.size();
    report.vacuous = bundles.empty();
    report.claims = {std::string(kClaimCriterion)};
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const auto& bundle = bundles[i];
        const auto digest = instance_digest(*bundle);
        const std::uint64_t seed = config.seed + i;
        const auto raw_probes = random_sections(bundle, cc.probes, seed);
        for (double p : config.exponents) {
            const double p2 = cc.p2.value_or(p + 1.0);
            const auto norm = cc.norm == "induced"          ? AbstractModuleNorm::induced(bundle, p)
                              : cc.norm == "sup_over_atoms" ? AbstractModuleNorm::sup_over_atoms(bundle)
                              : cc.norm == "mixed_sum"      ? AbstractModuleNorm::mixed_sum(bundle, p, p2)
                                                            : AbstractModuleNorm::mixed_max(bundle, p, p2);
            const auto base = [&](std::string_view check, double tol) {
                CheckRow r;
                r.claim = std::string(kClaimCriterion);
                r.suite = report.suite;
                r.instance = i;
                r.digest = digest;
                r.check = std::string(check);
                r.p = p;
                r.tolerance = tol;
                return r;
            };
            const auto probes = unit_probes(norm, raw_probes);
            const auto validation = validate_module_norm(norm, cc.probes, seed + 1);
            CheckRow axioms = base("norm-axioms", kNormAxiomTolerance);
            axioms.value = std::max(validation.max_homogeneity_residual, validation.max_triangle_excess);
            axioms.witness = fmt::format("norm={};probes={};seed={}", norm.name(), cc.probes, seed + 1);
            report.rows.push_back(axioms);

            const auto a = check_condition_2a(norm, p, probes, seed);
            CheckRow r2a = base("condition-2a", kCondition2aTolerance);
            r2a.value = a.max_residual;
            r2a.expected = expect_induced;
            r2a.witness = fmt::format("norm={};probe={};mask={:#x};v={}", norm.name(), a.worst.probe, a.worst.mask,
                                      format_vector(probes[a.worst.probe].flat()));
            report.rows.push_back(r2a);

            const auto b = check_condition_2b(norm, probes, seed + 2);
            CheckRow r2b = base("condition-2b", kCondition2bTolerance);
            r2b.value = b.max_value;
            r2b.witness = fmt::format("horizon={};seed={}", b.horizon, seed + 2);
            report.rows.push_back(r2b);

            if (a.passed) {
                CheckRow mass = base("reconstruction-integral", kArithmeticTolerance);
                CheckRow trip = base("reconstruction-round-trip", kArithmeticTolerance);
                const auto w = bundle->space()->weights();
                for (std::size_t k = 0; k < probes.size(); ++k) {
                    const auto rec = reconstruct_pointwise_norm(norm, p, probes[k]);
                    const auto truth = pointwise_norm(probes[k]);
                    double worst = 0.0, integral = 0.0;
                    for (std::size_t x = 0; x < truth.size(); ++x) {
                        worst = std::max(worst, std::fabs(rec.values()[x] - truth.values()[x]));
                        integral += w[x] * std::pow(rec.values()[x], p);
                    }
                    const double d_mass = std::fabs(integral - std::pow(norm(probes[k]), p));
                    const auto wit = fmt::format("probe={};v={}", k, format_vector(probes[k].flat()));
                    if (d_mass >= mass.value) {
                        mass.value = d_mass;
                        mass.witness = wit;
                    }
                    if (worst >= trip.value) {
                        trip.value = worst;
                        trip.witness = wit;
                    }
                }
                report.rows.push_back(mass);
                if (cc.norm == "induced") report.rows.push_back(trip);
            }
        }
    }
    finalize_report(report);
    result.reports.push_back(std::move(report));
    write_check_outputs(config, out, "criterion report", "criterion.csv", result);
    return result;
}

RunResult run(const RunConfig& config, const fs::path& out) {
    switch (config.command) {
        case Command::Modulus: return cmd_modulus(config, out);
        case Command::Suite: return cmd_suite(config, out);
        case Command::DualCheck: return cmd_dual_check(config, out);
        case Command::Criterion: return cmd_criterion(config, out);
    }
    throw InternalError("unhandled command");
}

}  // namespace banach::cli
