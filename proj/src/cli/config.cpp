#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "banach/cli.hpp"
#include "banach/errors.hpp"
#include "banach/norm_engine.hpp"

namespace banach::cli {
namespace {

constexpr std::array<std::string_view, 4> kCommandNames{"modulus", "suite", "dual-check", "criterion"};
constexpr std::array<std::string_view, 4> kKindNames{"inner_product", "weighted_lp", "polyhedral_max",
                                                     "polytope_gauge"};
constexpr std::array<std::string_view, 4> kCriterionNorms{"induced", "sup_over_atoms", "mixed_sum", "mixed_max"};

void reject_unknown(const Json& j, const std::string& field, std::initializer_list<std::string_view> known) {
    if (!j.is_object()) throw ConfigError(field, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(field.empty() ? key : field + "." + key, "unknown key");
        }
    }
}

std::string join(const std::string& field, std::string_view key) {
    return field.empty() ? std::string(key) : field + "." + std::string(key);
}

double number(const Json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

std::uint64_t unsigned_integer(const Json& j, const std::string& field) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        throw ConfigError(field, "expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

double module_exponent(const Json& j, const std::string& field) {
    const double p = exponent_from_json(j, field);
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError(field, "exponent must lie in (1,∞)");
    return p;
}

std::vector<double> module_exponents(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array of exponents");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(module_exponent(j[i], fmt::format("{}[{}]", field, i)));
    return out;
}

std::vector<double> grid_from_json(const Json& j, const std::string& field) {
    if (j.is_string()) {
        try {
            return parse_grid(j.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(field, e.what());
        }
    }
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected \"a:b:step\" or a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto f = fmt::format("{}[{}]", field, i);
        const double e = number(j[i], f);
        if (!(e > 0.0 && e <= 2.0)) throw ConfigError(f, "epsilon must lie in (0, 2]");
        out.push_back(e);
    }
    return out;
}

OptimizerBudget optimizer_budget(const Json& j, const std::string& field, OptimizerBudget b) {
    reject_unknown(j, field, {"restarts", "iterations"});
    if (auto it = j.find("restarts"); it != j.end()) b.restarts = unsigned_integer(*it, field + ".restarts");
    if (auto it = j.find("iterations"); it != j.end()) b.iterations = unsigned_integer(*it, field + ".iterations");
    if (b.restarts == 0 || b.iterations == 0) throw ConfigError(field, "restarts and iterations must be positive");
    return b;
}

SuiteBudget suite_budget(const Json& j, const std::string& field) {
    reject_unknown(j, field,
                   {"fiber", "module", "samples", "probe_directions", "rn_triples", "rn_max_atoms", "threads"});
    SuiteBudget b;
    if (auto it = j.find("fiber"); it != j.end()) b.fiber = optimizer_budget(*it, field + ".fiber", b.fiber);
    if (auto it = j.find("module"); it != j.end()) b.module = optimizer_budget(*it, field + ".module", b.module);
    if (auto it = j.find("samples"); it != j.end()) b.samples = unsigned_integer(*it, field + ".samples");
    if (auto it = j.find("probe_directions"); it != j.end()) {
        b.probe_directions = unsigned_integer(*it, field + ".probe_directions");
    }
    if (auto it = j.find("rn_triples"); it != j.end()) b.rn_triples = unsigned_integer(*it, field + ".rn_triples");
    if (auto it = j.find("rn_max_atoms"); it != j.end()) {
        b.rn_max_atoms = unsigned_integer(*it, field + ".rn_max_atoms");
    }
    if (auto it = j.find("threads"); it != j.end()) b.threads = unsigned_integer(*it, field + ".threads");
    return b;
}

std::pair<std::size_t, std::size_t> range(const Json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(field, "expected [min, max]");
    return {unsigned_integer(j[0], field + "[0]"), unsigned_integer(j[1], field + "[1]")};
}

InstanceRecipe recipe_from_json(const Json& j, const std::string& field) {
    reject_unknown(j, field,
                   {"instances", "atoms", "dimensions", "kinds", "fiber_exponents", "weights", "constant_fraction"});
    InstanceRecipe r;
    if (auto it = j.find("instances"); it != j.end()) r.instances = unsigned_integer(*it, field + ".instances");
    if (auto it = j.find("atoms"); it != j.end()) std::tie(r.min_atoms, r.max_atoms) = range(*it, field + ".atoms");
    if (auto it = j.find("dimensions"); it != j.end()) {
        std::tie(r.min_dimension, r.max_dimension) = range(*it, field + ".dimensions");
    }
    if (auto it = j.find("kinds"); it != j.end()) {
        reject_unknown(*it, field + ".kinds", {kKindNames[0], kKindNames[1], kKindNames[2], kKindNames[3]});
        for (std::size_t k = 0; k < kKindNames.size(); ++k) {
            auto w = it->find(std::string(kKindNames[k]));
            r.kind_weights[k] = w == it->end() ? 0.0 : number(*w, join(field + ".kinds", kKindNames[k]));
        }
    }
    if (auto it = j.find("fiber_exponents"); it != j.end()) {
        if (!it->is_array() || it->empty()) throw ConfigError(field + ".fiber_exponents", "expected a non-empty array");
        r.fiber_exponents.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            r.fiber_exponents.push_back(exponent_from_json((*it)[i], fmt::format("{}.fiber_exponents[{}]", field, i)));
        }
    }
    if (auto it = j.find("weights"); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw ConfigError(field + ".weights", "expected [min, max]");
        r.weight_min = number((*it)[0], field + ".weights[0]");
        r.weight_max = number((*it)[1], field + ".weights[1]");
    }
    if (auto it = j.find("constant_fraction"); it != j.end()) {
        r.constant_fraction = number(*it, field + ".constant_fraction");
    }
    return r;
}

CriterionConfig criterion_from_json(const Json& j, const std::string& field) {
    reject_unknown(j, field, {"norm", "p2", "probes", "expect_induced"});
    CriterionConfig c;
    if (auto it = j.find("norm"); it != j.end()) {
        if (!it->is_string()) throw ConfigError(field + ".norm", "expected a string");
        c.norm = it->get<std::string>();
        if (std::find(kCriterionNorms.begin(), kCriterionNorms.end(), c.norm) == kCriterionNorms.end()) {
            throw ConfigError(field + ".norm", fmt::format("unknown norm '{}' (valid: induced, sup_over_atoms, "
                                                          "mixed_sum, mixed_max)",
                                                          c.norm));
        }
    }
    if (auto it = j.find("p2"); it != j.end()) c.p2 = exponent_from_json(*it, field + ".p2");
    if (auto it = j.find("probes"); it != j.end()) c.probes = unsigned_integer(*it, field + ".probes");
    if (c.probes == 0) throw ConfigError(field + ".probes", "at least one probe is required");
    if (auto it = j.find("expect_induced"); it != j.end()) {
        if (!it->is_boolean()) throw ConfigError(field + ".expect_induced", "expected true or false");
        c.expect_induced = it->get<bool>();
    }
    return c;
}

template <class Field>
std::vector<Field> fields_from_json(const BundleRef& bundle, const Json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto f = fmt::format("{}[{}]", field, i);
        if constexpr (std::is_same_v<Field, Section>) {
            out.push_back(section_from_json(bundle, j[i], f));
        } else {
            out.push_back(dual_section_from_json(bundle, j[i], f));
        }
    }
    return out;
}

}  // namespace

std::string_view command_name(Command c) noexcept { return kCommandNames[static_cast<std::size_t>(c)]; }

Command parse_command(std::string_view name) {
    for (std::size_t i = 0; i < kCommandNames.size(); ++i) {
        if (kCommandNames[i] == name) return static_cast<Command>(i);
    }
    throw ConfigError("command", fmt::format("unknown command '{}' (valid: modulus, suite, dual-check, criterion)",
                                             name));
}

std::vector<double> parse_grid(std::string_view text) {
    double parts[3];
    std::size_t n = 0;
    std::size_t start = 0;
    while (n < 3) {
        const std::size_t colon = text.find(':', start);
        const auto piece = text.substr(start, colon == std::string_view::npos ? text.size() - start : colon - start);
        const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[n]);
        if (ec != std::errc{} || ptr != piece.data() + piece.size() || piece.empty()) break;
        ++n;
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (n != 3 || std::count(text.begin(), text.end(), ':') != 2) {
        throw ConfigError("grid", fmt::format("expected \"start:stop:step\", got \"{}\"", text));
    }
    try {
        return epsilon_grid(parts[0], parts[1], parts[2]);
    } catch (const DomainError& e) {
        throw ConfigError("grid", e.what());
    }
}

RunConfig parse_config(const Json& j) {
    reject_unknown(j, "",
                   {"command", "seed", "exponents", "grid", "budget", "recipe", "instances", "suites", "norm",
                    "bundle", "sections", "dual_sections", "samples", "criterion", "out"});
    RunConfig c;
    c.epsilons = default_epsilon_grid();
    if (auto it = j.find("command"); it != j.end()) {
        if (!it->is_string()) throw ConfigError("command", "expected a string");
        c.command = parse_command(it->get<std::string>());
    }
    if (auto it = j.find("seed"); it != j.end()) c.seed = unsigned_integer(*it, "seed");
    if (auto it = j.find("exponents"); it != j.end()) c.exponents = module_exponents(*it, "exponents");
    if (auto it = j.find("grid"); it != j.end()) c.epsilons = grid_from_json(*it, "grid");
    if (auto it = j.find("budget"); it != j.end()) c.budget = suite_budget(*it, "budget");
    if (auto it = j.find("recipe"); it != j.end()) c.recipe = recipe_from_json(*it, "recipe");
    if (auto it = j.find("instances"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("instances", "expected an array of bundles");
        for (std::size_t i = 0; i < it->size(); ++i) {
            c.instances.push_back(bundle_from_json((*it)[i], fmt::format("instances[{}]", i)));
        }
    }
    if (auto it = j.find("suites"); it != j.end()) {
        const auto names = it->is_string() ? Json::array({*it}) : *it;
        if (!names.is_array() || names.empty()) throw ConfigError("suites", "expected a suite name or an array");
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!names[i].is_string()) throw ConfigError(fmt::format("suites[{}]", i), "expected a string");
            const auto name = names[i].get<std::string>();
            if (name != "all" && std::find(kSuiteNames.begin(), kSuiteNames.end(), name) == kSuiteNames.end()) {
                throw ConfigError(fmt::format("suites[{}]", i),
                                  fmt::format("unknown suite '{}' (valid: {}, all)", name,
                                              fmt::join(kSuiteNames, ", ")));
            }
            c.suites.push_back(name);
        }
    }
    if (auto it = j.find("norm"); it != j.end()) c.norm = norm_from_json(*it, "norm");
    if (auto it = j.find("bundle"); it != j.end()) c.bundle = bundle_from_json(*it, "bundle");
    const bool has_sections = j.contains("sections") || j.contains("dual_sections");
    if (has_sections) {
        if (!c.bundle) throw ConfigError("sections", "explicit sections need a bundle");
        if (auto it = j.find("sections"); it != j.end()) c.sections = fields_from_json<Section>(c.bundle, *it, "sections");
        if (auto it = j.find("dual_sections"); it != j.end()) {
            c.dual_sections = fields_from_json<DualSection>(c.bundle, *it, "dual_sections");
        }
        if (c.sections.size() != c.dual_sections.size()) {
            throw ConfigError("dual_sections", fmt::format("expected {} dual sections to pair with the sections, got {}",
                                                           c.sections.size(), c.dual_sections.size()));
        }
    }
    if (auto it = j.find("samples"); it != j.end()) c.samples = unsigned_integer(*it, "samples");
    if (auto it = j.find("criterion"); it != j.end()) c.criterion = criterion_from_json(*it, "criterion");
    if (auto it = j.find("out"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>().empty()) throw ConfigError("out", "expected a directory path");
        c.out = it->get<std::string>();
    }
    c.recipe.seed = c.seed;
    c.recipe.exponents = c.exponents;
    validate_recipe(c.recipe);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", fmt::format("cannot open '{}'", path.string()));
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string(), e.what());
    }
    return parse_config(j);
}

Json to_json(const RunConfig& c) {
    Json j;
    j["command"] = std::string(command_name(c.command));
    j["seed"] = c.seed;
    Json exps = Json::array();
    for (double p : c.exponents) exps.push_back(exponent_to_json(p));
    j["exponents"] = std::move(exps);
    j["grid"] = c.epsilons;
    const auto opt = [](const OptimizerBudget& b) { return Json{{"restarts", b.restarts}, {"iterations", b.iterations}}; };
    j["budget"] = Json{{"fiber", opt(c.budget.fiber)},
                       {"module", opt(c.budget.module)},
                       {"samples", c.budget.samples},
                       {"probe_directions", c.budget.probe_directions},
                       {"rn_triples", c.budget.rn_triples},
                       {"rn_max_atoms", c.budget.rn_max_atoms},
                       {"threads", c.budget.threads}};
    Json kinds;
    for (std::size_t k = 0; k < kKindNames.size(); ++k) kinds[std::string(kKindNames[k])] = c.recipe.kind_weights[k];
    Json fexps = Json::array();
    for (double r : c.recipe.fiber_exponents) fexps.push_back(exponent_to_json(r));
    j["recipe"] = Json{{"instances", c.recipe.instances},
                       {"atoms", {c.recipe.min_atoms, c.recipe.max_atoms}},
                       {"dimensions", {c.recipe.min_dimension, c.recipe.max_dimension}},
                       {"kinds", std::move(kinds)},
                       {"fiber_exponents", std::move(fexps)},
                       {"weights", {c.recipe.weight_min, c.recipe.weight_max}},
                       {"constant_fraction", c.recipe.constant_fraction}};
    if (!c.instances.empty()) {
        Json inst = Json::array();
        for (const auto& b : c.instances) inst.push_back(to_json(*b));
        j["instances"] = std::move(inst);
    }
    if (!c.suites.empty()) j["suites"] = c.suites;
    if (c.norm) j["norm"] = to_json(*c.norm);
    if (c.bundle) j["bundle"] = to_json(*c.bundle);
    if (!c.sections.empty()) {
        Json s = Json::array(), d = Json::array();
        for (const auto& v : c.sections) s.push_back(to_json(v));
        for (const auto& w : c.dual_sections) d.push_back(to_json(w));
        j["sections"] = std::move(s);
        j["dual_sections"] = std::move(d);
    }
    j["samples"] = c.samples;
    Json crit{{"norm", c.criterion.norm}, {"probes", c.criterion.probes}};
    if (c.criterion.p2) crit["p2"] = exponent_to_json(*c.criterion.p2);
    if (c.criterion.expect_induced) crit["expect_induced"] = *c.criterion.expect_induced;
    j["criterion"] = std::move(crit);
    j["out"] = c.out;
    return j;
}

std::string config_digest(const RunConfig& config) {
    Json j = to_json(config);
    // Neither the destination nor the worker count changes a table.
    j.erase("out");
    j["budget"].erase("threads");
    return fmt::format("{:016x}", fnv1a(j.dump()));
}

std::vector<std::string> resolve_suites(const RunConfig& config) {
    const auto& names = config.suites.empty() ? std::vector<std::string>{"all"} : config.suites;
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (n == "all") {
            for (auto s : kSuiteNames) out.emplace_back(s);
        } else {
            out.push_back(n);
        }
    }
    std::vector<std::string> unique;
    std::set<std::string> seen;
    for (auto& n : out) {
        if (seen.insert(n).second) unique.push_back(std::move(n));
    }
    return unique;
}

}  // namespace banach::cli
