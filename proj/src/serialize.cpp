#include "banach/serialize.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "banach/errors.hpp"
#include "banach/exponent.hpp"

namespace banach {
namespace {

const Json& require(const Json& j, const char* key, const std::string& field) {
    if (!j.is_object()) throw ConfigError(field, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(field + "." + key, "missing");
    return *it;
}

double number(const Json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

std::size_t count(const Json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw ConfigError(field, "expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], fmt::format("{}[{}]", field, i)));
    return out;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(numbers(j[i], fmt::format("{}[{}]", field, i)));
    const std::size_t cols = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ConfigError(fmt::format("{}[{}]", field, i), "ragged matrix row");
        for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class Fn>
auto rethrow_as_config(const std::string& field, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

std::vector<std::vector<double>> per_atom_values(const BundleRef& bundle, const Json& j, const std::string& field) {
    if (!j.is_array() || j.size() != bundle->atoms()) {
        throw ConfigError(field, fmt::format("expected {} per-atom arrays", bundle->atoms()));
    }
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto f = fmt::format("{}[{}]", field, i);
        auto v = numbers(j[i], f);
        if (v.size() != bundle->dimension(i)) {
            throw ConfigError(f, fmt::format("fiber has dimension {}, got {} coordinates", bundle->dimension(i),
                                             v.size()));
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

double exponent_from_json(const Json& j, const std::string& field) {
    if (j.is_number()) {
        const double p = j.get<double>();
        if (std::isnan(p) || p < 1.0) throw ConfigError(field, fmt::format("exponent must lie in [1, inf], got {}", p));
        return p;
    }
    if (j.is_string()) {
        return rethrow_as_config(field, [&] { return Exponent::parse(j.get<std::string>()).value(); });
    }
    throw ConfigError(field, "expected an exponent (number, \"inf\" or \"a/b\")");
}

Json exponent_to_json(double p) {
    if (std::isinf(p)) return "inf";
    return p;
}

SpaceRef space_from_json(const Json& j, const std::string& field) {
    const auto weights = numbers(require(j, "weights", field), field + ".weights");
    std::vector<std::string> atoms;
    if (auto it = j.find("atoms"); it != j.end()) {
        if (!it->is_array()) throw ConfigError(field + ".atoms", "expected an array of ids");
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_string()) throw ConfigError(fmt::format("{}.atoms[{}]", field, i), "expected a string");
            atoms.push_back((*it)[i].get<std::string>());
        }
    } else {
        for (std::size_t i = 0; i < weights.size(); ++i) atoms.push_back(fmt::format("x{}", i));
    }
    return rethrow_as_config(field, [&] { return MeasureSpace::create(atoms, weights); });
}

Json to_json(const MeasureSpace& space) {
    Json atoms = Json::array();
    for (const auto& a : space.atoms()) atoms.push_back(a);
    Json weights = Json::array();
    for (double w : space.weights()) weights.push_back(w);
    return Json{{"atoms", std::move(atoms)}, {"weights", std::move(weights)}};
}

NormSpec norm_from_json(const Json& j, const std::string& field) {
    const Json& kind = require(j, "kind", field);
    if (!kind.is_string()) throw ConfigError(field + ".kind", "expected a string");
    const auto k = kind.get<std::string>();
    return rethrow_as_config(field, [&]() -> NormSpec {
        if (k == "euclidean") return NormSpec::euclidean(count(require(j, "dimension", field), field + ".dimension"));
        if (k == "inner_product") return NormSpec::inner_product(matrix(require(j, "gram", field), field + ".gram"));
        if (k == "lp") {
            return NormSpec::lp(exponent_from_json(require(j, "exponent", field), field + ".exponent"),
                                count(require(j, "dimension", field), field + ".dimension"));
        }
        if (k == "weighted_lp") {
            return NormSpec::weighted_lp(exponent_from_json(require(j, "exponent", field), field + ".exponent"),
                                         numbers(require(j, "weights", field), field + ".weights"));
        }
        if (k == "polyhedral_max") {
            return NormSpec::polyhedral_max(matrix(require(j, "functionals", field), field + ".functionals"));
        }
        if (k == "polytope_gauge") {
            return NormSpec::polytope_gauge(matrix(require(j, "vertices", field), field + ".vertices"));
        }
        throw ConfigError(field + ".kind",
                          fmt::format("unknown norm kind '{}' (expected euclidean, inner_product, lp, weighted_lp, "
                                      "polyhedral_max or polytope_gauge)",
                                      k));
    });
}

Json to_json(const NormSpec& spec) {
    return std::visit(
        [](const auto& k) -> Json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InnerProduct>) {
                return Json{{"kind", "inner_product"}, {"gram", matrix_json(k.gram)}};
            } else if constexpr (std::is_same_v<K, WeightedLp>) {
                return Json{{"kind", "weighted_lp"}, {"exponent", exponent_to_json(k.exponent)}, {"weights", k.weights}};
            } else if constexpr (std::is_same_v<K, PolyhedralMax>) {
                return Json{{"kind", "polyhedral_max"}, {"functionals", matrix_json(k.functionals)}};
            } else {
                return Json{{"kind", "polytope_gauge"}, {"vertices", matrix_json(k.vertices)}};
            }
        },
        spec.kind());
}

BundleRef bundle_from_json(const Json& j, const std::string& field) {
    auto space = space_from_json(require(j, "space", field), field + ".space");
    if (auto it = j.find("constant"); it != j.end()) {
        const auto spec = norm_from_json(*it, field + ".constant");
        return Bundle::constant(space, spec);
    }
    const Json& fibers = require(j, "fibers", field);
    if (!fibers.is_array()) throw ConfigError(field + ".fibers", "expected an array of fibers");
    std::vector<Fiber> out;
    for (std::size_t i = 0; i < fibers.size(); ++i) {
        const auto f = fmt::format("{}.fibers[{}]", field, i);
        const Json& fj = fibers[i];
        if (!fj.is_object()) throw ConfigError(f, "expected an object");
        auto dim = fj.find("dimension");
        if (dim == fj.end()) throw ConfigError(f + ".dimension", "fiber dimension required");
        const std::size_t n = count(*dim, f + ".dimension");
        auto norm = fj.find("norm");
        if (n == 0) {
            if (norm != fj.end()) throw ConfigError(f + ".norm", "a zero-dimensional fiber carries no norm");
            out.push_back(Fiber::zero());
            continue;
        }
        if (norm == fj.end()) throw ConfigError(f + ".norm", "missing");
        auto spec = norm_from_json(*norm, f + ".norm");
        if (spec.dimension() != n) {
            throw ConfigError(f + ".norm", fmt::format("norm acts on R^{} but the fiber dimension is {}",
                                                       spec.dimension(), n));
        }
        out.push_back(Fiber::of(std::move(spec)));
    }
    return rethrow_as_config(field, [&] { return Bundle::create(space, out); });
}

Json to_json(const Bundle& bundle) {
    Json fibers = Json::array();
    for (const auto& f : bundle.fibers()) {
        Json fj{{"dimension", f.dimension}};
        if (f.norm) fj["norm"] = to_json(*f.norm);
        fibers.push_back(std::move(fj));
    }
    return Json{{"space", to_json(*bundle.space())}, {"fibers", std::move(fibers)}};
}

Section section_from_json(const BundleRef& bundle, const Json& j, const std::string& field) {
    return Section(bundle, per_atom_values(bundle, j, field));
}

DualSection dual_section_from_json(const BundleRef& bundle, const Json& j, const std::string& field) {
    return DualSection(bundle, per_atom_values(bundle, j, field));
}

Json to_json(const detail::FiberField& field) {
    Json out = Json::array();
    for (std::size_t i = 0; i < field.bundle()->atoms(); ++i) {
        const auto v = field.at(i);
        out.push_back(std::vector<double>(v.begin(), v.end()));
    }
    return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string instance_digest(const Bundle& bundle) { return fmt::format("{:016x}", fnv1a(to_json(bundle).dump())); }

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{}", x);
}

std::string format_vector(std::span<const double> v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_number(v[i]);
    }
    return out + "]";
}

}  // namespace banach
