#pragma once

// JSON forms of the core objects. Readers raise ConfigError naming the
// offending key path; writers emit one canonical form per object, which is
// what instance digests hash.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "banach/bundle.hpp"
#include "banach/duality.hpp"
#include "banach/measure.hpp"
#include "banach/norm_spec.hpp"

namespace banach {

using Json = nlohmann::json;

/// A number, or a string accepted by Exponent::parse ("inf", "3/2", ...).
double exponent_from_json(const Json& j, const std::string& field);
Json exponent_to_json(double p);

SpaceRef space_from_json(const Json& j, const std::string& field = "space");
Json to_json(const MeasureSpace& space);

NormSpec norm_from_json(const Json& j, const std::string& field = "norm");
Json to_json(const NormSpec& spec);

/// {"space": ..., "fibers": [{"dimension": n, "norm": ...}, ...]} or
/// {"space": ..., "constant": <norm>}.
BundleRef bundle_from_json(const Json& j, const std::string& field = "bundle");
Json to_json(const Bundle& bundle);

/// One array of fiber coordinates per atom.
Section section_from_json(const BundleRef& bundle, const Json& j, const std::string& field);
DualSection dual_section_from_json(const BundleRef& bundle, const Json& j, const std::string& field);
Json to_json(const detail::FiberField& field);

std::uint64_t fnv1a(std::string_view bytes);

/// 16 hex digits of FNV-1a over the canonical JSON of the bundle.
std::string instance_digest(const Bundle& bundle);

/// Shortest round-trip decimal text of a double; "inf", "-inf", "nan" for
/// non-finite values.
std::string format_number(double x);

/// "[a;b;c]", the vector form used inside CSV cells.
std::string format_vector(std::span<const double> v);

}  // namespace banach
