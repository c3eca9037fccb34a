#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace banach {

/// An integrability exponent in [1, inf]. Keeps an exact rational form when
/// the exponent was given as one, so the conjugate can be formed exactly.
class Exponent {
public:
    Exponent() = default;
    explicit Exponent(double value);
    static Exponent rational(std::int64_t num, std::int64_t den);
    static Exponent infinity();

    /// Accepts "inf", "infinity", "a/b" and plain decimals.
    static Exponent parse(std::string_view text);

    double value() const noexcept { return value_; }
    bool is_infinite() const noexcept;
    bool is_rational() const noexcept { return num_.has_value(); }

    /// q with 1/p + 1/q = 1; p = 1 maps to inf and back.
    Exponent conjugate() const;

    std::string to_string() const;

private:
    double value_ = 2.0;
    std::optional<std::int64_t> num_;
    std::optional<std::int64_t> den_;
};

/// Conjugate of a plain double exponent in (1, inf).
double conjugate_exponent(double p);

}  // namespace banach
