#include "banach/exponent.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "banach/errors.hpp"

namespace banach {

Exponent::Exponent(double value) : value_(value) {
    if (std::isnan(value) || value < 1.0) {
        throw DomainError(fmt::format("exponent must lie in [1, inf], got {}", value));
    }
}

Exponent Exponent::rational(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num < den) throw DomainError(fmt::format("exponent {}/{} outside [1, inf]", num, den));
    const std::int64_t g = std::gcd(num, den);
    Exponent e(static_cast<double>(num) / static_cast<double>(den));
    e.num_ = num / g;
    e.den_ = den / g;
    return e;
}

Exponent Exponent::infinity() { return Exponent(std::numeric_limits<double>::infinity()); }

bool Exponent::is_infinite() const noexcept { return std::isinf(value_); }

Exponent Exponent::parse(std::string_view text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t num = 0;
        std::int64_t den = 0;
        const auto a = text.substr(0, slash);
        const auto b = text.substr(slash + 1);
        auto ra = std::from_chars(a.data(), a.data() + a.size(), num);
        auto rb = std::from_chars(b.data(), b.data() + b.size(), den);
        if (ra.ec != std::errc{} || rb.ec != std::errc{} || ra.ptr != a.data() + a.size() ||
            rb.ptr != b.data() + b.size()) {
            throw DomainError(fmt::format("cannot parse exponent '{}'", text));
        }
        return rational(num, den);
    }
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError(fmt::format("cannot parse exponent '{}'", text));
    }
    if (used != s.size()) throw DomainError(fmt::format("cannot parse exponent '{}'", text));
    return Exponent(v);
}

Exponent Exponent::conjugate() const {
    if (is_infinite()) return Exponent(1.0);
    if (num_) {
        if (*num_ == *den_) return infinity();
        return rational(*num_, *num_ - *den_);
    }
    if (value_ == 1.0) return infinity();
    return Exponent(conjugate_exponent(value_));
}

std::string Exponent::to_string() const {
    if (is_infinite()) return "inf";
    if (num_ && *den_ != 1) return fmt::format("{}/{}", *num_, *den_);
    return fmt::format("{}", value_);
}

double conjugate_exponent(double p) {
    if (!(p > 1.0) || std::isinf(p)) throw DomainError(fmt::format("exponent must lie in (1, inf), got {}", p));
    double q = p / (p - 1.0);
    // One Newton-style correction on 1/p + 1/q = 1.
    const double r = 1.0 / p + 1.0 / q - 1.0;
    q = q + r * q * q;
    return q;
}

}  // namespace banach
