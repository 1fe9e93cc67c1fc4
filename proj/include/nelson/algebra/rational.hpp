#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace nelson::algebra {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Always stored in lowest terms with a positive denominator. Every
/// arithmetic operation is overflow checked and throws NumericalError
/// rather than wrapping.
class Rational {
public:
    constexpr Rational() noexcept = default;
    Rational(std::int64_t value) noexcept : num_(value) {} // NOLINT: implicit by intent
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    bool is_zero() const noexcept { return num_ == 0; }
    bool is_integer() const noexcept { return den_ == 1; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator-() const;
    Rational& operator+=(const Rational& rhs);
    Rational& operator-=(const Rational& rhs);
    Rational& operator*=(const Rational& rhs);
    Rational& operator/=(const Rational& rhs);

    friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
    friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
    friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
    friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs);

    std::string to_string() const;

private:
    static Rational from_wide(__int128 num, __int128 den);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& value);

} // namespace nelson::algebra
