#include "nelson/algebra/rational.hpp"

#include "nelson/errors.hpp"

#include <limits>
#include <ostream>

namespace nelson::algebra {

namespace {

__int128 gcd_wide(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw NumericalError("rational with zero denominator");
    *this = from_wide(num, den);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
    if (den == 0) throw NumericalError("rational division by zero");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const __int128 g = gcd_wide(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    constexpr auto lo = std::numeric_limits<std::int64_t>::min() + 1;
    constexpr auto hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) throw NumericalError("rational overflow");
    Rational out;
    out.num_ = static_cast<std::int64_t>(num);
    out.den_ = static_cast<std::int64_t>(num == 0 ? 1 : den);
    return out;
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& rhs) {
    if (den_ == rhs.den_) {
        *this = from_wide(static_cast<__int128>(num_) + rhs.num_, den_);
    } else {
        *this = from_wide(static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_,
                          static_cast<__int128>(den_) * rhs.den_);
    }
    return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
    *this = from_wide(static_cast<__int128>(num_) * rhs.num_, static_cast<__int128>(den_) * rhs.den_);
    return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
    if (rhs.num_ == 0) throw NumericalError("rational division by zero");
    *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
    return *this;
}

std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
    const __int128 l = static_cast<__int128>(lhs.num_) * rhs.den_;
    const __int128 r = static_cast<__int128>(rhs.num_) * lhs.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::ostream& operator<<(std::ostream& os, const Rational& value) { return os << value.to_string(); }

} // namespace nelson::algebra
