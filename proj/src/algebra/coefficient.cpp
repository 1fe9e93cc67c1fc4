#include "nelson/algebra/coefficient.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nelson::algebra {

namespace {

constexpr std::array<const char*, symbol_count> symbol_names{"D", "a", "w"};

std::uint32_t checked_radicand(std::uint64_t value) {
    if (value > 0xffffffffULL) throw NumericalError("radicand overflow");
    return static_cast<std::uint32_t>(value);
}

std::string number_string(const GaussianRational& v) {
    if (v.im.is_zero()) return v.re.to_string();
    if (v.re.is_zero()) {
        if (v.im == Rational(1)) return "i";
        if (v.im == Rational(-1)) return "-i";
        return v.im.to_string() + "i";
    }
    return "(" + v.re.to_string() + (v.im < Rational(0) ? " - " : " + ") +
           (v.im < Rational(0) ? (-v.im).to_string() : v.im.to_string()) + "i)";
}

} // namespace

Coefficient::Coefficient(Rational value) {
    if (!value.is_zero()) terms_.push_back({Key{}, GaussianRational{value, Rational(0)}});
}

Coefficient::Coefficient(GaussianRational value) {
    if (!value.is_zero()) terms_.push_back({Key{}, value});
}

Coefficient Coefficient::symbol(Symbol s) {
    Coefficient out;
    Key key;
    key.powers[static_cast<std::size_t>(s)] = 1;
    out.terms_.push_back({key, GaussianRational{Rational(1), Rational(0)}});
    return out;
}

Coefficient Coefficient::imaginary_unit() { return Coefficient(GaussianRational{Rational(0), Rational(1)}); }

Coefficient Coefficient::sqrt(std::uint32_t n) {
    if (n == 0) return {};
    std::uint64_t outside = 1;
    std::uint64_t inside = n;
    for (std::uint64_t f = 2; f * f <= inside; ++f) {
        while (inside % (f * f) == 0) {
            inside /= f * f;
            outside *= f;
        }
    }
    Coefficient out;
    Key key;
    key.radicand = checked_radicand(inside);
    out.terms_.push_back({key, GaussianRational{Rational(static_cast<std::int64_t>(outside)), Rational(0)}});
    return out;
}

std::optional<Rational> Coefficient::as_rational() const {
    if (terms_.empty()) return Rational(0);
    if (terms_.size() != 1) return std::nullopt;
    const auto& [key, value] = terms_.front();
    if (key != Key{} || !value.im.is_zero()) return std::nullopt;
    return value.re;
}

bool Coefficient::depends_on(Symbol s) const noexcept { return degree(s) > 0; }

std::uint8_t Coefficient::degree(Symbol s) const noexcept {
    std::uint8_t d = 0;
    for (const auto& [key, value] : terms_) d = std::max(d, key.powers[static_cast<std::size_t>(s)]);
    return d;
}

Coefficient Coefficient::coefficient_of(Symbol s, std::uint8_t power) const {
    Coefficient out;
    const auto idx = static_cast<std::size_t>(s);
    for (const auto& [key, value] : terms_) {
        if (key.powers[idx] != power) continue;
        Key k = key;
        k.powers[idx] = 0;
        out.terms_.push_back({k, value});
    }
    out.normalize();
    return out;
}

Coefficient Coefficient::substitute(Symbol s, const Coefficient& value) const {
    const auto idx = static_cast<std::size_t>(s);
    Coefficient out;
    for (const auto& [key, v] : terms_) {
        Key stripped = key;
        stripped.powers[idx] = 0;
        Coefficient term;
        term.terms_.push_back({stripped, v});
        for (std::uint8_t p = 0; p < key.powers[idx]; ++p) term = term * value;
        out += term;
    }
    return out;
}

std::complex<double> Coefficient::evaluate(double dims, double intercept) const {
    std::complex<double> total{0.0, 0.0};
    for (const auto& [key, v] : terms_) {
        if (key.powers[static_cast<std::size_t>(Symbol::spectator)] != 0)
            throw ValidationError("coefficient still carries the spectator weight");
        double scale = std::sqrt(static_cast<double>(key.radicand));
        scale *= std::pow(dims, key.powers[static_cast<std::size_t>(Symbol::dims)]);
        scale *= std::pow(intercept, key.powers[static_cast<std::size_t>(Symbol::intercept)]);
        total += scale * std::complex<double>(v.re.to_double(), v.im.to_double());
    }
    return total;
}

Coefficient Coefficient::conjugate() const {
    Coefficient out = *this;
    for (auto& term : out.terms_) term.second.im = -term.second.im;
    return out;
}

Coefficient Coefficient::operator-() const {
    Coefficient out = *this;
    for (auto& term : out.terms_) term.second = -term.second;
    return out;
}

Coefficient& Coefficient::operator+=(const Coefficient& rhs) {
    if (rhs.terms_.empty()) return *this;
    std::vector<Term> merged;
    merged.reserve(terms_.size() + rhs.terms_.size());
    auto l = terms_.begin();
    auto r = rhs.terms_.begin();
    while (l != terms_.end() || r != rhs.terms_.end()) {
        if (r == rhs.terms_.end() || (l != terms_.end() && l->first < r->first)) {
            merged.push_back(*l++);
        } else if (l == terms_.end() || r->first < l->first) {
            merged.push_back(*r++);
        } else {
            GaussianRational sum = l->second;
            sum += r->second;
            if (!sum.is_zero()) merged.push_back({l->first, sum});
            ++l;
            ++r;
        }
    }
    terms_ = std::move(merged);
    return *this;
}

Coefficient& Coefficient::operator-=(const Coefficient& rhs) { return *this += -rhs; }

Coefficient& Coefficient::operator*=(const Coefficient& rhs) { return *this = *this * rhs; }

Coefficient operator*(const Coefficient& l, const Coefficient& r) {
    Coefficient out;
    if (l.terms_.empty() || r.terms_.empty()) return out;
    out.terms_.reserve(l.terms_.size() * r.terms_.size());
    for (const auto& [lk, lv] : l.terms_) {
        for (const auto& [rk, rv] : r.terms_) {
            Coefficient::Key key;
            for (std::size_t s = 0; s < symbol_count; ++s) {
                const unsigned p = unsigned(lk.powers[s]) + rk.powers[s];
                if (p > 255) throw NumericalError("symbol power overflow");
                key.powers[s] = static_cast<std::uint8_t>(p);
            }
            GaussianRational value = lv * rv;
            const std::uint64_t g = std::gcd(lk.radicand, rk.radicand);
            key.radicand = checked_radicand((std::uint64_t(lk.radicand) / g) * (rk.radicand / g));
            if (g != 1) value = value * GaussianRational{Rational(static_cast<std::int64_t>(g)), Rational(0)};
            out.terms_.push_back({key, value});
        }
    }
    out.normalize();
    return out;
}

void Coefficient::normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& term : terms_) {
        if (!merged.empty() && merged.back().first == term.first) {
            merged.back().second += term.second;
            if (merged.back().second.is_zero()) merged.pop_back();
        } else if (!term.second.is_zero()) {
            merged.push_back(term);
        }
    }
    terms_ = std::move(merged);
}

std::string Coefficient::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, value] : terms_) {
        std::string factors;
        if (key.radicand != 1) factors += "*sqrt(" + std::to_string(key.radicand) + ")";
        for (std::size_t s = 0; s < symbol_count; ++s) {
            if (key.powers[s] == 0) continue;
            factors += std::string("*") + symbol_names[s];
            if (key.powers[s] > 1) factors += "^" + std::to_string(key.powers[s]);
        }
        GaussianRational shown = value;
        const bool negative_real = value.im.is_zero() && value.re < Rational(0);
        if (!first) {
            os << (negative_real ? " - " : " + ");
            if (negative_real) shown = -value;
        }
        const bool unit = shown.im.is_zero() && shown.re == Rational(1) && !factors.empty();
        const bool minus_unit = shown.im.is_zero() && shown.re == Rational(-1) && !factors.empty();
        if (unit) {
            os << factors.substr(1);
        } else if (minus_unit) {
            os << "-" << factors.substr(1);
        } else {
            os << number_string(shown) << factors;
        }
        first = false;
    }
    return os.str();
}

} // namespace nelson::algebra
