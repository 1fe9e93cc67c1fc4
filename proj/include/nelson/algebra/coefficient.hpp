#pragma once

#include "nelson/algebra/rational.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nelson::algebra {

/// Symbols a coefficient may depend on.
///
/// `dims` is the spacetime dimension D, `intercept` the normal-ordering
/// constant a. `spectator` is an internal bookkeeping weight used while
/// summing over transverse directions that are not named explicitly; it
/// never survives into a finished light-cone commutator.
enum class Symbol : std::uint8_t { dims = 0, intercept = 1, spectator = 2 };

inline constexpr std::size_t symbol_count = 3;

/// Exact Gaussian rational re + i*im.
struct GaussianRational {
    Rational re;
    Rational im;

    bool is_zero() const noexcept { return re.is_zero() && im.is_zero(); }
    GaussianRational operator-() const { return {-re, -im}; }
    GaussianRational& operator+=(const GaussianRational& rhs) {
        re += rhs.re;
        im += rhs.im;
        return *this;
    }
    friend GaussianRational operator*(const GaussianRational& l, const GaussianRational& r) {
        return {l.re * r.re - l.im * r.im, l.re * r.im + l.im * r.re};
    }
    friend bool operator==(const GaussianRational&, const GaussianRational&) = default;
};

/// Exact polynomial in the symbols D, a (and the spectator weight) whose
/// coefficients live in Q(i, sqrt 2, sqrt 3, ...).
///
/// Radicals appear because unit-normalized ladder operators relate to the
/// string oscillators by alpha_n = sqrt(n) a_n. Each term stores a
/// square-free radicand; products of radicals are reduced back to
/// square-free form, so equality is decided term by term.
class Coefficient {
public:
    struct Key {
        std::array<std::uint8_t, symbol_count> powers{};
        std::uint32_t radicand = 1;

        friend auto operator<=>(const Key&, const Key&) = default;
    };
    using Term = std::pair<Key, GaussianRational>;

    Coefficient() = default;
    Coefficient(Rational value); // NOLINT: implicit by intent
    Coefficient(std::int64_t value) : Coefficient(Rational(value)) {} // NOLINT
    Coefficient(GaussianRational value);                              // NOLINT

    static Coefficient symbol(Symbol s);
    static Coefficient imaginary_unit();
    /// Exact square root of a positive integer.
    static Coefficient sqrt(std::uint32_t n);

    bool is_zero() const noexcept { return terms_.empty(); }
    const std::vector<Term>& terms() const noexcept { return terms_; }

    /// The value as a plain rational, if the coefficient is one.
    std::optional<Rational> as_rational() const;
    bool depends_on(Symbol s) const noexcept;
    std::uint8_t degree(Symbol s) const noexcept;
    /// Part of the polynomial multiplying s^power, with s removed.
    Coefficient coefficient_of(Symbol s, std::uint8_t power) const;

    Coefficient substitute(Symbol s, const Coefficient& value) const;
    /// Numeric value for given D and a. Throws if the spectator weight remains.
    std::complex<double> evaluate(double dims, double intercept) const;

    /// Complex conjugate; the symbols and radicals are real.
    Coefficient conjugate() const;

    Coefficient operator-() const;
    Coefficient& operator+=(const Coefficient& rhs);
    Coefficient& operator-=(const Coefficient& rhs);
    Coefficient& operator*=(const Coefficient& rhs);
    friend Coefficient operator+(Coefficient l, const Coefficient& r) { return l += r; }
    friend Coefficient operator-(Coefficient l, const Coefficient& r) { return l -= r; }
    friend Coefficient operator*(const Coefficient& l, const Coefficient& r);
    friend bool operator==(const Coefficient&, const Coefficient&) = default;

    std::string to_string() const;

private:
    void normalize();

    std::vector<Term> terms_; // sorted by key, no zero values
};

} // namespace nelson::algebra
