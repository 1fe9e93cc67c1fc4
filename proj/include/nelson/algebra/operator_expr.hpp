#pragma once

#include "nelson/algebra/coefficient.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nelson::algebra {

/// Generator kinds, listed in canonical order: creators first, then the
/// zero-mode position and momentum, then annihilators.
enum class LetterKind : std::uint8_t { create = 0, position = 1, momentum = 2, annihilate = 3 };

/// One generator of the transverse oscillator algebra.
///
/// create/annihilate are unit-normalized ladder operators a^dagger_{n,i},
/// a_{n,i} (n >= 1); position/momentum are the zero-mode pair x0_i, p0_i
/// (mode stored as 0). Non-trivial brackets:
///   [a_{m,i}, a^dagger_{n,j}] = delta_mn delta_ij,  [x0_i, p0_j] = i delta_ij.
struct Letter {
    LetterKind kind = LetterKind::create;
    std::uint16_t mode = 0;
    std::uint16_t direction = 0;

    friend auto operator<=>(const Letter&, const Letter&) = default;

    bool is_oscillator() const noexcept { return kind == LetterKind::create || kind == LetterKind::annihilate; }
};

Letter create(int mode, int direction);
Letter annihilate(int mode, int direction);
Letter position(int direction);
Letter momentum(int direction);

std::string to_string(const Letter& letter);

using Word = std::vector<Letter>;

/// True when the word is in canonical normal order.
bool is_canonical(const Word& word) noexcept;

/// A normal-ordered polynomial in the generators with exact coefficients.
///
/// Terms are keyed by canonical words, so two expressions are equal exactly
/// when their term maps are equal. Zero coefficients are never stored.
class OperatorExpr {
public:
    using TermMap = std::map<Word, Coefficient>;

    OperatorExpr() = default;
    OperatorExpr(Coefficient scalar); // NOLINT: scalars embed as multiples of 1

    static OperatorExpr identity() { return OperatorExpr(Coefficient(1)); }
    static OperatorExpr generator(Letter letter);
    /// Canonicalizes an arbitrary (not necessarily ordered) word.
    static OperatorExpr from_word(const Word& word, const Coefficient& scale = Coefficient(1));

    bool is_zero() const noexcept { return terms_.empty(); }
    const TermMap& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    Coefficient coefficient(const Word& word) const;
    int max_mode() const noexcept;

    OperatorExpr substitute(Symbol s, const Coefficient& value) const;
    OperatorExpr adjoint() const;

    OperatorExpr& operator+=(const OperatorExpr& rhs);
    OperatorExpr& operator-=(const OperatorExpr& rhs);
    OperatorExpr& operator*=(const Coefficient& scale);
    OperatorExpr operator-() const;

    friend OperatorExpr operator+(OperatorExpr l, const OperatorExpr& r) { return l += r; }
    friend OperatorExpr operator-(OperatorExpr l, const OperatorExpr& r) { return l -= r; }
    friend OperatorExpr operator*(OperatorExpr l, const Coefficient& s) { return l *= s; }
    friend OperatorExpr operator*(const Coefficient& s, OperatorExpr r) { return r *= s; }
    /// Operator product, normal ordered.
    friend OperatorExpr operator*(const OperatorExpr& l, const OperatorExpr& r);
    friend bool operator==(const OperatorExpr&, const OperatorExpr&) = default;

    std::string to_string() const;

private:
    void add_term(const Word& word, const Coefficient& value);

    TermMap terms_;
};

/// [A, B] = AB - BA, re-canonicalized. When `mode_cutoff` is given, any
/// oscillator above it in either argument is rejected with TruncationError.
OperatorExpr commutator(const OperatorExpr& a, const OperatorExpr& b, std::optional<int> mode_cutoff = std::nullopt);

} // namespace nelson::algebra
