#include "nelson/algebra/operator_expr.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace nelson::algebra {

namespace {

struct GaussianInt {
    std::int64_t re = 0;
    std::int64_t im = 0;

    bool is_zero() const noexcept { return re == 0 && im == 0; }
    friend GaussianInt operator*(GaussianInt l, GaussianInt r) {
        return {l.re * r.re - l.im * r.im, l.re * r.im + l.im * r.re};
    }
};

using OrderedTerms = std::vector<std::pair<GaussianInt, Word>>;

struct WordHash {
    std::size_t operator()(const Word& word) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& l : word) {
            const std::size_t v = (std::size_t(l.kind) << 32) | (std::size_t(l.mode) << 16) | l.direction;
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// Value of [left, right] for an adjacent out-of-order pair (right < left).
GaussianInt exchange_term(const Letter& left, const Letter& right) {
    if (left.kind == LetterKind::annihilate && right.kind == LetterKind::create && left.mode == right.mode &&
        left.direction == right.direction)
        return {1, 0};
    if (left.kind == LetterKind::momentum && right.kind == LetterKind::position && left.direction == right.direction)
        return {0, -1};
    return {};
}

void merge_into(OrderedTerms& out, GaussianInt scale, const OrderedTerms& terms) {
    for (const auto& [c, w] : terms) {
        const GaussianInt v = scale * c;
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& t) { return t.second == w; });
        if (it == out.end()) {
            out.emplace_back(v, w);
        } else {
            it->first.re += v.re;
            it->first.im += v.im;
        }
    }
}

class NormalOrderer {
public:
    const OrderedTerms& order(const Word& word) {
        if (auto it = cache_.find(word); it != cache_.end()) return it->second;
        OrderedTerms result = compute(word);
        if (cache_.size() > 2'000'000) cache_.clear();
        return cache_.emplace(word, std::move(result)).first->second;
    }

private:
    OrderedTerms compute(const Word& word) {
        std::size_t pos = word.size();
        for (std::size_t i = 0; i + 1 < word.size(); ++i) {
            if (word[i + 1] < word[i]) {
                pos = i;
                break;
            }
        }
        if (pos == word.size()) return {{GaussianInt{1, 0}, word}};

        OrderedTerms out;
        Word swapped = word;
        std::swap(swapped[pos], swapped[pos + 1]);
        const OrderedTerms first = order(swapped); // copy: cache may rehash
        merge_into(out, {1, 0}, first);

        const GaussianInt c = exchange_term(word[pos], word[pos + 1]);
        if (!c.is_zero()) {
            Word reduced;
            reduced.reserve(word.size() - 2);
            reduced.insert(reduced.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(pos));
            reduced.insert(reduced.end(), word.begin() + static_cast<std::ptrdiff_t>(pos) + 2, word.end());
            const OrderedTerms second = order(reduced);
            merge_into(out, c, second);
        }
        std::erase_if(out, [](const auto& t) { return t.first.is_zero(); });
        return out;
    }

    std::unordered_map<Word, OrderedTerms, WordHash> cache_;
};

NormalOrderer& orderer() {
    thread_local NormalOrderer instance;
    return instance;
}

Coefficient to_coefficient(GaussianInt v) { return Coefficient(GaussianRational{Rational(v.re), Rational(v.im)}); }

void check_cutoff(const OperatorExpr& e, int cutoff) {
    if (e.max_mode() > cutoff)
        throw TruncationError("operator contains mode " + std::to_string(e.max_mode()) + " beyond cutoff " +
                              std::to_string(cutoff));
}

} // namespace

Letter create(int mode, int direction) {
    if (mode < 1) throw ValidationError("oscillator mode must be >= 1");
    return {LetterKind::create, static_cast<std::uint16_t>(mode), static_cast<std::uint16_t>(direction)};
}

Letter annihilate(int mode, int direction) {
    if (mode < 1) throw ValidationError("oscillator mode must be >= 1");
    return {LetterKind::annihilate, static_cast<std::uint16_t>(mode), static_cast<std::uint16_t>(direction)};
}

Letter position(int direction) { return {LetterKind::position, 0, static_cast<std::uint16_t>(direction)}; }

Letter momentum(int direction) { return {LetterKind::momentum, 0, static_cast<std::uint16_t>(direction)}; }

std::string to_string(const Letter& letter) {
    const auto idx = std::to_string(letter.mode) + "," + std::to_string(letter.direction);
    switch (letter.kind) {
    case LetterKind::create: return "ad[" + idx + "]";
    case LetterKind::annihilate: return "a[" + idx + "]";
    case LetterKind::position: return "x0[" + std::to_string(letter.direction) + "]";
    case LetterKind::momentum: return "p0[" + std::to_string(letter.direction) + "]";
    }
    return "?";
}

bool is_canonical(const Word& word) noexcept { return std::is_sorted(word.begin(), word.end()); }

OperatorExpr::OperatorExpr(Coefficient scalar) {
    if (!scalar.is_zero()) terms_.emplace(Word{}, std::move(scalar));
}

OperatorExpr OperatorExpr::generator(Letter letter) {
    OperatorExpr out;
    out.terms_.emplace(Word{letter}, Coefficient(1));
    return out;
}

OperatorExpr OperatorExpr::from_word(const Word& word, const Coefficient& scale) {
    OperatorExpr out;
    if (scale.is_zero()) return out;
    if (is_canonical(word)) {
        out.terms_.emplace(word, scale);
        return out;
    }
    const OrderedTerms ordered = orderer().order(word);
    for (const auto& [c, w] : ordered) out.add_term(w, scale * to_coefficient(c));
    return out;
}

Coefficient OperatorExpr::coefficient(const Word& word) const {
    const auto it = terms_.find(word);
    return it == terms_.end() ? Coefficient() : it->second;
}

int OperatorExpr::max_mode() const noexcept {
    int m = 0;
    for (const auto& [w, c] : terms_)
        for (const auto& l : w) m = std::max(m, int(l.mode));
    return m;
}

OperatorExpr OperatorExpr::substitute(Symbol s, const Coefficient& value) const {
    OperatorExpr out;
    for (const auto& [w, c] : terms_) out.add_term(w, c.substitute(s, value));
    return out;
}

OperatorExpr OperatorExpr::adjoint() const {
    OperatorExpr out;
    for (const auto& [w, c] : terms_) {
        Word reversed(w.rbegin(), w.rend());
        for (auto& l : reversed) {
            if (l.kind == LetterKind::create) {
                l.kind = LetterKind::annihilate;
            } else if (l.kind == LetterKind::annihilate) {
                l.kind = LetterKind::create;
            }
        }
        out += from_word(reversed, c.conjugate());
    }
    return out;
}

void OperatorExpr::add_term(const Word& word, const Coefficient& value) {
    if (value.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(word, value);
    if (!inserted) {
        it->second += value;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& rhs) {
    for (const auto& [w, c] : rhs.terms_) add_term(w, c);
    return *this;
}

OperatorExpr& OperatorExpr::operator-=(const OperatorExpr& rhs) {
    for (const auto& [w, c] : rhs.terms_) add_term(w, -c);
    return *this;
}

OperatorExpr& OperatorExpr::operator*=(const Coefficient& scale) {
    if (scale.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second = it->second * scale;
        it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
    }
    return *this;
}

OperatorExpr OperatorExpr::operator-() const {
    OperatorExpr out = *this;
    for (auto& [w, c] : out.terms_) c = -c;
    return out;
}

OperatorExpr operator*(const OperatorExpr& l, const OperatorExpr& r) {
    std::unordered_map<Word, Coefficient, WordHash> acc;
    Word joined;
    for (const auto& [lw, lc] : l.terms_) {
        for (const auto& [rw, rc] : r.terms_) {
            const Coefficient c = lc * rc;
            joined.assign(lw.begin(), lw.end());
            joined.insert(joined.end(), rw.begin(), rw.end());
            if (lw.empty() || rw.empty() || !(rw.front() < lw.back())) {
                acc[joined] += c;
                continue;
            }
            const OrderedTerms ordered = orderer().order(joined);
            for (const auto& [k, w] : ordered) acc[w] += c * to_coefficient(k);
        }
    }
    OperatorExpr out;
    for (auto& [w, c] : acc)
        if (!c.is_zero()) out.terms_.emplace(w, std::move(c));
    return out;
}

std::string OperatorExpr::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.to_string() << ")";
        for (const auto& l : w) os << " " << algebra::to_string(l);
    }
    return os.str();
}

OperatorExpr commutator(const OperatorExpr& a, const OperatorExpr& b, std::optional<int> mode_cutoff) {
    if (mode_cutoff) {
        check_cutoff(a, *mode_cutoff);
        check_cutoff(b, *mode_cutoff);
    }
    return a * b - b * a;
}

} // namespace nelson::algebra
