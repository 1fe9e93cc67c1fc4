#include "nelson/algebra/lorentz.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <array>

namespace nelson::algebra {

namespace {

Coefficient half() { return Coefficient(Rational(1, 2)); }
Coefficient imag() { return Coefficient::imaginary_unit(); }

std::vector<int> summed_directions(const TransverseBasis& basis) {
    std::vector<int> dirs = basis.named;
    if (basis.spectator) dirs.push_back(*basis.spectator);
    return dirs;
}

Coefficient direction_weight(const TransverseBasis& basis, int direction) {
    if (basis.spectator && *basis.spectator == direction) return Coefficient::symbol(Symbol::spectator);
    return Coefficient(1);
}

void require_named(const TransverseBasis& basis, int direction) {
    if (!basis.is_named(direction))
        throw ValidationError("transverse direction " + std::to_string(direction) + " is not in the basis");
}

// K^i: the part of M^{i-} multiplying 1/p^+.
OperatorExpr k_operator(int i, const TransverseBasis& basis) {
    const OperatorExpr x = OperatorExpr::generator(position(i));
    const OperatorExpr l0 = virasoro(0, basis) - OperatorExpr(Coefficient::symbol(Symbol::intercept));
    OperatorExpr out = half() * (x * l0 + l0 * x);
    for (int n = 1; n <= basis.mode_cutoff; ++n) {
        const OperatorExpr term = oscillator(-n, i) * virasoro(n, basis) - virasoro(-n, basis) * oscillator(n, i);
        out -= (imag() * Coefficient(Rational(1, n))) * term;
    }
    return out;
}

struct AffineForm {
    Rational constant;
    Rational dims;
    Rational intercept;
};

AffineForm to_affine(const Coefficient& c) {
    AffineForm f;
    for (const auto& [key, value] : c.terms()) {
        if (key.radicand != 1 || !value.im.is_zero())
            throw ValidationError("equation coefficient is not a real rational: " + c.to_string());
        const auto d = key.powers[static_cast<std::size_t>(Symbol::dims)];
        const auto a = key.powers[static_cast<std::size_t>(Symbol::intercept)];
        const auto w = key.powers[static_cast<std::size_t>(Symbol::spectator)];
        if (w != 0 || d + a > 1) throw ValidationError("equation is not affine in D and a: " + c.to_string());
        if (d == 1) {
            f.dims = value.re;
        } else if (a == 1) {
            f.intercept = value.re;
        } else {
            f.constant = value.re;
        }
    }
    return f;
}

} // namespace

TransverseBasis TransverseBasis::explicit_directions(int mode_cutoff, int count) {
    if (mode_cutoff < 1) throw ValidationError("mode cutoff must be at least 1");
    if (count < 1) throw ValidationError("no transverse directions");
    TransverseBasis b;
    b.mode_cutoff = mode_cutoff;
    for (int k = 1; k <= count; ++k) b.named.push_back(k);
    return b;
}

TransverseBasis TransverseBasis::symbolic(int mode_cutoff, int count) {
    TransverseBasis b = explicit_directions(mode_cutoff, count);
    b.spectator = count + 1;
    return b;
}

bool TransverseBasis::is_named(int direction) const noexcept {
    return std::find(named.begin(), named.end(), direction) != named.end();
}

OperatorExpr oscillator(int n, int direction) {
    if (n == 0) return OperatorExpr::generator(momentum(direction));
    const auto scale = Coefficient::sqrt(static_cast<std::uint32_t>(std::abs(n)));
    if (n > 0) return scale * OperatorExpr::generator(annihilate(n, direction));
    return scale * OperatorExpr::generator(create(-n, direction));
}

OperatorExpr virasoro(int n, const TransverseBasis& basis) {
    const int cutoff = basis.mode_cutoff;
    OperatorExpr out;
    if (std::abs(n) > 2 * cutoff) return out;
    for (int k : summed_directions(basis)) {
        OperatorExpr sum;
        if (n == 0) {
            const OperatorExpr p = oscillator(0, k);
            sum += half() * (p * p);
            for (int q = 1; q <= cutoff; ++q) sum += oscillator(-q, k) * oscillator(q, k);
        } else {
            for (int q = -cutoff; q <= cutoff; ++q) {
                if (std::abs(n - q) > cutoff) continue;
                sum += half() * (oscillator(n - q, k) * oscillator(q, k));
            }
        }
        out += direction_weight(basis, k) * sum;
    }
    return out;
}

LorentzGenerator lorentz_generator(LightConeIndex mu, LightConeIndex nu, const TransverseBasis& basis) {
    using K = LightConeIndex::Kind;
    for (const auto& idx : {mu, nu})
        if (idx.kind == K::transverse) require_named(basis, idx.direction);

    LorentzGenerator out;
    if (mu == nu) return out;

    // Canonical orientations: (i,j) with i<j, (i,-), (i,+), (+,-); others by antisymmetry.
    const auto rank = [](const LightConeIndex& x) {
        return x.kind == K::transverse ? 0 : (x.kind == K::plus ? 1 : 2);
    };
    const bool swapped = rank(mu) > rank(nu) || (rank(mu) == 0 && rank(nu) == 0 && mu.direction > nu.direction);
    const LightConeIndex first = swapped ? nu : mu;
    const LightConeIndex second = swapped ? mu : nu;

    if (first.kind == K::transverse && second.kind == K::transverse) {
        const int i = first.direction;
        const int j = second.direction;
        OperatorExpr m = OperatorExpr::generator(position(i)) * OperatorExpr::generator(momentum(j)) -
                         OperatorExpr::generator(position(j)) * OperatorExpr::generator(momentum(i));
        for (int n = 1; n <= basis.mode_cutoff; ++n) {
            const OperatorExpr rot = OperatorExpr::from_word({create(n, i), annihilate(n, j)}) -
                                     OperatorExpr::from_word({create(n, j), annihilate(n, i)});
            m -= imag() * rot;
        }
        out.transverse = std::move(m);
    } else if (first.kind == K::transverse && second.kind == K::minus) {
        out.transverse = k_operator(first.direction, basis);
        out.p_plus_power = -1;
        out.longitudinal = LorentzGenerator::Longitudinal::transverse_momentum;
        out.longitudinal_direction = first.direction;
    } else if (first.kind == K::transverse && second.kind == K::plus) {
        out.transverse = OperatorExpr::generator(position(first.direction));
        out.p_plus_power = 1;
    } else {
        out.longitudinal = LorentzGenerator::Longitudinal::plus_momentum;
    }

    if (swapped) {
        out.transverse = -out.transverse;
        out.sign = -out.sign;
    }
    return out;
}

OperatorExpr collapse_spectators(const OperatorExpr& expr, const TransverseBasis& basis) {
    if (!basis.spectator) return expr;
    const int spect = *basis.spectator;
    const auto remaining = static_cast<std::int64_t>(basis.named.size()) + 2;
    const Coefficient loop = Coefficient::symbol(Symbol::dims) - Coefficient(remaining);
    const Coefficient w = Coefficient::symbol(Symbol::spectator);

    OperatorExpr out;
    for (const auto& [word, coeff] : expr.terms()) {
        const bool open = std::any_of(word.begin(), word.end(), [&](const Letter& l) {
            return l.direction == spect && l.kind != LetterKind::position;
        });
        if (coeff.degree(Symbol::spectator) > 2) throw ValidationError("spectator weight above second order");
        const Coefficient c0 = coeff.coefficient_of(Symbol::spectator, 0);
        const Coefficient c1 = coeff.coefficient_of(Symbol::spectator, 1);
        const Coefficient c2 = coeff.coefficient_of(Symbol::spectator, 2);
        Coefficient resolved;
        if (open) {
            if (!c0.is_zero()) throw ValidationError("unweighted spectator operator in expression");
            resolved = (c1 + c2) * w;
        } else {
            if (!c1.is_zero()) throw ValidationError("spectator weight without spectator operators");
            resolved = c0 + c2 * loop;
        }
        out += OperatorExpr::from_word(word, resolved);
    }
    return out;
}

OperatorExpr minus_minus_commutator(int i, int j, const TransverseBasis& basis) {
    if (i == j) return {};
    require_named(basis, i);
    require_named(basis, j);
    const OperatorExpr ki = k_operator(i, basis);
    const OperatorExpr kj = k_operator(j, basis);
    const OperatorExpr pi = OperatorExpr::generator(momentum(i));
    const OperatorExpr pj = OperatorExpr::generator(momentum(j));
    const OperatorExpr raw = commutator(ki, kj) + imag() * (ki * pj - pi * kj);
    return collapse_spectators(raw, basis);
}

namespace {

int creation_level(const Word& word) {
    int level = 0;
    for (const auto& l : word)
        if (l.kind == LetterKind::create) level += l.mode;
    return level;
}

bool only_anomaly_terms_below(const OperatorExpr& c, int cutoff) {
    for (const auto& [word, coeff] : c.terms()) {
        if (creation_level(word) > cutoff) continue;
        const bool pair = word.size() == 2 && word[0].kind == LetterKind::create &&
                          word[1].kind == LetterKind::annihilate && word[0].mode == word[1].mode &&
                          word[0].direction != word[1].direction;
        if (!pair) return false;
    }
    return true;
}

} // namespace

AnomalyCoefficient anomaly_coefficient(int m, int mode_cutoff) {
    if (m < 1) throw ValidationError("anomaly mode m must be >= 1");
    if (mode_cutoff < 2 * m)
        throw TruncationError("mode cutoff " + std::to_string(mode_cutoff) + " too small for m = " +
                              std::to_string(m) + " (need >= " + std::to_string(2 * m) + ")");

    struct Extracted {
        Coefficient delta;
        bool antisymmetric;
        bool clean;
    };
    const auto extract = [m](int cutoff) {
        const OperatorExpr c = minus_minus_commutator(1, 2, TransverseBasis::symbolic(cutoff, 2));
        const Coefficient forward = c.coefficient({create(m, 1), annihilate(m, 2)});
        const Coefficient backward = c.coefficient({create(m, 2), annihilate(m, 1)});
        // alpha_{-m}^1 alpha_m^2 = m a^dagger_{m,1} a_{m,2}; the commutator carries 1/alpha' = 2.
        return Extracted{forward * Coefficient(Rational(1, 2 * m)), (forward + backward).is_zero(),
                         only_anomaly_terms_below(c, cutoff)};
    };

    const Extracted low = extract(mode_cutoff);
    const Extracted high = extract(mode_cutoff + 1);
    AnomalyCoefficient out;
    out.m = m;
    out.mode_cutoff = mode_cutoff;
    out.delta = low.delta;
    out.truncation_stable = high.delta == low.delta;
    out.antisymmetric = low.antisymmetric && high.antisymmetric;
    out.clean_below_cutoff = low.clean && high.clean;
    return out;
}

LinearSolution solve_affine_system(const std::vector<Coefficient>& equations) {
    std::vector<std::array<Rational, 3>> rows; // cD, ca, c0
    for (const auto& e : equations) {
        const AffineForm f = to_affine(e);
        rows.push_back({f.dims, f.intercept, f.constant});
    }
    // Gaussian elimination on [cD ca | -c0].
    std::size_t rank = 0;
    for (int col = 0; col < 2 && rank < rows.size(); ++col) {
        auto it = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(rank), rows.end(),
                               [col](const auto& r) { return !r[col].is_zero(); });
        if (it == rows.end()) continue;
        std::iter_swap(rows.begin() + static_cast<std::ptrdiff_t>(rank), it);
        auto& p = rows[rank];
        const Rational inv = Rational(1) / p[col];
        for (auto& v : p) v *= inv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col].is_zero()) continue;
            const Rational f = rows[r][col];
            for (int c = 0; c < 3; ++c) rows[r][c] -= f * p[c];
        }
        ++rank;
    }
    LinearSolution sol;
    for (std::size_t r = rank; r < rows.size(); ++r) {
        if (!rows[r][2].is_zero()) {
            sol.kind = LinearSolution::Kind::empty;
            sol.description = "no solution";
            return sol;
        }
    }
    if (rank == 0) {
        sol.kind = LinearSolution::Kind::everything;
        sol.description = "all (D, a)";
    } else if (rank == 1) {
        sol.kind = LinearSolution::Kind::line;
        const auto& r = rows[0];
        Coefficient lhs = Coefficient(r[0]) * Coefficient::symbol(Symbol::dims) +
                          Coefficient(r[1]) * Coefficient::symbol(Symbol::intercept) + Coefficient(r[2]);
        sol.description = lhs.to_string() + " = 0";
    } else {
        sol.kind = LinearSolution::Kind::unique;
        sol.dims = -rows[0][2];
        sol.intercept = -rows[1][2];
        sol.description = "D = " + sol.dims->to_string() + ", a = " + sol.intercept->to_string();
    }
    return sol;
}

} // namespace nelson::algebra
