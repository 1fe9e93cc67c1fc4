#pragma once

#include "nelson/algebra/operator_expr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nelson::algebra {

/// Which transverse directions an operator construction sums over.
///
/// Sums over transverse directions (the Virasoro-type combinations inside
/// p^- and M^{i-}) run over `named` explicitly. When `spectator` is set,
/// one extra representative direction stands for all remaining D-2-|named|
/// directions: its terms carry the spectator weight symbol, and
/// collapse_spectators() later turns closed spectator loops into the
/// exact factor (D - 2 - |named|).
struct TransverseBasis {
    int mode_cutoff = 1;
    std::vector<int> named;
    std::optional<int> spectator;

    /// Named directions 1..count, no spectator: D = count + 2 numerically.
    static TransverseBasis explicit_directions(int mode_cutoff, int count);
    /// Named directions 1..count plus a representative spectator: D symbolic.
    static TransverseBasis symbolic(int mode_cutoff, int count);

    bool is_named(int direction) const noexcept;
};

/// Light-cone index of a Lorentz generator M^{mu nu}.
struct LightConeIndex {
    enum class Kind { transverse, plus, minus };
    Kind kind = Kind::transverse;
    int direction = 0; // only for transverse

    static LightConeIndex transverse(int i) { return {Kind::transverse, i}; }
    static LightConeIndex plus() { return {Kind::plus, 0}; }
    static LightConeIndex minus() { return {Kind::minus, 0}; }
    friend bool operator==(const LightConeIndex&, const LightConeIndex&) = default;
};

/// A light-cone Lorentz generator at tau = 0, split as
///
///   M = (p^+)^{p_plus_power} * transverse  -  x^- * longitudinal
///
/// where `transverse` lives in the oscillator algebra and `longitudinal`
/// is either nothing, p_i (for M^{i-}) or p^+ (for M^{+-}). Oscillator
/// normalization uses 2 alpha' = 1; anomaly coefficients do not depend on
/// alpha' and p^+ only rescales.
struct LorentzGenerator {
    enum class Longitudinal { none, transverse_momentum, plus_momentum };

    OperatorExpr transverse;
    int p_plus_power = 0;
    Longitudinal longitudinal = Longitudinal::none;
    int longitudinal_direction = 0;
    int sign = 1; // overall sign multiplying the longitudinal tail
};

/// String oscillator alpha_n^k: sqrt(n) a_{n,k} for n > 0, sqrt(|n|) a^dagger
/// for n < 0, and the zero-mode momentum p0_k for n = 0.
OperatorExpr oscillator(int n, int direction);

/// Transverse Virasoro combination L_n = 1/2 sum_k sum_p :alpha_{n-p}^k alpha_p^k:,
/// with every mode index truncated at |p| <= mode_cutoff.
OperatorExpr virasoro(int n, const TransverseBasis& basis);

/// Builds M^{mu nu} in the standard light-cone mode expansion:
///   M^{ij} = x^i p^j - x^j p^i - i sum_n (a^dagger_{n,i} a_{n,j} - a^dagger_{n,j} a_{n,i})
///   M^{i-} = K^i / p^+ - x^- p^i,
///   K^i = 1/2 {x^i, L_0 - a} - i sum_{n>=1} (alpha_{-n}^i L_n - L_{-n} alpha_n^i) / n
///   M^{i+} = p^+ x^i,  M^{+-} = -x^- p^+.
/// Throws ValidationError for an index outside the basis.
LorentzGenerator lorentz_generator(LightConeIndex mu, LightConeIndex nu, const TransverseBasis& basis);

/// Resolves spectator bookkeeping in a product of two generators built on
/// a symbolic basis: spectator words keep a single weight (a sum over
/// spectator directions), closed spectator loops become D - 2 - |named|.
OperatorExpr collapse_spectators(const OperatorExpr& expr, const TransverseBasis& basis);

/// (p^+)^2 [M^{i-}, M^{j-}] as an operator in the transverse algebra.
///
/// The x^- and 1/p^+ factors are commuted through analytically, leaving
///   [K^i, K^j] + i (K^i p_j - p_i K^j)   for i != j.
OperatorExpr minus_minus_commutator(int i, int j, const TransverseBasis& basis);

/// Exact light-cone anomaly coefficient Delta_m(D, a), defined through
///   (p^+)^2 [M^{i-}, M^{j-}] = (1/alpha') sum_m Delta_m (alpha_{-m}^i alpha_m^j - alpha_{-m}^j alpha_m^i)
/// so that Delta_m = m((D-2)/24 - 1) + (a - (D-2)/24)/m in the usual normalization.
struct AnomalyCoefficient {
    int m = 1;
    int mode_cutoff = 0;
    Coefficient delta;               // polynomial in D and a
    bool truncation_stable = false;  // unchanged when the cutoff is raised by one
    bool antisymmetric = false;      // partner term has the opposite coefficient
    bool clean_below_cutoff = false; // every term up to creation level N is an anomaly pair
};

/// Requires mode_cutoff >= 2m (TruncationError otherwise).
AnomalyCoefficient anomaly_coefficient(int m, int mode_cutoff);

/// Solution set of a system of affine equations c0 + cD*D + ca*a = 0.
struct LinearSolution {
    enum class Kind { empty, unique, line, everything };
    Kind kind = Kind::everything;
    std::optional<Rational> dims;      // for unique
    std::optional<Rational> intercept; // for unique
    std::string description;
};

/// Throws ValidationError if a polynomial is not affine in D and a.
LinearSolution solve_affine_system(const std::vector<Coefficient>& equations);

} // namespace nelson::algebra
