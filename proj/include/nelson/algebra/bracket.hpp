#pragma once

#include "nelson/algebra/operator_expr.hpp"
#include "nelson/core.hpp"
#include "nelson/fpe.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace nelson::algebra {

/// A functional of the canonical pair (rho, S) on a grid, together with
/// its functional derivatives delta/delta rho and delta/delta S.
class BracketFunctional {
public:
    enum class Kind { mean_position, mean_momentum, grid };
    using Evaluator = std::function<double(const GridField&)>;

    /// <x> = integral x rho dx.
    static BracketFunctional mean_position();
    /// <p> = integral rho dS/dx dx.
    static BracketFunctional mean_momentum();
    /// Arbitrary grid functional; derivatives come from central variations
    /// rho_j -> rho_j +- eps/h (resp. S_j), i.e. the defining limit.
    static BracketFunctional grid(std::string name, Evaluator value, double epsilon = 1e-6);

    /// Same functional plus a constant (derivatives unchanged).
    BracketFunctional shifted(double constant) const;

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    double value(const GridField& field) const;
    std::vector<double> d_rho(const GridField& field) const;
    std::vector<double> d_S(const GridField& field) const;

private:
    Kind kind_ = Kind::grid;
    std::string name_;
    Evaluator value_;
    double epsilon_ = 1e-6;
    double shift_ = 0.0;
};

/// {A, B}_s = integral (dA/drho dB/dS - dA/dS dB/drho) dx by grid quadrature.
double stochastic_bracket(const BracketFunctional& a, const BracketFunctional& b, const GridField& field);

/// Factor c in {A, B}_s = c <[A_q, B_q]>. With [x, p] = i and the bracket
/// above giving {<x>, <p>}_s = +1, c = -i.
inline const std::complex<double> bracket_correspondence{0.0, -1.0};

/// <state| [A, B] |state> for a Fock basis state, using the exact symbolic
/// commutator evaluated at numeric (D, a). Zero modes sit in a normalized
/// Gaussian packet. Throws TruncationError when occupancies overflow.
std::complex<double> commutator_expectation(const OperatorExpr& a, const OperatorExpr& b, const ModeStateSpec& state,
                                            double dims = 26.0, double intercept = 1.0, int max_occupancy = 64);

/// Integral psi* [A, B] psi dx for psi = sqrt(rho) exp(i S) on a grid, where
/// A and B are words in one direction's zero-mode pair: x0 acts by
/// multiplication, p0 as -i d/dx (central differences). Oscillator letters
/// are rejected with UnsupportedState.
std::complex<double> commutator_expectation(const OperatorExpr& a, const OperatorExpr& b, const GridField& psi,
                                            double dims = 26.0, double intercept = 1.0);

} // namespace nelson::algebra
