#pragma once

#include "nelson/algebra/operator_expr.hpp"
#include "nelson/core.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace nelson::algebra {

/// Occupation-number basis vector. Oscillator slots count a^dagger_{n,i}
/// quanta; zero-mode slots count quanta of an auxiliary oscillator b_i
/// with x0_i = (b_i + b_i^dagger)/sqrt 2 and p0_i = i (b_i^dagger - b_i)/sqrt 2,
/// so the zero-mode pair is represented exactly with [x0, p0] = i.
class Occupation {
public:
    using Slot = std::uint32_t;

    static Slot oscillator_slot(int mode, int direction);
    static Slot zero_mode_slot(int direction);

    int count(Slot slot) const noexcept;
    void set(Slot slot, int count);
    int total() const noexcept;

    const std::vector<std::pair<Slot, int>>& entries() const noexcept { return entries_; }
    friend auto operator<=>(const Occupation&, const Occupation&) = default;

private:
    std::vector<std::pair<Slot, int>> entries_; // sorted by slot, counts > 0
};

using FockState = std::map<Occupation, std::complex<double>>;

/// Basis vector with the given oscillator occupations; every zero mode in
/// the b-vacuum (a normalized Gaussian packet).
FockState basis_state(const ModeStateSpec& spec);
FockState vacuum();

std::complex<double> inner_product(const FockState& bra, const FockState& ket);

/// Floating-point representation of OperatorExpr on sparse Fock vectors.
///
/// Words are applied letter by letter from the right, without any use of
/// normal ordering, so this serves as an independent check on the exact
/// symbolic engine. Coefficients are evaluated at numeric (D, a).
class FockRepresentation {
public:
    FockRepresentation(double dims, double intercept, int max_occupancy = 64)
        : dims_(dims), intercept_(intercept), max_occupancy_(max_occupancy) {}

    FockState apply(const OperatorExpr& op, const FockState& ket) const;
    FockState apply_word(const Word& word, std::complex<double> scale, const FockState& ket) const;

    std::complex<double> matrix_element(const FockState& bra, const OperatorExpr& op, const FockState& ket) const;
    /// <bra| (AB - BA) |ket>, computed from successive actions of A and B.
    std::complex<double> commutator_element(const FockState& bra, const OperatorExpr& a, const OperatorExpr& b,
                                            const FockState& ket) const;
    /// Dense matrix of `op` between the given basis vectors (rows: bras, cols: kets).
    Eigen::MatrixXcd dense_matrix(const OperatorExpr& op, const std::vector<FockState>& basis) const;

private:
    void apply_letter(const Letter& letter, FockState& state) const;

    double dims_;
    double intercept_;
    int max_occupancy_;
};

/// All occupation basis vectors over the given oscillator slots with
/// total occupancy at most `max_total` (zero modes in the b-vacuum).
std::vector<FockState> truncated_basis(int mode_cutoff, const std::vector<int>& directions, int max_total);

} // namespace nelson::algebra
