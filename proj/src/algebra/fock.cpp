#include "nelson/algebra/fock.hpp"

#include "nelson/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nelson::algebra {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

void accumulate(FockState& state, const Occupation& occ, std::complex<double> value) {
    if (value == std::complex<double>{}) return;
    auto [it, inserted] = state.emplace(occ, value);
    if (!inserted) {
        it->second += value;
        if (it->second == std::complex<double>{}) state.erase(it);
    }
}

} // namespace

Occupation::Slot Occupation::oscillator_slot(int mode, int direction) {
    if (mode < 1 || mode > 0xFFFF || direction < 1 || direction > 0xFFFF)
        throw ValidationError("oscillator slot out of range");
    return (static_cast<Slot>(mode) << 16) | static_cast<Slot>(direction);
}

Occupation::Slot Occupation::zero_mode_slot(int direction) {
    if (direction < 1 || direction > 0xFFFF) throw ValidationError("zero-mode slot out of range");
    return static_cast<Slot>(direction);
}

int Occupation::count(Slot slot) const noexcept {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                                     [](const auto& e, Slot s) { return e.first < s; });
    return (it != entries_.end() && it->first == slot) ? it->second : 0;
}

void Occupation::set(Slot slot, int count) {
    if (count < 0) throw ValidationError("negative occupation");
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                                     [](const auto& e, Slot s) { return e.first < s; });
    const bool present = it != entries_.end() && it->first == slot;
    if (count == 0) {
        if (present) entries_.erase(it);
    } else if (present) {
        it->second = count;
    } else {
        entries_.insert(it, {slot, count});
    }
}

int Occupation::total() const noexcept {
    int t = 0;
    for (const auto& e : entries_) t += e.second;
    return t;
}

FockState basis_state(const ModeStateSpec& spec) {
    Occupation occ;
    for (const auto& [key, k] : spec.occupations) occ.set(Occupation::oscillator_slot(key.first, key.second), k);
    return FockState{{occ, 1.0}};
}

FockState vacuum() { return FockState{{Occupation{}, 1.0}}; }

std::complex<double> inner_product(const FockState& bra, const FockState& ket) {
    std::complex<double> sum{};
    for (const auto& [occ, amp] : ket) {
        const auto it = bra.find(occ);
        if (it != bra.end()) sum += std::conj(it->second) * amp;
    }
    return sum;
}

void FockRepresentation::apply_letter(const Letter& letter, FockState& state) const {
    FockState out;
    for (const auto& [occ, amp] : state) {
        const bool zero_mode = letter.kind == LetterKind::position || letter.kind == LetterKind::momentum;
        const auto slot = zero_mode ? Occupation::zero_mode_slot(letter.direction)
                                    : Occupation::oscillator_slot(letter.mode, letter.direction);
        const int k = occ.count(slot);
        auto raised = [&] {
            if (k + 1 > max_occupancy_) throw TruncationError("occupation exceeds representation limit");
            Occupation up = occ;
            up.set(slot, k + 1);
            return up;
        };
        auto lowered = [&] {
            Occupation down = occ;
            down.set(slot, k - 1);
            return down;
        };
        const double up_factor = std::sqrt(static_cast<double>(k + 1));
        const double down_factor = std::sqrt(static_cast<double>(k));
        switch (letter.kind) {
        case LetterKind::create:
            accumulate(out, raised(), amp * up_factor);
            break;
        case LetterKind::annihilate:
            if (k > 0) accumulate(out, lowered(), amp * down_factor);
            break;
        case LetterKind::position:
            accumulate(out, raised(), amp * (up_factor * inv_sqrt2));
            if (k > 0) accumulate(out, lowered(), amp * (down_factor * inv_sqrt2));
            break;
        case LetterKind::momentum: {
            const std::complex<double> i{0.0, 1.0};
            accumulate(out, raised(), amp * i * (up_factor * inv_sqrt2));
            if (k > 0) accumulate(out, lowered(), -amp * i * (down_factor * inv_sqrt2));
            break;
        }
        }
    }
    state = std::move(out);
}

FockState FockRepresentation::apply_word(const Word& word, std::complex<double> scale, const FockState& ket) const {
    FockState state = ket;
    for (auto it = word.rbegin(); it != word.rend() && !state.empty(); ++it) apply_letter(*it, state);
    for (auto& [occ, amp] : state) amp *= scale;
    return state;
}

FockState FockRepresentation::apply(const OperatorExpr& op, const FockState& ket) const {
    FockState out;
    for (const auto& [word, coef] : op.terms()) {
        const auto scale = coef.evaluate(dims_, intercept_);
        for (const auto& [occ, amp] : apply_word(word, scale, ket)) accumulate(out, occ, amp);
    }
    return out;
}

std::complex<double> FockRepresentation::matrix_element(const FockState& bra, const OperatorExpr& op,
                                                        const FockState& ket) const {
    return inner_product(bra, apply(op, ket));
}

std::complex<double> FockRepresentation::commutator_element(const FockState& bra, const OperatorExpr& a,
                                                            const OperatorExpr& b, const FockState& ket) const {
    return inner_product(bra, apply(a, apply(b, ket))) - inner_product(bra, apply(b, apply(a, ket)));
}

Eigen::MatrixXcd FockRepresentation::dense_matrix(const OperatorExpr& op, const std::vector<FockState>& basis) const {
    const auto size = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, size);
    for (Eigen::Index c = 0; c < size; ++c) {
        const FockState image = apply(op, basis[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < size; ++r) m(r, c) = inner_product(basis[static_cast<std::size_t>(r)], image);
    }
    return m;
}

std::vector<FockState> truncated_basis(int mode_cutoff, const std::vector<int>& directions, int max_total) {
    std::vector<Occupation::Slot> slots;
    for (int n = 1; n <= mode_cutoff; ++n)
        for (int d : directions) slots.push_back(Occupation::oscillator_slot(n, d));

    std::vector<FockState> out;
    Occupation current;
    auto recurse = [&](auto&& self, std::size_t index, int remaining) -> void {
        if (index == slots.size()) {
            out.push_back(FockState{{current, 1.0}});
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            current.set(slots[index], k);
            self(self, index + 1, remaining - k);
        }
        current.set(slots[index], 0);
    };
    recurse(recurse, 0, max_total);
    return out;
}

} // namespace nelson::algebra
