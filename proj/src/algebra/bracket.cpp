#include "nelson/algebra/bracket.hpp"

#include "nelson/algebra/fock.hpp"
#include "nelson/errors.hpp"

#include <cmath>

namespace nelson::algebra {

namespace {

// Central differences inside, one-sided at the ends.
std::vector<double> gradient(const std::vector<double>& f, double h) {
    const std::size_t p = f.size();
    std::vector<double> d(p);
    d[0] = (f[1] - f[0]) / h;
    d[p - 1] = (f[p - 1] - f[p - 2]) / h;
    for (std::size_t j = 1; j + 1 < p; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    return d;
}

std::vector<std::complex<double>> gradient(const std::vector<std::complex<double>>& f, double h) {
    const std::size_t p = f.size();
    std::vector<std::complex<double>> d(p);
    d[0] = (f[1] - f[0]) / h;
    d[p - 1] = (f[p - 1] - f[p - 2]) / h;
    for (std::size_t j = 1; j + 1 < p; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    return d;
}

} // namespace

BracketFunctional BracketFunctional::mean_position() {
    BracketFunctional f;
    f.kind_ = Kind::mean_position;
    f.name_ = "<x>";
    return f;
}

BracketFunctional BracketFunctional::mean_momentum() {
    BracketFunctional f;
    f.kind_ = Kind::mean_momentum;
    f.name_ = "<p>";
    return f;
}

BracketFunctional BracketFunctional::grid(std::string name, Evaluator value, double epsilon) {
    if (!value) throw ValidationError("grid functional needs an evaluator");
    if (!(epsilon > 0.0)) throw ValidationError("variation step must be positive");
    BracketFunctional f;
    f.kind_ = Kind::grid;
    f.name_ = std::move(name);
    f.value_ = std::move(value);
    f.epsilon_ = epsilon;
    return f;
}

BracketFunctional BracketFunctional::shifted(double constant) const {
    BracketFunctional f = *this;
    f.shift_ += constant;
    return f;
}

double BracketFunctional::value(const GridField& field) const {
    const double h = field.h();
    double acc = 0.0;
    switch (kind_) {
    case Kind::mean_position:
        for (int j = 0; j < field.points(); ++j) acc += field.x(j) * field.rho[static_cast<std::size_t>(j)];
        return acc * h + shift_;
    case Kind::mean_momentum: {
        const auto ds = gradient(field.S, h);
        for (std::size_t j = 0; j < ds.size(); ++j) acc += field.rho[j] * ds[j];
        return acc * h + shift_;
    }
    case Kind::grid:
        return value_(field) + shift_;
    }
    return acc;
}

std::vector<double> BracketFunctional::d_rho(const GridField& field) const {
    switch (kind_) {
    case Kind::mean_position: {
        std::vector<double> out(field.rho.size());
        for (int j = 0; j < field.points(); ++j) out[static_cast<std::size_t>(j)] = field.x(j);
        return out;
    }
    case Kind::mean_momentum:
        return gradient(field.S, field.h());
    case Kind::grid:
        break;
    }
    std::vector<double> out(field.rho.size());
    GridField probe = field;
    const double bump = epsilon_ / field.h();
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double saved = probe.rho[j];
        probe.rho[j] = saved + bump;
        const double up = value_(probe);
        probe.rho[j] = saved - bump;
        const double down = value_(probe);
        probe.rho[j] = saved;
        out[j] = (up - down) / (2.0 * epsilon_);
    }
    return out;
}

std::vector<double> BracketFunctional::d_S(const GridField& field) const {
    switch (kind_) {
    case Kind::mean_position:
        return std::vector<double>(field.rho.size(), 0.0);
    case Kind::mean_momentum: {
        // integral rho S' = -integral rho' S for fields vanishing at the ends
        auto out = gradient(field.rho, field.h());
        for (double& v : out) v = -v;
        return out;
    }
    case Kind::grid:
        break;
    }
    std::vector<double> out(field.S.size());
    GridField probe = field;
    const double bump = epsilon_ / field.h();
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double saved = probe.S[j];
        probe.S[j] = saved + bump;
        const double up = value_(probe);
        probe.S[j] = saved - bump;
        const double down = value_(probe);
        probe.S[j] = saved;
        out[j] = (up - down) / (2.0 * epsilon_);
    }
    return out;
}

double stochastic_bracket(const BracketFunctional& a, const BracketFunctional& b, const GridField& field) {
    const auto ar = a.d_rho(field);
    const auto as = a.d_S(field);
    const auto br = b.d_rho(field);
    const auto bs = b.d_S(field);
    double acc = 0.0;
    for (std::size_t j = 0; j < ar.size(); ++j) acc += ar[j] * bs[j] - as[j] * br[j];
    return acc * field.h();
}

std::complex<double> commutator_expectation(const OperatorExpr& a, const OperatorExpr& b, const ModeStateSpec& state,
                                            double dims, double intercept, int max_occupancy) {
    const OperatorExpr c = commutator(a, b);
    const FockRepresentation rep(dims, intercept, max_occupancy);
    const FockState ket = basis_state(state);
    return rep.matrix_element(ket, c, ket);
}

std::complex<double> commutator_expectation(const OperatorExpr& a, const OperatorExpr& b, const GridField& psi,
                                            double dims, double intercept) {
    int direction = 0;
    for (const auto* op : {&a, &b})
        for (const auto& [word, coef] : op->terms())
            for (const auto& letter : word) {
                if (letter.is_oscillator())
                    throw UnsupportedState("grid expectation supports only zero-mode x0/p0 words, got " + to_string(letter));
                if (direction == 0) direction = letter.direction;
                if (letter.direction != direction)
                    throw UnsupportedState("grid expectation supports a single transverse direction");
            }
    const OperatorExpr c = commutator(a, b);
    const double h = psi.h();
    std::vector<std::complex<double>> base(psi.rho.size());
    for (std::size_t j = 0; j < base.size(); ++j)
        base[j] = std::sqrt(psi.rho[j]) * std::exp(std::complex<double>(0.0, psi.S[j]));

    std::complex<double> total{};
    for (const auto& [word, coef] : c.terms()) {
        std::vector<std::complex<double>> phi = base;
        for (auto it = word.rbegin(); it != word.rend(); ++it) {
            if (it->kind == LetterKind::position) {
                for (int j = 0; j < psi.points(); ++j) phi[static_cast<std::size_t>(j)] *= psi.x(j);
            } else {
                phi = gradient(phi, h);
                for (auto& v : phi) v *= std::complex<double>(0.0, -1.0);
            }
        }
        std::complex<double> overlap{};
        for (std::size_t j = 0; j < phi.size(); ++j) overlap += std::conj(base[j]) * phi[j];
        total += coef.evaluate(dims, intercept) * overlap * h;
    }
    return total;
}

} // namespace nelson::algebra
