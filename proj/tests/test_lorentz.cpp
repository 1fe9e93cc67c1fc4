#include "fock_oracle.hpp"

#include "nelson/algebra/fock.hpp"
#include "nelson/algebra/lorentz.hpp"
#include "nelson/errors.hpp"

#include <catch_amalgamated.hpp>

using namespace nelson;
using namespace nelson::algebra;

namespace {

OperatorExpr g(Letter l) { return OperatorExpr::generator(l); }
const Coefficient I = Coefficient::imaginary_unit();
const Coefficient D = Coefficient::symbol(Symbol::dims);
const Coefficient A = Coefficient::symbol(Symbol::intercept);

OperatorExpr rotation(int i, int j, const TransverseBasis& b) {
    return lorentz_generator(LightConeIndex::transverse(i), LightConeIndex::transverse(j), b).transverse;
}

} // namespace

TEST_CASE("M^{12} rotates directions 1 and 2") {
    const auto b = TransverseBasis::explicit_directions(2, 3);
    const auto m12 = rotation(1, 2, b);
    CHECK(commutator(m12, g(create(1, 1))) == I * g(create(1, 2)));
    CHECK(commutator(m12, g(create(2, 2))) == -I * g(create(2, 1)));
    CHECK(commutator(m12, g(position(1))) == I * g(position(2)));
    CHECK(commutator(m12, g(create(1, 3))).is_zero());
    CHECK(rotation(2, 1, b) == -m12);
}

TEST_CASE("diagonal generators vanish") {
    const auto b = TransverseBasis::explicit_directions(2, 3);
    CHECK(rotation(2, 2, b).is_zero());
    const auto mm = lorentz_generator(LightConeIndex::minus(), LightConeIndex::minus(), b);
    CHECK(mm.transverse.is_zero());
    CHECK(mm.longitudinal == LorentzGenerator::Longitudinal::none);
}

TEST_CASE("M^{+-} is purely longitudinal") {
    const auto b = TransverseBasis::explicit_directions(1, 2);
    const auto pm = lorentz_generator(LightConeIndex::plus(), LightConeIndex::minus(), b);
    CHECK(pm.transverse.is_zero());
    CHECK(pm.longitudinal == LorentzGenerator::Longitudinal::plus_momentum);
    CHECK(lorentz_generator(LightConeIndex::minus(), LightConeIndex::plus(), b).sign == -pm.sign);
}

TEST_CASE("transverse rotations close") {
    const auto b = TransverseBasis::explicit_directions(2, 3);
    CHECK(commutator(rotation(1, 2, b), rotation(2, 3, b)) == -I * rotation(1, 3, b));
    CHECK(commutator(rotation(1, 2, b), rotation(1, 2, b)).is_zero());
}

TEST_CASE("vacuum expectation of M^{i-} vanishes") {
    const auto b = TransverseBasis::explicit_directions(2, 24);
    const auto k1 = lorentz_generator(LightConeIndex::transverse(1), LightConeIndex::minus(), b).transverse;
    const FockRepresentation rep(26, 1);
    CHECK(std::abs(rep.matrix_element(vacuum(), k1, vacuum())) < 1e-12);
}

TEST_CASE("exact anomaly coefficients") {
    const auto d1 = anomaly_coefficient(1, 2);
    CHECK(d1.delta == A - Coefficient(1));
    CHECK(d1.truncation_stable);
    CHECK(d1.antisymmetric);
    CHECK(d1.clean_below_cutoff);

    const auto d2 = anomaly_coefficient(2, 4);
    CHECK(d2.delta == D * Coefficient(Rational(1, 16)) + A * Coefficient(Rational(1, 2)) - Coefficient(Rational(17, 8)));
    CHECK(d2.truncation_stable);

    CHECK(d1.delta.evaluate(26, 1) == std::complex<double>(0, 0));
    CHECK(d2.delta.evaluate(26, 1) == std::complex<double>(0, 0));
    CHECK(d2.delta.evaluate(25, 1) != std::complex<double>(0, 0));
    CHECK(d1.delta.evaluate(26, 0) != std::complex<double>(0, 0));
    CHECK(d2.delta.evaluate(26, 0) != std::complex<double>(0, 0));
    // Delta_1 = a - 1 carries no D dependence.
    CHECK_FALSE(d1.delta.depends_on(Symbol::dims));
}

TEST_CASE("the anomaly pins D = 26 and a = 1") {
    const auto sol = solve_affine_system({anomaly_coefficient(1, 2).delta, anomaly_coefficient(2, 4).delta});
    REQUIRE(sol.kind == LinearSolution::Kind::unique);
    CHECK(*sol.dims == Rational(26));
    CHECK(*sol.intercept == Rational(1));
}

TEST_CASE("cutoff below 2m is refused") {
    CHECK_THROWS_AS(anomaly_coefficient(2, 3), TruncationError);
    CHECK_THROWS_AS(anomaly_coefficient(0, 3), ValidationError);
}

TEST_CASE("symbolic D agrees with explicit directions") {
    for (int dirs : {23, 24}) {
        const auto c = minus_minus_commutator(1, 2, TransverseBasis::explicit_directions(2, dirs));
        const auto forward = c.coefficient({create(1, 1), annihilate(1, 2)}) * Coefficient(Rational(1, 2));
        const auto symbolic = anomaly_coefficient(1, 2).delta.substitute(Symbol::dims, Coefficient(dirs + 2));
        CHECK(forward == symbolic);
    }
}

TEST_CASE("anomaly matches the Fock oracle") {
    for (int m : {1, 2})
        for (auto [dims, a] : {std::pair{26, 1.0}, std::pair{25, 1.0}, std::pair{26, 0.0}}) {
            INFO("m = " << m << ", D = " << dims << ", a = " << a);
            const auto exact = anomaly_coefficient(m, 2 * m).delta.evaluate(dims, a);
            const auto numeric = oracle::fock_anomaly(m, dims, a) / (2.0 * m);
            CHECK(std::abs(numeric - exact) < 1e-9);
        }
}

TEST_CASE("affine solver edge cases") {
    CHECK(solve_affine_system({}).kind == LinearSolution::Kind::everything);
    CHECK(solve_affine_system({A - Coefficient(1)}).kind == LinearSolution::Kind::line);
    CHECK(solve_affine_system({A - Coefficient(1), A - Coefficient(2)}).kind == LinearSolution::Kind::empty);
    CHECK_THROWS_AS(solve_affine_system({D * D}), ValidationError);
}
