#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nlft/errors.hpp"
#include "nlft/experiments.hpp"
#include "nlft/propagator.hpp"
#include "oracles.hpp"

using namespace nlft;

namespace {

constexpr double e = std::numbers::e;
constexpr cplx I(0.0, 1.0);

double dist(const Mat2& m, cplx a, cplx b, cplx c, cplx d) {
    return std::max({std::abs(m.a - a), std::abs(m.b - b), std::abs(m.c - c), std::abs(m.d - d)});
}

SampledPotential constant(double q, double T, double h = 0.01) {
    return sample_function([q](double) { return q; }, h, T);
}

}  // namespace

TEST_CASE("cell propagator closed forms") {
    CHECK(dist(cell_propagator(0.0, 0.7, 0.0), 1.0, 0.0, 0.0, 1.0) < 1e-15);
    CHECK(dist(cell_propagator(0.0, std::numbers::pi / 2, 1.0), 0.0, -1.0, 1.0, 0.0) < 1e-15);
    CHECK(dist(cell_propagator(1.0, 1.0, 0.0), e, 0.0, 0.0, 1.0 / e) < 1e-15);
}

TEST_CASE("series and closed-form branches agree across the switch") {
    // |mu h^2| = 4 is the switch; compare both sides against the RK oracle
    for (double zr : {1.9, 2.0, 2.1, 5.0}) {
        const SampledPotential pot(1.0, {0.3});
        const cplx z(zr, 0.2);
        const auto ref = oracle::dirac_rk4(pot, 1.0, z, 4000);
        const Mat2 m = cell_propagator(0.3, 1.0, z);
        CHECK(dist(m, ref[0], ref[1], ref[2], ref[3]) < 1e-12);
    }
}

TEST_CASE("free transfer matrix is a rotation") {
    const auto pot = constant(0.0, 3.0);
    for (double t : {0.5, 1.7, 3.0}) {
        for (double x : {-4.0, 0.3, 2.5}) {
            const Mat2 m = transfer(pot, t, x).matrix();
            CHECK(dist(m, std::cos(t * x), -std::sin(t * x), std::sin(t * x), std::cos(t * x)) < 1e-13);
        }
    }
}

TEST_CASE("long runs of equal cells keep full relative accuracy") {
    // 1600 identical cells: rounding of a double cell factor alone would leave ~3e-13
    const auto pot = constant(0.0, 16.0);
    for (const cplx z : {cplx(0.2, -0.25), cplx(3.7, 0.25), cplx(-11.0, 0.1)}) {
        const Mat2 m = transfer(pot, 16.0, z).matrix();
        const cplx c = std::cos(16.0 * z), s = std::sin(16.0 * z);
        CHECK(dist(m, c, -s, s, c) < 2e-15 * std::max(std::abs(c), std::abs(s)));
    }
    const auto q = constant(0.7, 16.0);
    const cplx z(1.3, 0.2);
    const cplx l = std::sqrt(cplx(0.49) - z * z);
    const cplx ch = std::cosh(16.0 * l), sh = std::sinh(16.0 * l) / l;
    CHECK(dist(transfer(q, 16.0, z).matrix(), ch + 0.7 * sh, -z * sh, z * sh, ch - 0.7 * sh) < 1e-14 * std::abs(ch));
}

TEST_CASE("opposite constant cells cancel at z = 0") {
    const SampledPotential pot(1.0, {1.0, -1.0});
    CHECK(dist(transfer(pot, 2.0, 0.0).matrix(), 1.0, 0.0, 0.0, 1.0) < 1e-15);
}

TEST_CASE("constant potential at z = 0 against the RK oracle") {
    const auto pot = constant(1.0, 1.0);
    const TransferMatrix m = transfer(pot, 1.0, 0.0);
    CHECK(std::abs(m.A() - e) < 1e-13);
    CHECK(std::abs(m.D() - 1.0 / e) < 1e-13);
    const auto ref = oracle::dirac_rk4(pot, 1.0, 0.0);
    CHECK(std::abs(m.A() - ref[0]) < 1e-12);
    CHECK(std::abs(m.D() - ref[3]) < 1e-12);
}

TEST_CASE("transfer matches the RK oracle on random potentials") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pot = random_piecewise(seed, 0.05, 1.0, 3.0, 2.0);
        const cplx z(0.7 * static_cast<double>(seed) - 3.0, 0.1 * static_cast<double>(seed % 4));
        const auto ref = oracle::dirac_rk4(pot, pot.T(), z, 100);
        const Mat2 m = transfer(pot, pot.T(), z).matrix();
        CHECK(dist(m, ref[0], ref[1], ref[2], ref[3]) < 1e-9 * (1.0 + std::abs(ref[0])));
    }
}

TEST_CASE("det M = 1 and Wronskian = 2i on random potentials") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const auto pot = random_piecewise(seed, 0.01, 1.0, 10.0, 2.0);
        for (const cplx z : invariant_sample_points(seed)) {
            const TransferMatrix m = transfer(pot, pot.T(), z);
            CHECK(std::abs(m.det_minus_one()) <= 1e-12);
            CHECK(std::abs(hermite_biehler(m).wronskian - 2.0 * I) <= 1e-12);
        }
    }
}

TEST_CASE("time grid and partial cells") {
    const auto pot = random_piecewise(7, 0.1, 2.0, 2.0, 1.0);
    const cplx z(1.3, 0.4);
    const std::vector<double> times = {0.0, 0.05, 0.55, 1.0, 1.99};
    const auto ms = transfer_at_times(pot, times, z);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const Mat2 a = ms[k].matrix();
        const Mat2 b = transfer(pot, times[k], z).matrix();
        CHECK(dist(a, b.a, b.b, b.c, b.d) < 1e-14);
        const auto ref = oracle::dirac_rk4(pot, times[k], z, 400);
        CHECK(dist(a, ref[0], ref[1], ref[2], ref[3]) < 1e-11);
    }
}

TEST_CASE("transfer_between equals M(t2) M(t1)^-1") {
    const auto pot = random_piecewise(3, 0.01, 3.0, 3.0, 1.5);
    const cplx z(-0.8, 0.5);
    const double t1 = 0.737, t2 = 2.41;
    const Mat2 m1 = transfer(pot, t1, z).matrix();
    const Mat2 m2 = transfer(pot, t2, z).matrix();
    // adjugate is the inverse since det = 1
    const cplx a = m2.a * m1.d - m2.b * m1.c;
    const cplx b = -m2.a * m1.b + m2.b * m1.a;
    const cplx c = m2.c * m1.d - m2.d * m1.c;
    const cplx d = -m2.c * m1.b + m2.d * m1.a;
    CHECK(dist(transfer_between(pot, t1, t2, z).matrix(), a, b, c, d) < 1e-9);
}

TEST_CASE("z-derivatives against central differences") {
    auto fd_check = [](const SampledPotential& pot, double t, cplx z) {
        const double h = 1e-5;
        const AugmentedTransfer aug = transfer_derivative(pot, t, z, 2);
        const Mat2 p = transfer(pot, t, z + h).matrix();
        const Mat2 m = transfer(pot, t, z - h).matrix();
        const Mat2 c = aug.m.matrix();
        CHECK(dist(aug.dM, (p.a - m.a) / (2 * h), (p.b - m.b) / (2 * h), (p.c - m.c) / (2 * h),
                   (p.d - m.d) / (2 * h)) < 1e-7);
        // second derivative against differences of the (already checked) first derivative
        const double h2 = 1e-4;
        const Mat2 dp = transfer_derivative(pot, t, z + h2, 1).dM;
        const Mat2 dm = transfer_derivative(pot, t, z - h2, 1).dM;
        CHECK(dist(*aug.d2M, (dp.a - dm.a) / (2 * h2), (dp.b - dm.b) / (2 * h2), (dp.c - dm.c) / (2 * h2),
                   (dp.d - dm.d) / (2 * h2)) < 1e-6);
    };
    fd_check(constant(0.0, 2.0), 2.0, 1.1);
    fd_check(constant(1.0, 2.0), 2.0, cplx(0.5, 0.2));
    fd_check(random_piecewise(11, 0.01, 2.0, 2.0, 2.0), 1.5, cplx(-2.0, 0.3));

    const AugmentedTransfer at0 = transfer_derivative(constant(1.0, 2.0), 0.0, cplx(0.5, 0.2), 1);
    CHECK(dist(at0.dM, 0.0, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("Hermite-Biehler pair and theta") {
    const auto pot = random_piecewise(5, 0.01, 2.0, 4.0, 1.0);
    for (double x : {-3.0, -0.2, 0.0, 1.4}) {
        const TransferMatrix m = transfer(pot, pot.T(), x);
        const HermiteBiehlerPair hb = hermite_biehler(m);
        CHECK(std::abs(hb.Esharp - std::conj(hb.E)) < 1e-13);
        CHECK(std::abs(std::abs(theta(m)) - 1.0) < 1e-12);
    }
    const auto free = constant(0.0, 2.0);
    const cplx z(0.8, 0.3);
    CHECK(std::abs(theta(transfer(free, 2.0, z)) - std::exp(2.0 * I * 2.0 * z)) < 1e-13);
    const auto c = constant(0.7, 3.0);
    for (double t : {0.5, 1.0, 3.0}) CHECK(std::abs(theta(transfer(c, t, 0.0)) - 1.0) < 1e-14);
}

TEST_CASE("theta derivatives match differences of theta") {
    const auto pot = random_piecewise(9, 0.01, 2.0, 2.0, 1.0);
    const cplx z(0.9, 0.4);
    const ThetaDerivatives td = theta_derivs(transfer_derivative(pot, 2.0, z, 2));
    const double h = 1e-5;
    const cplx fd = (theta(transfer(pot, 2.0, z + h)) - theta(transfer(pot, 2.0, z - h))) / (2 * h);
    CHECK(std::abs(td.theta_z - fd) < 1e-7);
}

TEST_CASE("growth guard and corruption hook") {
    const auto pot = constant(0.0, 10.0);
    CHECK_THROWS_AS(transfer(pot, 10.0, cplx(0.0, 6.0)), OverflowError);

    const auto c = constant(1.0, 2.0);
    debug::set_cell_corruption(1e-3);
    CHECK_THROWS_AS(transfer(c, 2.0, cplx(0.5, 0.1)), InvariantViolation);
    debug::set_cell_corruption(0.0);
    CHECK_NOTHROW(transfer(c, 2.0, cplx(0.5, 0.1)));
}
