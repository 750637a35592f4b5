#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nlft/errors.hpp"
#include "nlft/experiments.hpp"
#include "nlft/resonance.hpp"

using namespace nlft;

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double pi = std::numbers::pi;

SampledPotential constant(double q, double T, double h = 0.01) {
    return sample_function([q](double) { return q; }, h, T);
}

bool contains(const std::vector<ThetaZero>& zs, cplx z, double tol) {
    return std::any_of(zs.begin(), zs.end(), [&](const ThetaZero& x) { return std::abs(x.z - z) < tol; });
}

}  // namespace

TEST_CASE("free theta has no zeros") {
    const auto pot = constant(0.0, 5.0);
    CHECK(find_zeros(pot, 5.0, Box{0.0, 3.0}).empty());
    CHECK(winding_number(pot, 5.0, -3.0, 3.0, 1e-12, 3.0) == 0);
    CHECK_THROWS_AS(track_resonance(pot, cplx(1.0, 0.5), 1.0, 2.0, 1e-2), PreconditionError);
}

TEST_CASE("zeros of theta for q = 1") {
    const auto pot = constant(1.0, 3.0);
    // Oracle: roots of cosh(lt) + (1 + iz) sinh(lt)/l (that is A + iC) by
    // mpmath.findroot at 30 digits.
    const auto z1 = find_zeros(pot, 1.0, Box{0.0, 6.0});
    CHECK(z1.size() == 4);
    for (cplx ref : {cplx(2.5788318525898572, 0.71488454167940745), cplx(5.5650837829057293, 1.1751698200896)}) {
        CHECK(contains(z1, ref, 1e-9));
        CHECK(contains(z1, -std::conj(ref), 1e-9));
    }
    for (const auto& z : z1) CHECK(z.residual <= zero_residual_tol);

    const auto z3 = find_zeros(pot, 3.0, Box{0.0, 2.0});
    CHECK(static_cast<int>(z3.size()) == winding_number(pot, 3.0, -2.0, 2.0, default_im_floor, 2.0, 64));
    CHECK(contains(z3, cplx(1.3477019392682694, 0.084182501847370069), 1e-9));
    CHECK(contains(z3, cplx(2.1403521210450468, 0.19953004102089468), 1e-9) == false);  // outside the box
}

TEST_CASE("zero sets are symmetric under z -> -conj z") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pot = random_piecewise(seed, 0.01, 3.0, 4.0, 1.5);
        const auto zs = find_zeros(pot, pot.T(), Box{0.0, 3.0});
        for (const auto& z : zs) CHECK(contains(zs, -std::conj(z.z), 1e-9));
    }
}

TEST_CASE("Newton polish reaches the zero") {
    const auto pot = constant(1.0, 1.0);
    const ThetaZero z = newton_theta_zero(pot, 1.0, cplx(2.5, 0.7));
    CHECK(std::abs(z.z - cplx(2.5788318525898572, 0.71488454167940745)) < 1e-12);
    CHECK(z.residual < 1e-12);
}

TEST_CASE("tracked resonance moves by z' = -f / theta_z") {
    const auto pot = constant(1.0, 3.5);
    const cplx z0(1.3477019392682694, 0.084182501847370069);
    const double dt = 1e-3;
    const ResonanceTrack track = track_resonance(pot, z0, 3.0, 3.2, dt);
    REQUIRE(track.status == TrackStatus::completed);
    REQUIRE(track.samples.size() > 100);
    double worst_v = 0.0, worst_arg = 0.0;
    for (std::size_t k = 1; k + 1 < track.samples.size(); ++k) {
        const auto& a = track.samples[k - 1];
        const auto& m = track.samples[k];
        const auto& b = track.samples[k + 1];
        CHECK(m.residual <= 1e-9);
        const cplx fd = (b.z - a.z) / (b.t - a.t);
        const cplx predicted = -1.0 / m.theta_z;
        worst_v = std::max(worst_v, std::abs(fd - predicted) / std::abs(predicted));
        // d theta_z / dt along the zero = 2iz theta_z - f theta_zz / theta_z
        const cplx dtz = (b.theta_z - a.theta_z) / (b.t - a.t);
        const cplx rate = 2.0 * I * m.z * m.theta_z - m.theta_zz / m.theta_z;
        worst_arg = std::max(worst_arg, std::abs(dtz - rate) / std::abs(rate));
    }
    CHECK(worst_v < 0.02);
    CHECK(worst_arg < 0.05);
}

TEST_CASE("resonance stands still where f vanishes") {
    const auto pot = sample_function([](double t) { return t < 1.0 ? 2.0 : 0.0; }, 0.01, 3.0);
    const auto zs = find_zeros(pot, 1.0, Box{0.0, 4.0});
    REQUIRE(!zs.empty());
    const ResonanceTrack track = track_resonance(pot, zs.front().z, 1.0, 2.0, 1e-2);
    for (const auto& s : track.samples) CHECK(std::abs(s.z - zs.front().z) < 1e-10);
}

TEST_CASE("NN eigenvalues") {
    const auto free = constant(0.0, 4.0);
    const auto xs = find_eigenvalues(free, 2.0, EigenKind::NN, -5.0, 5.0);
    REQUIRE(xs.size() == 7);  // pi k / 2, |k| <= 3
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK(std::abs(xs[k] - pi * (static_cast<double>(k) - 3.0) / 2.0) < 1e-12);

    const EigenTrack tr = track_eigenvalue(free, EigenKind::NN, pi / 2.0, 2.0, 3.0, 1e-2);
    for (const auto& s : tr.samples) CHECK(std::abs(s.x - pi / s.t) < 1e-9);

    // q = 1: C = x sin(k t)/k with k^2 = x^2 - 1, so x = sqrt(1 + (j pi / t)^2) and x = 0
    const auto c = constant(1.0, 4.0);
    const auto nn = find_eigenvalues(c, 3.0, EigenKind::NN, 0.0, 5.0);
    REQUIRE(nn.size() == 5);
    CHECK(std::abs(nn[0]) < 1e-12);
    for (int j = 1; j <= 4; ++j) CHECK(std::abs(nn[j] - std::sqrt(1.0 + std::pow(j * pi / 3.0, 2))) < 1e-10);
}

TEST_CASE("ND eigenvalues for q = 1") {
    // Oracle: roots of cos(3k) + sin(3k)/k, k = sqrt(x^2 - 1), by mpmath.findroot.
    const auto c = constant(1.0, 4.0);
    const auto nd = find_eigenvalues(c, 3.0, EigenKind::ND, 0.5, 5.0);
    const std::vector<double> ref = {1.2922928280685827, 2.0106285600458605, 2.9119358753543173, 3.8829900326219978,
                                     4.8845756308205222};
    REQUIRE(nd.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(nd[k] - ref[k]) < 1e-10);
}

TEST_CASE("eigenvalues flow monotonically toward zero") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto pot = random_piecewise(seed, 0.01, 4.0, 4.0, 1.0);
        for (EigenKind kind : {EigenKind::NN, EigenKind::ND}) {
            for (double x : find_eigenvalues(pot, 2.0, kind, -4.0, 4.0)) {
                if (std::abs(x) < 1e-9) continue;
                const EigenTrack tr = track_eigenvalue(pot, kind, x, 2.0, 2.5, 1e-2);
                CHECK(tr.monotone);
                for (std::size_t k = 1; k < tr.samples.size(); ++k) {
                    CHECK(std::abs(tr.samples[k].x) < std::abs(tr.samples[k - 1].x));
                }
            }
        }
    }
}

TEST_CASE("motion classification") {
    auto make = [](const std::vector<cplx>& steps) {
        ResonanceTrack tr;
        cplx z(0.0, 1.0);
        double t = 0.0;
        tr.samples.push_back({t, z, 1.0, 0.0, 0.0});
        for (cplx d : steps) {
            z += d;
            t += 1.0;
            tr.samples.push_back({t, z, 1.0, 0.0, 0.0});
        }
        return tr;
    };
    auto v = classify_track(make({cplx(0, -1), cplx(0, -1), cplx(0, -1)}));
    REQUIRE(v.size() == 1);
    CHECK(v[0].label == MotionLabel::V);
    CHECK(std::abs(v[0].mean_direction - cplx(0, -1)) < 1e-15);

    auto h = classify_track(make({cplx(1, 1), cplx(1, 1)}), 0.1, 0.5);
    REQUIRE(h.size() == 1);
    CHECK(h[0].label == MotionLabel::H);

    // a 30 degree step is unlabeled at tau_v = 0.1, tau_h = 0.6 and splits the track
    const cplx mid(std::sin(pi / 6), -std::cos(pi / 6));
    auto alt = classify_track(make({cplx(0, -1), mid, cplx(1, 0), mid, cplx(0, -1)}), 0.1, 0.6);
    REQUIRE(alt.size() == 3);
    CHECK(alt[0].label == MotionLabel::V);
    CHECK(alt[1].label == MotionLabel::H);
    CHECK(alt[2].label == MotionLabel::V);

    CHECK_THROWS_AS(classify_track(make({cplx(0, -1)})), ValidationError);
    CHECK_THROWS_AS(classify_track(make({cplx(0, -1), cplx(0, -1)}), 0.3, 0.2), ValidationError);
}

TEST_CASE("zero-free horizon") {
    const auto free = constant(0.0, 10.0);
    for (const auto& e : zero_free_horizon(free, 0.5, 2.0, {2.0, 4.0, 8.0})) CHECK(!e.has_zero);

    const auto c = constant(1.0, 3.0);
    const auto h = zero_free_horizon(c, 1.35, 2.0, {3.0});
    REQUIRE(h.size() == 1);
    CHECK(h[0].has_zero);
    CHECK(h[0].nearest_distance == doctest::Approx(std::abs(cplx(1.3477019392682694 - 1.35, 0.084182501847370069))));
}
