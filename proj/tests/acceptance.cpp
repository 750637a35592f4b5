// Acceptance suite. `acceptance N` runs criterion N, `acceptance` runs all of
// them. Each criterion prints one PASS/FAIL line; the exit status is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nlft/debranges.hpp"
#include "nlft/experiments.hpp"
#include "nlft/parallel.hpp"
#include "nlft/resonance.hpp"
#include "nlft/riccati.hpp"
#include "nlft/scattering.hpp"
#include "oracles.hpp"

using namespace nlft;

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SampledPotential constant(double q, double T, double h = 0.01) {
    return sample_function([q](double) { return q; }, h, T);
}

SampledPotential random_suite_potential(std::uint64_t k) { return random_piecewise(1000 + k, 0.01, 1.0, 10.0, 2.0); }

/// max over the 200-potential suite of a per-(potential, z) defect.
double suite_max(const std::function<double(const SampledPotential&, cplx)>& defect, bool real_only) {
    std::vector<double> worst(200, 0.0);
    parallel_for(200, [&](std::size_t k) {
        const auto pot = random_suite_potential(k);
        for (const cplx z : invariant_sample_points(k)) {
            if (real_only && z.imag() != 0.0) continue;
            worst[k] = std::max(worst[k], defect(pot, z));
        }
    });
    return *std::max_element(worst.begin(), worst.end());
}

Outcome determinant_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    const double m = suite_max(
        [](const SampledPotential& p, cplx z) { return std::abs(transfer(p, p.T(), z).det_minus_one()); }, false);
    const double secs = seconds_since(t0);
    return {m <= 1e-10 && secs < 30.0, "max |det M - 1| = " + fmt("%.3e", m) + ", " + fmt("%.1f s", secs)};
}

Outcome wronskian_identity() {
    const double m = suite_max(
        [](const SampledPotential& p, cplx z) {
            return std::abs(hermite_biehler(transfer(p, p.T(), z)).wronskian - 2.0 * I);
        },
        false);
    return {m <= 1e-10, "max |det[[E, E~], [E#, E~#]] - 2i| = " + fmt("%.3e", m)};
}

Outcome unimodular_scattering() {
    const double m = suite_max(
        [](const SampledPotential& p, cplx z) { return scattering_point(p, p.T(), z).unimodular_defect; }, true);
    return {m <= 1e-10, "max ||a|^2 - |b|^2 - 1| on R = " + fmt("%.3e", m)};
}

Outcome free_case() {
    const double T = 5.0;
    const auto pot = constant(0.0, T);
    std::vector<cplx> grid;
    for (int k = 0; k < 81; ++k) grid.emplace_back(-20.0 + 0.5 * k, 0.0);
    for (int k = 0; k < 16; ++k) grid.emplace_back(-4.0 + 0.5 * k, 0.125 * (k - 8));
    double ab = 0.0, th = 0.0, ks = 0.0;
    for (const cplx z : grid) {
        const ScatteringPoint p = scattering_point(pot, T, z);
        ab = std::max({ab, std::abs(p.a - 1.0), std::abs(p.b)});
        // |theta| reaches e^{2T|Im z|} below the axis, where only relative accuracy is representable
        const cplx exact = std::exp(2.0 * I * T * z);
        th = std::max(th, std::abs(theta(transfer(pot, T, z)) - exact) / std::max(1.0, std::abs(exact)));
    }
    for (std::size_t i = 0; i < grid.size(); i += 7) {
        for (std::size_t j = 0; j < grid.size(); j += 5) {
            ks = std::max(ks, std::abs(kernel_K(pot, T, grid[i], grid[j]) - kernel_sinc(T, grid[i], grid[j])));
        }
    }
    const double m = std::max({ab, th, ks});
    return {m <= 1e-12, "a-1, b: " + fmt("%.2e", ab) + "; theta: " + fmt("%.2e", th) + "; K-S: " + fmt("%.2e", ks)};
}

Outcome constant_closed_form() {
    const auto pot = constant(1.0, 1.0);
    const ScatteringPoint p = scattering_point(pot, 1.0, 0.0);
    const double e_closed = std::max(std::abs(p.a - std::cosh(1.0)), std::abs(p.b - std::sinh(1.0)));
    // cross-oracle: RK4 on the Dirac system, a = (A + D)/2 and b = (A - D)/2 at z = 0
    const auto X = oracle::dirac_rk4(pot, 1.0, 0.0, 2000);
    const double e_rk = std::max(std::abs(0.5 * (X[0] + X[3]) - std::cosh(1.0)),
                                 std::abs(0.5 * (X[0] - X[3]) - std::sinh(1.0)));
    const double e_cross = std::max(std::abs(0.5 * (X[0] + X[3]) - p.a), std::abs(0.5 * (X[0] - X[3]) - p.b));
    return {e_closed <= 1e-10 && e_rk <= 1e-10 && e_cross <= 1e-10,
            "closed form " + fmt("%.2e", e_closed) + ", RK oracle " + fmt("%.2e", e_rk) + ", cross " +
                fmt("%.2e", e_cross)};
}

Outcome riccati_cross_method() {
    struct Triple {
        SampledPotential pot;
        cplx z;
        double t;
    };
    std::vector<Triple> triples;
    std::mt19937_64 rng(6);
    for (int k = 0; k < 50; ++k) {
        auto pot = random_piecewise(6000 + k, 0.01, 1.0, 10.0, 2.0);
        const cplx z(10.0 * unit_uniform(rng) - 5.0, unit_uniform(rng));
        const double t = pot.T() * (0.5 + 0.5 * unit_uniform(rng));
        triples.push_back({std::move(pot), z, t});
    }
    std::vector<double> e1(50), e2(50), e3(50);
    parallel_for(50, [&](std::size_t k) {
        const auto& tr = triples[k];
        const cplx ref = riccati_evolve_moebius(tr.pot, tr.z, tr.t).theta;
        e1[k] = std::abs(riccati_evolve_rk(tr.pot, tr.z, tr.t, 1e-3).theta - ref);
        e2[k] = std::abs(riccati_evolve_rk(tr.pot, tr.z, tr.t, 1e-2).theta - ref);
        e3[k] = std::abs(riccati_evolve_rk(tr.pot, tr.z, tr.t, 5e-3).theta - ref);
    });
    const double worst = *std::max_element(e1.begin(), e1.end());
    const double order = std::log2(*std::max_element(e2.begin(), e2.end()) / *std::max_element(e3.begin(), e3.end()));
    return {worst <= 1e-6 && order >= 3.5,
            "max |theta_moebius - theta_rk| = " + fmt("%.2e", worst) + " at dt=1e-3, observed order " +
                fmt("%.2f", order)};
}

Outcome parseval() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(7);
    double worst = 0.0, worst_norm = 0.0, worst_iv = 0.0, worst_iv_norm = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double L = 1.0 + 2.0 * unit_uniform(rng);
        const double mass = 0.05 + 1.95 * unit_uniform(rng);
        const double q = std::sqrt(mass / (3.0 * L / 8.0));  // ||q sin^2(pi t/L)||^2 = 3 L q^2 / 8
        const auto pot = sample_function([=](double t) { return q * std::pow(std::sin(pi * t / L), 2); }, 0.01, L);
        const ParsevalReport r = parseval_check(pot, L, 1e-2);
        worst = std::max(worst, r.rel_err);
        worst_norm = std::max(worst_norm, r.normalized_rel_err);

        const double a = L * 0.8 * unit_uniform(rng);
        const double b = a + (L - a) * (0.2 + 0.8 * unit_uniform(rng));
        const ParsevalReport ri = interval_parseval_check(pot, a, b, 1e-2);
        worst_iv = std::max(worst_iv, ri.rel_err);
        worst_iv_norm = std::max(worst_iv_norm, ri.normalized_rel_err);
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-2 && worst_iv <= 1e-2 && secs < 120.0,
            "rel_err full " + fmt("%.3e", worst) + ", interval " + fmt("%.3e", worst_iv) +
                " (with pi/2 normalization: " + fmt("%.2e", worst_norm) + ", " + fmt("%.2e", worst_iv_norm) + "), " +
                fmt("%.1f s", secs)};
}

Outcome resonance_dynamics() {
    const auto pot = constant(1.0, 3.5);
    const ThetaZero start = newton_theta_zero(pot, 3.0, cplx(1.3477, 0.0842));
    const ResonanceTrack track = track_resonance(pot, start.z, 3.0, 3.2, 1e-3);
    double v = 0.0, arg = 0.0, res = 0.0;
    const auto& s = track.samples;
    for (std::size_t k = 0; k < s.size(); ++k) res = std::max(res, s[k].residual);
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const cplx fd = (s[k + 1].z - s[k - 1].z) / (s[k + 1].t - s[k - 1].t);
        const cplx pred = -pot.value(s[k].t) / s[k].theta_z;
        v = std::max(v, std::abs(fd - pred) / std::abs(pred));
        const cplx dtz = (s[k + 1].theta_z - s[k - 1].theta_z) / (s[k + 1].t - s[k - 1].t);
        const cplx rate = 2.0 * I * s[k].z * s[k].theta_z - pot.value(s[k].t) * s[k].theta_zz / s[k].theta_z;
        arg = std::max(arg, std::abs(dtz - rate) / std::abs(rate));
    }
    const bool ok = track.status == TrackStatus::completed && v <= 0.02 && res <= 1e-9 && arg <= 0.05;
    return {ok, std::to_string(s.size()) + " samples, velocity rel err " + fmt("%.2e", v) + ", max |theta| " +
                    fmt("%.2e", res) + ", theta_z rate rel err " + fmt("%.2e", arg) + ", status " +
                    to_string(track.status)};
}

Outcome eigenvalue_monotonicity() {
    std::vector<int> tracks(20, 0), violations(20, 0), incomplete(20, 0);
    parallel_for(20, [&](std::size_t k) {
        const auto pot = random_piecewise(9000 + k, 0.01, 5.0, 5.0, 2.0);
        for (const EigenKind kind : {EigenKind::NN, EigenKind::ND}) {
            for (const double x : find_eigenvalues(pot, 3.0, kind, -5.0, 5.0)) {
                if (std::abs(x) < 1e-9) continue;  // the fixed eigenvalue at 0
                const EigenTrack tr = track_eigenvalue(pot, kind, x, 3.0, 4.0, 1e-2);
                ++tracks[k];
                if (tr.status != TrackStatus::completed) ++incomplete[k];
                for (std::size_t j = 1; j < tr.samples.size(); ++j) {
                    const double a = tr.samples[j - 1].x, b = tr.samples[j].x;
                    if (!(a > 0 ? b < a : b > a)) ++violations[k];
                }
            }
        }
    });
    int nt = 0, nv = 0, ni = 0;
    for (int k = 0; k < 20; ++k) {
        nt += tracks[k];
        nv += violations[k];
        ni += incomplete[k];
    }
    return {nv == 0 && nt > 0, std::to_string(nt) + " tracks, " + std::to_string(nv) +
                                   " non-monotone steps, " + std::to_string(ni) + " tracks stopped early"};
}

Outcome compact_support_convergence() {
    const auto pot = sample_function([](double t) { return t < 2.0 ? 0.8 * std::sin(3.0 * t) + 0.2 : 0.0; }, 0.01, 8.0);
    const ConvergenceTable t = run_convergence(pot, seeded_uniform(10, 10, -5.0, 5.0), {2.0, 4.0, 8.0}, 4.0, 16, 10);
    double worst = 0.0;
    bool failures = false;
    for (std::size_t i = 0; i < t.s_list.size(); ++i) {
        for (std::size_t j = 0; j < t.T_list.size(); ++j) {
            worst = std::max(worst, t.cauchy_err[i][j]);
            failures = failures || !t.failure[i][j].empty();
        }
    }
    const double gap = universality_gap(constant(0.0, 16.0), 0.3, 16.0, 4.0, 1.0);
    return {!failures && worst <= 1e-12 && gap <= 1e-12,
            "max |r_T - r_8| on boxes for T >= 2: " + fmt("%.2e", worst) + "; free gap " + fmt("%.2e", gap)};
}

Outcome universality_trend() {
    const auto pot = sample_function([](double t) { return t < 1.0 ? 0.3 : 0.0; }, 0.01, 64.0);
    const double s = 0.7, C = 2.0;
    const double w = estimate_w(pot, s, 2.0, 64.0, 16).w_hat;
    const std::vector<double> ts = {8.0, 16.0, 32.0, 64.0};
    std::vector<double> g16(ts.size()), g24(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        g16[k] = universality_gap(pot, s, ts[k], C, w, 16);
        g24[k] = universality_gap(pot, s, ts[k], C, w, 24);
    }
    bool ok = true;
    double refine = 0.0;
    std::string gaps;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0) ok = ok && g16[k] <= 1.1 * g16[k - 1];
        refine = std::max(refine, std::abs(g24[k] - g16[k]) / g16[k]);
        gaps += fmt("%.4f ", g16[k]);
    }
    return {ok && refine < 0.05, "gap(t=8,16,32,64) = " + gaps + "; grid 16->24 rel change " + fmt("%.2e", refine)};
}

Outcome limit_identities_check() {
    std::vector<SampledPotential> fixtures = {
        sample_function([](double t) { return t < 1.0 ? 0.3 : 0.0; }, 0.01, 6.0),
        sample_function([](double t) { return t < 1.5 ? std::sin(3.0 * t) : 0.0; }, 0.01, 6.0),
        extend_with_zeros(random_piecewise(12, 0.01, 2.0, 2.0, 2.0), 6.0),
    };
    double match = 0.0, algebra = 0.0, ac = 0.0;
    for (const auto& pot : fixtures) {
        for (double s : {-3.0, -0.5, 0.0, 0.8, 2.2}) {
            const LimitReport r = limit_identities(pot, s, 3.0, 6.0);
            match = std::max({match, std::abs(r.abs_a_pred - r.abs_a_obs), std::abs(r.abs_b_pred - r.abs_b_obs),
                              std::abs(r.abs_E_pred - r.abs_E_obs), std::abs(r.abs_Etilde_pred - r.abs_Etilde_obs)});
            algebra = std::max(algebra, std::abs(r.abs_a_pred * r.abs_a_pred - r.abs_b_pred * r.abs_b_pred - 1.0));
            ac = std::max(ac, std::sqrt(r.w_hat * r.w_tilde_hat));
        }
    }
    return {match <= 1e-9 && algebra <= 1e-12 && ac <= 1.0 + 1e-9,
            "pred vs obs " + fmt("%.2e", match) + ", |a|^2-|b|^2-1 " + fmt("%.2e", algebra) + ", max sqrt(w w~) " +
                fmt("%.6f", ac)};
}

Outcome hilbert_pair() {
    const auto pot = sample_function([](double t) { return t < 1.0 ? 0.5 : 0.0; }, 0.01, 1.0);
    auto residual = [&pot](double X, int n) {
        std::vector<cplx> grid(n);
        for (int k = 0; k < n; ++k) grid[k] = cplx(-X + 2.0 * X * k / (n - 1.0), 0.0);
        return hilbert_consistency(nlft_forward(pot, 1.0, grid)).residual;
    };
    const double r1 = residual(80.0, 1 << 14);
    const double r2 = residual(160.0, 1 << 15);
    // "halving": the doubled domain must cut the residual to 1/2 within 10%
    return {r1 <= 1e-2 && r2 <= 0.55 * r1,
            "residual " + fmt("%.3e", r1) + " on [-80,80], " + fmt("%.3e", r2) + " on [-160,160], ratio " +
                fmt("%.3f", r2 / r1)};
}

Outcome cauchy_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    PotentialSpec spec;
    spec.family = Family::powerlaw;
    spec.params = {{"q", 0.5}, {"p", 0.75}};
    const auto pot = sample(spec, 0.01, 800.0);
    const std::vector<double> Ts = {50.0, 100.0, 200.0, 400.0, 800.0};
    const ConvergenceTable t = run_convergence(pot, seeded_uniform(14, 20, -5.0, 5.0), Ts, 4.0, 8, 14);
    std::string meds;
    for (std::size_t j = 0; j < Ts.size(); ++j) meds += fmt("%.2e ", t.median_err(j));
    const double secs = seconds_since(t0);
    return {t.median_err(3) < t.median_err(0) && secs < 600.0,
            "median e(s,T) for T=50..800: " + meds + fmt("(%.0f s)", secs)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    {"determinant identity", determinant_identity},
    {"Wronskian identity", wronskian_identity},
    {"unimodular scattering", unimodular_scattering},
    {"free case exactness", free_case},
    {"constant potential closed form", constant_closed_form},
    {"Riccati cross-method", riccati_cross_method},
    {"Parseval", parseval},
    {"resonance dynamics", resonance_dynamics},
    {"NN/ND monotonicity", eigenvalue_monotonicity},
    {"compact-support convergence", compact_support_convergence},
    {"universality trend", universality_trend},
    {"limit identities", limit_identities_check},
    {"Hilbert pair", hilbert_pair},
    {"decaying-potential Cauchy trend", cauchy_trend},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
    if (selected.empty()) {
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
    }
    bool all = true;
    for (const int n : selected) {
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "no criterion %d\n", n);
            return 2;
        }
        Outcome o;
        try {
            o = criteria[n - 1].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s: %s | %s\n", n, o.pass ? "PASS" : "FAIL", criteria[n - 1].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
