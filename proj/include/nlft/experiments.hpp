#pragma once

// Desk-scale convergence studies of r_T = b(T, .) / a(T, .) near real points,
// and the large-t limit identities for |a|, |b| and |E|.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "nlft/potential.hpp"
#include "nlft/propagator.hpp"

namespace nlft {

/// Deterministic sample of {|z - s| < radius, Im z >= 0}: n_real points on the
/// open real segment and n - n_real Halton points of the upper half-disc. The
/// seed shifts the Halton sequence.
std::vector<cplx> half_disc_samples(double s, double radius, int n, std::uint64_t seed = 0);

struct ConvergenceTable {
    std::vector<double> s_list;
    std::vector<double> T_list;
    double C = 0.0;
    double reference_T = 0.0;
    int box_samples = 0;
    std::uint64_t seed = 0;
    /// err[i][j] = sup over the box samples of |r_{T_j}(z) - r_ref(s_i)|.
    std::vector<std::vector<double>> err;
    /// cauchy_err[i][j] = sup over the same samples of |r_{T_j}(z) - r_ref(z)|.
    std::vector<std::vector<double>> cauchy_err;
    /// Non-empty where a numerical failure replaced the cell by NaN.
    std::vector<std::vector<std::string>> failure;

    /// Median of err over s for column j (NaN cells skipped).
    [[nodiscard]] double median_err(std::size_t j) const;
};

/// Reference horizon = max(T_list); it must not exceed pot.T().
ConvergenceTable run_convergence(const SampledPotential& pot, const std::vector<double>& s_list,
                                 const std::vector<double>& T_list, double C, int box_samples,
                                 std::uint64_t seed = 0);

struct LimitReport {
    double s = 0.0;
    double t_window_lo = 0.0;
    double t_window_hi = 0.0;
    double w_hat = 0.0;
    double w_tilde_hat = 0.0;
    double spread = 0.0;  // larger of the two estimate spreads
    bool conclusive = false;  // spread < 5%
    double abs_a_pred = 0.0;
    double abs_b_pred = 0.0;
    double abs_E_pred = 0.0;
    double abs_Etilde_pred = 0.0;
    double abs_a_obs = 0.0;
    double abs_b_obs = 0.0;
    double abs_E_obs = 0.0;
    double abs_Etilde_obs = 0.0;
};

/// Predictions |a| = sqrt(1/w + 1/w~ + 2)/2, |b| = sqrt(1/w + 1/w~ - 2)/2,
/// |E| = 1/sqrt(w) from estimate_w on the window, against the values observed
/// at the window end.
LimitReport limit_identities(const SampledPotential& pot, double s, double t_lo, double t_hi,
                             int n = 16);

/// Median ignoring NaN entries; NaN for an empty list.
double median(std::vector<double> values);

/// n seeded points uniform in [lo, hi), sorted.
std::vector<double> seeded_uniform(std::uint64_t seed, int n, double lo, double hi);

/// Sample set for the analytic identities: 64 equispaced real points of
/// [-20, 20] followed by 16 seeded points with |Re z| <= 20, 0 < |Im z| <= 2.
std::vector<cplx> invariant_sample_points(std::uint64_t seed);

}  // namespace nlft
