#include "nlft/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nlft/debranges.hpp"
#include "nlft/errors.hpp"
#include "nlft/parallel.hpp"
#include "nlft/scattering.hpp"

namespace nlft {

namespace {

double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double result = 0.0;
    double scale = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale /= static_cast<double>(base);
    }
    return result;
}

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<cplx> half_disc_samples(double s, double radius, int n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("need at least two box samples");
    if (!(radius > 0.0)) throw ValidationError("sample radius must be positive");
    const int n_real = n / 2;
    std::vector<cplx> pts;
    pts.reserve(n);
    for (int k = 1; k <= n_real; ++k) {
        pts.emplace_back(s - radius + 2.0 * radius * k / (n_real + 1.0), 0.0);
    }
    for (int k = 0; k < n - n_real; ++k) {
        const std::uint64_t index = seed * 1009 + static_cast<std::uint64_t>(k) + 1;
        const double r = radius * std::sqrt(radical_inverse(index, 2));
        const double phi = std::numbers::pi * radical_inverse(index, 3);
        pts.emplace_back(s + r * std::cos(phi), r * std::sin(phi));
    }
    return pts;
}

double median(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
                 values.end());
    if (values.empty()) return nan;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<double> seeded_uniform(std::uint64_t seed, int n, double lo, double hi) {
    if (n < 0 || !(hi > lo)) throw ValidationError("seeded_uniform needs n >= 0 and lo < hi");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = lo + (hi - lo) * unit_uniform(rng);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<cplx> invariant_sample_points(std::uint64_t seed) {
    std::vector<cplx> pts;
    for (int k = 0; k < 64; ++k) pts.emplace_back(-20.0 + 40.0 * k / 63.0, 0.0);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int k = 0; k < 16; ++k) {
        const double x = 40.0 * unit_uniform(rng) - 20.0;
        double y = 2.0 * (1.0 - unit_uniform(rng));  // (0, 2]
        if (k % 2 == 1) y = -y;
        pts.emplace_back(x, y);
    }
    return pts;
}

double ConvergenceTable::median_err(std::size_t j) const {
    std::vector<double> column;
    for (const auto& row : err) column.push_back(row.at(j));
    return median(column);
}

ConvergenceTable run_convergence(const SampledPotential& pot, const std::vector<double>& s_list,
                                 const std::vector<double>& T_list, double C, int box_samples,
                                 std::uint64_t seed) {
    if (s_list.empty() || T_list.empty()) throw ValidationError("s_list and T_list must be non-empty");
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    for (double T : T_list) {
        if (!(T > 0.0)) throw ValidationError("horizons must be positive");
    }
    ConvergenceTable table;
    table.s_list = s_list;
    table.T_list = T_list;
    table.C = C;
    table.box_samples = box_samples;
    table.seed = seed;
    table.reference_T = *std::max_element(T_list.begin(), T_list.end());
    if (table.reference_T > pot.T()) throw RangeError("reference horizon exceeds the potential length");

    const std::size_t ns = s_list.size();
    const std::size_t nt = T_list.size();
    table.err.assign(ns, std::vector<double>(nt, nan));
    table.cauchy_err.assign(ns, std::vector<double>(nt, nan));
    table.failure.assign(ns, std::vector<std::string>(nt));

    parallel_for(ns * nt, [&](std::size_t cell) {
        const std::size_t i = cell / nt;
        const std::size_t j = cell % nt;
        const double s = s_list[i];
        const double T = T_list[j];
        try {
            const cplx r_ref_s = scattering_point(pot, table.reference_T, cplx(s, 0.0)).r;
            double e = 0.0;
            double ce = 0.0;
            for (const cplx z : half_disc_samples(s, C / T, box_samples, seed)) {
                const cplx r = scattering_point(pot, T, z).r;
                const cplx r_ref = T == table.reference_T ? r : scattering_point(pot, table.reference_T, z).r;
                e = std::max(e, std::abs(r - r_ref_s));
                ce = std::max(ce, std::abs(r - r_ref));
            }
            table.err[i][j] = e;
            table.cauchy_err[i][j] = ce;
        } catch (const NumericalError& ex) {
            table.failure[i][j] = ex.what();
        }
    });
    return table;
}

LimitReport limit_identities(const SampledPotential& pot, double s, double t_lo, double t_hi, int n) {
    const WEstimate w = estimate_w(pot, s, t_lo, t_hi, n);
    LimitReport rep;
    rep.s = s;
    rep.t_window_lo = t_lo;
    rep.t_window_hi = t_hi;
    rep.w_hat = w.w_hat;
    rep.w_tilde_hat = w.w_tilde_hat;
    rep.spread = std::max(w.spread, w.w_tilde_spread);
    rep.conclusive = rep.spread < 0.05;

    const double x = 1.0 / w.w_hat + 1.0 / w.w_tilde_hat;
    rep.abs_a_pred = 0.5 * std::sqrt(x + 2.0);
    rep.abs_b_pred = 0.5 * std::sqrt(std::max(0.0, x - 2.0));
    rep.abs_E_pred = 1.0 / std::sqrt(w.w_hat);
    rep.abs_Etilde_pred = 1.0 / std::sqrt(w.w_tilde_hat);

    const TransferMatrix m = transfer(pot, t_hi, cplx(s, 0.0));
    const HermiteBiehlerPair hb = hermite_biehler(m);
    const ScatteringPoint sp = scattering_point(pot, t_hi, cplx(s, 0.0));
    rep.abs_a_obs = std::abs(sp.a);
    rep.abs_b_obs = std::abs(sp.b);
    rep.abs_E_obs = std::abs(hb.E);
    rep.abs_Etilde_obs = std::abs(hb.Etilde);
    return rep;
}

}  // namespace nlft
