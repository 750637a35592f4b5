#include "nlft/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "nlft/errors.hpp"

namespace nlft {

namespace {

using compensated::CDD;
using compensated::DD;
using compensated::Mat2DD;

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double drift_abort = 1e-8;
constexpr double series_window = 4.0;  // |mu h^2| at or below which power series are used

std::atomic<double> g_cell_corruption{0.0};

/// cosh(l h), sinh(l h)/l as functions of mu = l^2, with mu-derivatives.
struct EvenFunctions {
    cplx c, s;
    cplx c_mu, s_mu;
    cplx c_mumu, s_mumu;
};

EvenFunctions even_functions(cplx mu, double h, int order) {
    EvenFunctions r{};
    const cplx x = mu * (h * h);
    if (std::abs(x) <= series_window) {
        // c = sum x^k/(2k)!, s = h sum x^k/(2k+1)!
        // s_mu = h^3 sum_{k>=1} k x^{k-1}/(2k+1)!, s_mumu = h^5 sum_{k>=2} k(k-1) x^{k-2}/(2k+1)!
        cplx tc = 1.0, ts = 1.0, g = 1.0 / 6.0, e = 1.0 / 120.0;
        cplx sum_c = 0.0, sum_s = 0.0, sum_g = 0.0, sum_e = 0.0;
        for (int k = 0; k < 40; ++k) {
            sum_c += tc;
            sum_s += ts;
            if (k >= 1) sum_g += static_cast<double>(k) * g;
            if (k >= 2) sum_e += static_cast<double>(k * (k - 1)) * e;
            const double dk = 2.0 * k;
            tc *= x / ((dk + 1.0) * (dk + 2.0));
            ts *= x / ((dk + 2.0) * (dk + 3.0));
            if (k >= 1) g *= x / ((dk + 2.0) * (dk + 3.0));
            if (k >= 2) e *= x / ((dk + 2.0) * (dk + 3.0));
            if (k >= 3 && std::abs(tc) + std::abs(ts) + std::abs(g) * (k + 1) + std::abs(e) * (k + 1) * k <
                               1e-18 * (std::abs(sum_c) + std::abs(sum_s))) {
                break;
            }
        }
        r.c = sum_c;
        r.s = h * sum_s;
        if (order >= 1) r.s_mu = (h * h * h) * sum_g;
        if (order >= 2) r.s_mumu = (h * h * h * h * h) * sum_e;
    } else {
        const cplx lambda = std::sqrt(mu);
        r.c = std::cosh(lambda * h);
        r.s = std::sinh(lambda * h) / lambda;
        if (order >= 1) r.s_mu = (h * r.c - r.s) / (2.0 * mu);
        if (order >= 2) r.s_mumu = (0.5 * h * h * r.s - 3.0 * r.s_mu) / (2.0 * mu);
    }
    r.c_mu = 0.5 * h * r.s;
    r.c_mumu = 0.5 * h * r.s_mu;
    return r;
}

Mat2 combine(cplx ci, cplx sk, cplx sj, double q, cplx z) {
    // ci I + sk [[q, -z], [z, -q]] + sj [[0, -1], [1, 0]]
    return {ci + sk * q, -sk * z - sj, sk * z + sj, ci - sk * q};
}

struct Accumulator {
    Mat2DD M = Mat2DD::identity();
    Mat2DD dM = Mat2DD::zero();
    Mat2DD d2M = Mat2DD::zero();
    double budget = 0.0;

    // P_ext, when given, is f.P carried to double-double and replaces it in the M update
    void apply(const CellFactors& f, int order, const Mat2DD* P_ext = nullptr) {
        if (order >= 2) {
            const Mat2 twice_dP = cplx(2.0) * f.dP;
            d2M = f.d2P * M + twice_dP * dM + f.P * d2M;
        }
        if (order >= 1) dM = f.dP * M + f.P * dM;
        M = P_ext ? *P_ext * M : f.P * M;
        budget += 4.0 * eps * compensated::frobenius_sq(f.P);
    }
};

/// The cell factor in double-double. The width is halved until |mu w^2| <= 1/4,
/// the series are summed there, and c(2w) = 2c^2 - 1, s(2w) = 2sc doubles back.
Mat2DD cell_factor_ext(double q, double h, cplx z) {
    const CDD zz(z);
    const CDD mu = CDD(DD(q) * q, DD(0.0)) - zz * zz;
    const double mu_abs = std::abs(mu.value());
    double w = h;
    int halvings = 0;
    while (mu_abs * w * w > 0.25) {
        w *= 0.5;
        ++halvings;
    }
    const CDD x = mu * w * w;
    CDD tc(1.0), ts(1.0), c(0.0), s(0.0);
    for (int k = 0; k < 30; ++k) {
        c = c + tc;
        s = s + ts;
        const double dk = 2.0 * k;
        tc = tc * x / ((dk + 1.0) * (dk + 2.0));
        ts = ts * x / ((dk + 2.0) * (dk + 3.0));
        if (std::abs(tc.value()) + std::abs(ts.value()) < 1e-34) break;
    }
    s = s * w;
    for (int k = 0; k < halvings; ++k) {
        const CDD c2 = c * c * 2.0;
        s = s * c * 2.0;
        c = CDD(c2.re - DD(1.0), c2.im);
    }
    const CDD sq = s * q;
    const CDD sz = z * s;
    return {c + sq, CDD(-sz.re, -sz.im), sz, c - sq};
}

/// Cell factors with reuse across consecutive cells of equal (q, width). A
/// factor used more than once is also carried in double-double: its rounding
/// error would otherwise repeat coherently along the run of equal cells.
class CellCache {
public:
    CellCache(cplx z, int order) : z_(z), order_(order) {}

    const CellFactors& get(double q, double width) {
        if (!valid_ || q != q_ || width != width_) {
            factors_ = cell_factors(q, width, z_, order_);
            q_ = q;
            width_ = width;
            valid_ = true;
            has_ext_ = false;
        } else if (!has_ext_ && g_cell_corruption.load(std::memory_order_relaxed) == 0.0) {
            ext_ = cell_factor_ext(q, width, z_);
            has_ext_ = true;
        }
        return factors_;
    }

    [[nodiscard]] const Mat2DD* extended() const { return has_ext_ ? &ext_ : nullptr; }

private:
    cplx z_;
    int order_;
    bool valid_ = false;
    bool has_ext_ = false;
    double q_ = 0.0;
    double width_ = 0.0;
    CellFactors factors_{};
    Mat2DD ext_{};
};

void check_growth(cplx z, double length) {
    if (std::abs(z.imag()) * length > max_growth_exponent) {
        throw OverflowError("|Im z| * length = " + std::to_string(std::abs(z.imag()) * length) +
                            " exceeds the working range " + std::to_string(max_growth_exponent));
    }
}

double clamp_time(const SampledPotential& pot, double t, const char* what) {
    if (!(t >= 0.0) || t > pot.T() * (1.0 + 1e-12) + 1e-300) {
        throw RangeError(std::string(what) + " = " + std::to_string(t) + " outside [0, " +
                         std::to_string(pot.T()) + "]");
    }
    return std::min(t, pot.T());
}

void monitor_drift(const Accumulator& acc) {
    const double drift = std::abs(compensated::det_minus_one(acc.M));
    const double norm_sq = compensated::frobenius_sq(acc.M.value());
    const double allowed = drift_abort + 2.0 * acc.budget + 1e-28 * norm_sq;
    if (!(drift <= allowed)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "determinant drift |det M - 1| = %.3g exceeds the rounding budget %.3g",
                      drift, allowed);
        throw InvariantViolation(msg);
    }
}

Accumulator propagate(const SampledPotential& pot, double t1, double t2, cplx z, int order) {
    t1 = clamp_time(pot, t1, "t1");
    t2 = clamp_time(pot, t2, "t2");
    if (t1 > t2) throw RangeError("reversed propagation interval");
    check_growth(z, t2 - t1);

    Accumulator acc;
    CellCache cache(z, order);
    const auto cells = pot.cells();
    for (std::size_t j = pot.cell_index(t1); j < pot.size(); ++j) {
        const double start = pot.cell_start(j);
        if (start >= t2) break;
        const double end = start + pot.cell_width(j);
        double width = pot.cell_width(j);
        if (t1 > start) width -= t1 - start;
        if (t2 < end) width -= end - t2;
        if (width > 0.0) {
            const CellFactors& f = cache.get(cells[j], width);
            acc.apply(f, order, cache.extended());
        }
    }
    monitor_drift(acc);
    return acc;
}

}  // namespace

CellFactors cell_factors(double q, double h, cplx z, int order) {
    const cplx mu = q * q - z * z;
    const EvenFunctions e = even_functions(mu, h, order);
    CellFactors f{};
    f.P = combine(e.c, e.s, 0.0, q, z);
    if (order >= 1) {
        const cplx c_z = -2.0 * z * e.c_mu;
        const cplx s_z = -2.0 * z * e.s_mu;
        f.dP = combine(c_z, s_z, e.s, q, z);
        if (order >= 2) {
            const cplx c_zz = 4.0 * z * z * e.c_mumu - 2.0 * e.c_mu;
            const cplx s_zz = 4.0 * z * z * e.s_mumu - 2.0 * e.s_mu;
            f.d2P = combine(c_zz, s_zz, 2.0 * s_z, q, z);
        }
    }
    const double corruption = g_cell_corruption.load(std::memory_order_relaxed);
    if (corruption != 0.0) f.P.c *= 1.0 + corruption;
    return f;
}

Mat2 cell_propagator(double q, double h, cplx z) {
    if (h < 0.0) throw RangeError("cell width must be non-negative");
    return cell_factors(q, h, z, 0).P;
}

TransferMatrix transfer(const SampledPotential& pot, double t, cplx z) {
    return transfer_between(pot, 0.0, t, z);
}

TransferMatrix transfer_between(const SampledPotential& pot, double t1, double t2, cplx z) {
    const Accumulator acc = propagate(pot, t1, t2, z, 0);
    return {t2, z, acc.M};
}

std::vector<TransferMatrix> transfer_at_times(const SampledPotential& pot,
                                              std::span<const double> times, cplx z) {
    std::vector<TransferMatrix> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (times[k] < times[k - 1]) throw RangeError("times must be non-decreasing");
    }
    const double t_last = clamp_time(pot, times.back(), "t");
    clamp_time(pot, times.front(), "t");
    check_growth(z, t_last);

    Accumulator acc;
    CellCache cache(z, 0);
    const auto cells = pot.cells();
    std::size_t k = 0;
    for (std::size_t j = 0; j < pot.size() && k < times.size(); ++j) {
        const double start = pot.cell_start(j);
        const double width = pot.cell_width(j);
        const bool last_cell = j + 1 == pot.size();
        while (k < times.size() && (times[k] < start + width || last_cell)) {
            const double partial = std::min(times[k], pot.T()) - start;
            Accumulator here = acc;
            if (partial > 0.0) here.apply(cell_factors(cells[j], partial, z, 0), 0);
            monitor_drift(here);
            out.emplace_back(times[k], z, here.M);
            ++k;
        }
        const CellFactors& f = cache.get(cells[j], width);
        acc.apply(f, 0, cache.extended());
    }
    return out;
}

AugmentedTransfer transfer_derivative(const SampledPotential& pot, double t, cplx z, int order) {
    return transfer_derivative_between(pot, 0.0, t, z, order);
}

AugmentedTransfer transfer_derivative_between(const SampledPotential& pot, double t1, double t2,
                                              cplx z, int order) {
    if (order != 1 && order != 2) throw ValidationError("derivative order must be 1 or 2");
    const Accumulator acc = propagate(pot, t1, t2, z, order);
    AugmentedTransfer aug{TransferMatrix(t2, z, acc.M), acc.dM.value(), std::nullopt, acc.dM};
    if (order == 2) aug.d2M = acc.d2M.value();
    return aug;
}

HermiteBiehlerPair hermite_biehler(const TransferMatrix& m) {
    const auto& x = m.extended();
    // -i w and +i w for a double-double complex w
    auto minus_i = [](const CDD& w) { return CDD(w.im, -w.re); };
    const CDD E = x.a + minus_i(x.c);
    const CDD Et = x.b + minus_i(x.d);
    const CDD Es = x.a + compensated::times_i(x.c);
    const CDD Ets = x.b + compensated::times_i(x.d);
    const CDD w = E * Ets - Et * Es;
    return {E.value(), Et.value(), Es.value(), Ets.value(), w.value()};
}

namespace {

cplx ratio_checked(cplx num, cplx den, double scale, const char* what) {
    if (!(std::abs(den) > 1e-14 * scale) || !std::isfinite(std::abs(den))) {
        throw PoleProximityError(std::string(what) + ": denominator vanishes (zero of E at z)");
    }
    return num / den;
}

}  // namespace

// E# and E formed from the extended entries: |A|, |C| can exceed |A - iC| by e^{2t|Im z|}
cplx theta(const TransferMatrix& m) {
    const Mat2DD& x = m.extended();
    const CDD num = x.a + compensated::times_i(x.c);
    const CDD den = x.a - compensated::times_i(x.c);
    return ratio_checked(num.value(), den.value(), std::abs(m.A()) + std::abs(m.C()), "theta");
}

cplx theta_tilde(const TransferMatrix& m) {
    const Mat2DD& x = m.extended();
    const CDD num = x.b + compensated::times_i(x.d);
    const CDD den = x.b - compensated::times_i(x.d);
    return ratio_checked(num.value(), den.value(), std::abs(m.B()) + std::abs(m.D()), "theta_tilde");
}

ThetaDerivatives theta_derivs(const AugmentedTransfer& aug) {
    const cplx i(0.0, 1.0);
    const cplx A = aug.m.A(), C = aug.m.C();
    const Mat2DD& x = aug.m.extended();
    const cplx num = (x.a + compensated::times_i(x.c)).value();
    const cplx den = (x.a - compensated::times_i(x.c)).value();
    ThetaDerivatives d{};
    d.theta = ratio_checked(num, den, std::abs(A) + std::abs(C), "theta");
    const cplx dnum = aug.dM.a + i * aug.dM.c;
    const cplx dden = aug.dM.a - i * aug.dM.c;
    d.theta_z = (dnum - d.theta * dden) / den;
    if (aug.d2M) {
        const cplx d2num = aug.d2M->a + i * aug.d2M->c;
        const cplx d2den = aug.d2M->a - i * aug.d2M->c;
        d.theta_zz = (d2num - 2.0 * d.theta_z * dden - d.theta * d2den) / den;
    }
    return d;
}

namespace debug {

void set_cell_corruption(double relative) { g_cell_corruption.store(relative); }
double cell_corruption() { return g_cell_corruption.load(); }

}  // namespace debug

}  // namespace nlft
