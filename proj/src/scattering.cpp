#include "nlft/scattering.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "nlft/parallel.hpp"

namespace nlft {

namespace {

using compensated::CDD;
using compensated::DD;

DD abs_sq(const CDD& w) { return w.re * w.re + w.im * w.im; }

ScatteringPoint assemble(const TransferMatrix& m, double length) {
    const auto& x = m.extended();
    const cplx z = m.z();
    // E + iE~ = (A + D) + i(B - C),  E - iE~ = (A - D) - i(B + C)
    const CDD alpha = (x.a + x.d) + compensated::times_i(x.b - x.c);
    const CDD beta = (x.a - x.d) - compensated::times_i(x.b + x.c);
    const cplx phase = std::exp(cplx(0.0, 1.0) * length * z);

    ScatteringPoint p;
    p.z = z;
    p.a = 0.5 * phase * alpha.value();
    p.b = 0.5 * phase * beta.value();
    const double abs_a = std::abs(p.a);
    if (!(abs_a > std::numeric_limits<double>::min()) || !std::isfinite(abs_a)) {
        throw NumericalError("|a| is not a positive finite number at z = (" +
                             std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
    }
    p.r = p.b / p.a;
    p.det_defect = std::abs(m.det_minus_one());
    if (z.imag() == 0.0) {
        const DD a_sq_minus_one = abs_sq(alpha) * 0.25 - DD(1.0);
        p.log_abs_a = 0.5 * std::log1p(a_sq_minus_one.value());
        p.unimodular_defect = (a_sq_minus_one - abs_sq(beta) * 0.25).value();
    } else {
        p.log_abs_a = std::log(abs_a);
        p.unimodular_defect = std::numeric_limits<double>::quiet_NaN();
    }
    return p;
}

}  // namespace

ScatteringPoint scattering_point(const SampledPotential& pot, double T, cplx z) {
    if (!(T > 0.0) || T > pot.T()) throw RangeError("horizon T outside (0, pot.T]");
    return assemble(transfer(pot, T, z), T);
}

ScatteringData nlft_forward(const SampledPotential& pot, double T, std::span<const cplx> grid) {
    if (!(T > 0.0) || T > pot.T()) throw RangeError("horizon T outside (0, pot.T]");
    std::vector<ScatteringPoint> points(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) { points[k] = assemble(transfer(pot, T, grid[k]), T); });

    ScatteringData sd;
    sd.T = T;
    sd.grid.assign(grid.begin(), grid.end());
    for (const auto& p : points) {
        sd.a.push_back(p.a);
        sd.b.push_back(p.b);
        sd.r.push_back(p.r);
        sd.log_abs_a.push_back(p.log_abs_a);
        sd.unimodular_defect.push_back(p.unimodular_defect);
        sd.det_defect.push_back(p.det_defect);
    }
    return sd;
}

ScatteringPoint interval_scattering_point(const SampledPotential& pot, double t1, double t2, cplx z) {
    if (!(t1 >= 0.0) || !(t2 > t1) || t2 > pot.T()) {
        throw RangeError("interval must satisfy 0 <= t1 < t2 <= pot.T");
    }
    return assemble(transfer_between(pot, t1, t2, z), t2 - t1);
}

cplx interval_scattering(const SampledPotential& pot, double t1, double t2, cplx z) {
    return interval_scattering_point(pot, t1, t2, z).a;
}

namespace {

/// Composite Simpson rule on [lo, hi] by repeated halving of a trapezoid
/// sequence, until successive estimates differ by less than abs_tol.
double integrate_panel(const std::function<double(double)>& g, double lo, double hi,
                       double initial_step, double abs_tol) {
    auto n = static_cast<std::size_t>(std::ceil((hi - lo) / initial_step));
    n = std::max<std::size_t>(n, 8);
    double step = (hi - lo) / static_cast<double>(n);

    std::vector<double> values(n + 1);
    parallel_for(n + 1, [&](std::size_t k) { values[k] = g(lo + step * static_cast<double>(k)); });
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t k = 1; k < n; ++k) sum += values[k];
    double trapezoid = sum * step;
    double simpson = std::numeric_limits<double>::quiet_NaN();

    for (int level = 0; level < 12; ++level) {
        std::vector<double> mids(n);
        parallel_for(n, [&](std::size_t k) {
            mids[k] = g(lo + step * (static_cast<double>(k) + 0.5));
        });
        double mid_sum = 0.0;
        for (double v : mids) mid_sum += v;
        const double refined = 0.5 * trapezoid + 0.5 * step * mid_sum;
        const double next_simpson = (4.0 * refined - trapezoid) / 3.0;
        trapezoid = refined;
        n *= 2;
        step *= 0.5;
        if (std::abs(next_simpson - simpson) < abs_tol) return next_simpson;
        simpson = next_simpson;
    }
    throw NumericalError("Parseval panel quadrature did not converge on [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
}

void finish_report(ParsevalReport& rep) {
    if (rep.rhs > 0.0) {
        rep.rel_err = std::abs(rep.lhs - rep.rhs) / rep.rhs;
        const double scaled = rep.normalization * rep.rhs;
        rep.normalized_rel_err = std::abs(rep.lhs - scaled) / scaled;
    } else {
        rep.rel_err = 0.0;
        rep.normalized_rel_err = 0.0;
    }
}

}  // namespace

ParsevalReport interval_parseval_check(const SampledPotential& pot, double t1, double t2,
                                       double tol, const ParsevalOptions& options) {
    if (!(tol > 0.0)) throw ValidationError("Parseval tolerance must be positive");
    if (!(t1 >= 0.0) || !(t2 > t1) || t2 > pot.T()) {
        throw RangeError("interval must satisfy 0 <= t1 < t2 <= pot.T");
    }
    ParsevalReport rep;
    rep.rhs = l2_norm_sq(pot, t1, t2);
    if (rep.rhs == 0.0) {
        finish_report(rep);
        return rep;
    }

    const double length = t2 - t1;
    auto g = [&](double x) { return interval_scattering_point(pot, t1, t2, cplx(x, 0.0)).log_abs_a; };
    // log|a| oscillates with period about pi / length in x.
    const double step = std::min(0.25, std::numbers::pi / (4.0 * length));
    const double panel_tol = 0.05 * tol * rep.rhs;

    double X = options.initial_half_width > 0.0 ? options.initial_half_width
                                                : std::max(4.0, 8.0 / length);
    // log|a| is even in x for real f, so integrate over [0, X] and double.
    double half = integrate_panel(g, 0.0, X, step, panel_tol);
    rep.domain_half_width = X;
    for (int level = 1; level <= options.max_doublings; ++level) {
        const double shell = integrate_panel(g, X, 2.0 * X, step, panel_tol);
        half += shell;
        X *= 2.0;
        rep.domain_half_width = X;
        rep.refinement_levels = level;
        rep.lhs = 2.0 * half;
        if (2.0 * std::abs(shell) < tol * rep.rhs) {
            finish_report(rep);
            return rep;
        }
    }
    rep.lhs = 2.0 * half;
    finish_report(rep);
    throw ParsevalNonConvergence("Parseval tail did not fall below tol * rhs within " +
                                     std::to_string(options.max_doublings) + " domain doublings",
                                 rep);
}

ParsevalReport parseval_check(const SampledPotential& pot, double T, double tol,
                              const ParsevalOptions& options) {
    return interval_parseval_check(pot, 0.0, T, tol, options);
}

namespace {

/// Index from which unwrapping starts: the point x = 0, or for an even-sized
/// grid the first point right of 0 (the principal branch is continuous there
/// because a(0) > 0).
std::size_t centre_index(std::span<const double> x, bool require_zero) {
    if (x.size() < 3) throw ValidationError("grid needs at least three points");
    const double scale = std::max(std::abs(x.front()), std::abs(x.back()));
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (!(x[k] > x[k - 1])) throw ValidationError("grid must be strictly increasing");
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (std::abs(x[k] + x[x.size() - 1 - k]) > 1e-12 * scale) {
            throw ValidationError("grid must be symmetric about 0");
        }
    }
    const std::size_t mid = x.size() / 2;
    if (x.size() % 2 == 1 && std::abs(x[mid]) > 1e-12 * scale) {
        throw ValidationError("grid must contain x = 0");
    }
    if (x.size() % 2 == 0 && require_zero) throw ValidationError("grid must contain x = 0");
    return mid;
}

}  // namespace

std::vector<double> unwrap_arg_from_zero(std::span<const double> x_grid, std::span<const cplx> a) {
    if (a.size() != x_grid.size()) throw ValidationError("grid and values differ in length");
    const std::size_t mid = centre_index(x_grid, false);
    std::vector<double> arg(a.size(), 0.0);
    arg[mid] = std::arg(a[mid]);
    auto step = [&](std::size_t from, std::size_t to) {
        const double d = std::arg(a[to] / a[from]);
        if (std::abs(d) >= 0.5 * std::numbers::pi) {
            throw AliasingError("phase increment " + std::to_string(d) + " between x = " +
                                std::to_string(x_grid[from]) + " and " + std::to_string(x_grid[to]) +
                                " reaches pi/2; refine the grid");
        }
        arg[to] = arg[from] + d;
    };
    for (std::size_t k = mid; k + 1 < a.size(); ++k) step(k, k + 1);
    if (a.size() % 2 == 0) arg[mid - 1] = std::arg(a[mid - 1]);
    for (std::size_t k = a.size() % 2 == 0 ? mid - 1 : mid; k > 0; --k) step(k, k - 1);
    return arg;
}

std::vector<double> arg_a_branch(const SampledPotential& pot, double t1, double t2,
                                 std::span<const double> x_grid) {
    centre_index(x_grid, true);
    std::vector<cplx> a(x_grid.size());
    parallel_for(x_grid.size(), [&](std::size_t k) {
        a[k] = interval_scattering(pot, t1, t2, cplx(x_grid[k], 0.0));
    });
    return unwrap_arg_from_zero(x_grid, a);
}

namespace {
std::mutex fftw_planner_mutex;
}

std::vector<double> hilbert_transform(std::span<const double> values, int pad_factor) {
    if (pad_factor < 1) throw ValidationError("padding factor must be at least 1");
    const std::size_t n = values.size();
    std::size_t len = 1;
    while (len < n * static_cast<std::size_t>(pad_factor)) len *= 2;

    fftw_complex* buf = fftw_alloc_complex(len);
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    {
        const std::lock_guard lock(fftw_planner_mutex);
        forward = fftw_plan_dft_1d(static_cast<int>(len), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        backward = fftw_plan_dft_1d(static_cast<int>(len), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < len; ++k) {
        buf[k][0] = k < n ? values[k] : 0.0;
        buf[k][1] = 0.0;
    }
    fftw_execute(forward);
    // multiply by -i sgn(xi); the zero and Nyquist bins are dropped
    for (std::size_t k = 0; k < len; ++k) {
        const double re = buf[k][0];
        const double im = buf[k][1];
        if (k == 0 || 2 * k == len) {
            buf[k][0] = buf[k][1] = 0.0;
        } else if (2 * k < len) {
            buf[k][0] = im;
            buf[k][1] = -re;
        } else {
            buf[k][0] = -im;
            buf[k][1] = re;
        }
    }
    fftw_execute(backward);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k][0] / static_cast<double>(len);
    {
        const std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    fftw_free(buf);
    return out;
}

HilbertResult hilbert_consistency(const ScatteringData& sd, double edge_tol) {
    const std::size_t n = sd.grid.size();
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (sd.grid[k].imag() != 0.0) throw ValidationError("Hilbert check needs a real grid");
        x[k] = sd.grid[k].real();
    }
    centre_index(x, false);
    const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        if (std::abs(x[k] - x[k - 1] - dx) > 1e-9 * dx) throw ValidationError("grid must be uniform");
    }
    const double edge = std::max(std::abs(sd.log_abs_a.front()), std::abs(sd.log_abs_a.back()));
    if (edge > edge_tol) {
        throw DomainTooSmallError("log|a| = " + std::to_string(edge) +
                                  " at the grid ends exceeds " + std::to_string(edge_tol));
    }

    HilbertResult res;
    res.arg_a = unwrap_arg_from_zero(x, sd.a);
    res.hilbert_log_abs_a = hilbert_transform(sd.log_abs_a, 4);
    const double central = 0.5 * x.back();
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(x[k]) <= central) {
            res.residual = std::max(res.residual, std::abs(res.arg_a[k] - res.hilbert_log_abs_a[k]));
        }
    }
    return res;
}

}  // namespace nlft
