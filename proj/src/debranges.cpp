#include "nlft/debranges.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nlft/errors.hpp"
#include "nlft/parallel.hpp"
#include "nlft/resonance.hpp"

namespace nlft {

namespace {

constexpr double pi = std::numbers::pi;
constexpr cplx I(0.0, 1.0);

/// A, C and their z-derivatives at one point.
struct NeumannJet {
    compensated::CDD A_ext, C_ext, dA_ext, dC_ext;
    cplx A, C, dA, dC, d2A, d2C;
};

NeumannJet neumann_jet(const SampledPotential& pot, double t, cplx z, int order) {
    NeumannJet j{};
    if (order == 0) {
        const TransferMatrix m = transfer(pot, t, z);
        j.A_ext = m.extended().a;
        j.C_ext = m.extended().c;
        j.A = m.A();
        j.C = m.C();
        return j;
    }
    const AugmentedTransfer aug = transfer_derivative(pot, t, z, 2);
    j.A_ext = aug.m.extended().a;
    j.C_ext = aug.m.extended().c;
    j.A = aug.m.A();
    j.C = aug.m.C();
    j.dA_ext = aug.dM_ext.a;
    j.dC_ext = aug.dM_ext.c;
    j.dA = aug.dM.a;
    j.dC = aug.dM.c;
    j.d2A = aug.d2M->a;
    j.d2C = aug.d2M->c;
    return j;
}

bool near_diagonal(cplx lambda, cplx z) {
    return std::abs(std::conj(lambda) - z) < 1e-6 * (1.0 + std::abs(z));
}

/// K from the jets at lambda (values only) and z (with derivatives when near).
/// A and C are real entire, so A(conj l) = conj(A(l)).
cplx kernel_from_jets(const NeumannJet& at_lambda, const NeumannJet& at_z, cplx lambda, cplx z) {
    const cplx u = std::conj(lambda);
    if (near_diagonal(lambda, z)) {
        const cplx first = (at_z.A_ext * at_z.dC_ext - at_z.C_ext * at_z.dA_ext).value();
        const cplx second = at_z.A * at_z.d2C - at_z.C * at_z.d2A;
        return first / pi + (u - z) * second / (2.0 * pi);
    }
    // numerator in extended precision: both products can exceed the difference by e^{2t|Im|}
    const auto conj_ext = [](const compensated::CDD& v) { return compensated::CDD(v.re, -v.im); };
    const cplx num = (at_z.A_ext * conj_ext(at_lambda.C_ext) - at_z.C_ext * conj_ext(at_lambda.A_ext)).value();
    return num / (pi * (u - z));
}

}  // namespace

cplx kernel_K(const SampledPotential& pot, double t, cplx lambda, cplx z) {
    const bool near = near_diagonal(lambda, z);
    const NeumannJet jz = neumann_jet(pot, t, z, near ? 2 : 0);
    const NeumannJet jl = near ? NeumannJet{} : neumann_jet(pot, t, lambda, 0);
    return kernel_from_jets(jl, jz, lambda, z);
}

cplx kernel_sinc(double t, cplx lambda, cplx z) {
    if (!(t > 0.0)) throw ValidationError("sinc kernel needs t > 0");
    const cplx w = z - std::conj(lambda);
    const cplx tw = t * w;
    if (std::abs(tw) < 1e-4) {
        const cplx x2 = tw * tw;
        return t / pi * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
    }
    return std::sin(tw) / (pi * w);
}

double gamma_fn(double p) {
    if (!(p > 0.0)) throw ValidationError("gamma(p) needs p > 0");
    return std::sqrt(2.0 / std::sinh(2.0 * p));
}

WEstimate estimate_w(const SampledPotential& pot, double s, double t_lo, double t_hi, int n) {
    if (n < 4) throw ValidationError("estimate_w needs at least 4 samples");
    if (!(t_lo >= 0.0) || !(t_hi > t_lo) || t_hi > pot.T()) {
        throw RangeError("window must lie within [0, pot.T] with t_lo < t_hi");
    }
    std::vector<double> times(n);
    for (int k = 0; k < n; ++k) times[k] = t_lo + (t_hi - t_lo) * k / (n - 1.0);
    times.back() = t_hi;
    const auto ms = transfer_at_times(pot, times, cplx(s, 0.0));

    auto summarize = [](const std::vector<double>& v, double& mean, double& spread) {
        double sum = 0.0;
        for (double x : v) sum += x;
        mean = sum / static_cast<double>(v.size());
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        spread = *hi / *lo - 1.0;
    };
    std::vector<double> inv_E, inv_Et;
    for (const auto& m : ms) {
        const HermiteBiehlerPair hb = hermite_biehler(m);
        inv_E.push_back(1.0 / std::norm(hb.E));
        inv_Et.push_back(1.0 / std::norm(hb.Etilde));
    }
    WEstimate w;
    w.samples = n;
    summarize(inv_E, w.w_hat, w.spread);
    summarize(inv_Et, w.w_tilde_hat, w.w_tilde_spread);
    return w;
}

std::vector<cplx> box_grid(double s, double half_width, int grid_n) {
    if (grid_n < 2) throw ValidationError("box grid needs at least 2 points per side");
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(grid_n) * grid_n);
    for (int i = 0; i < grid_n; ++i) {
        const double y = -half_width + 2.0 * half_width * i / (grid_n - 1.0);
        for (int j = 0; j < grid_n; ++j) {
            const double x = s - half_width + 2.0 * half_width * j / (grid_n - 1.0);
            pts.emplace_back(x, y);
        }
    }
    return pts;
}

KernelProbe kernel_probe(const SampledPotential& pot, double s, double t, double C, double w_hat,
                         int grid_n) {
    if (!(w_hat > 0.0)) throw ValidationError("w_hat must be positive");
    if (!(C > 0.0) || !(t > 0.0)) throw ValidationError("need t > 0 and C > 0");
    KernelProbe probe;
    probe.t = t;
    probe.s = s;
    probe.C = C;
    probe.w_hat = w_hat;
    probe.grid_n = grid_n;
    probe.points = box_grid(s, C / t, grid_n);
    const std::size_t n = probe.points.size();

    std::vector<NeumannJet> jets(n);
    parallel_for(n, [&](std::size_t k) { jets[k] = neumann_jet(pot, t, probe.points[k], 2); });

    probe.K_values.assign(n * n, 0.0);
    probe.S_values.assign(n * n, 0.0);
    std::vector<double> row_gap(n, 0.0);
    // K and S are Hermitian in (lambda, z): fill i <= j and mirror.
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            const cplx lam = probe.points[i];
            const cplx z = probe.points[j];
            const cplx K = kernel_from_jets(jets[i], jets[j], lam, z);
            const cplx S = kernel_sinc(t, lam, z);
            probe.K_values[i * n + j] = K;
            probe.S_values[i * n + j] = S;
            row_gap[i] = std::max(row_gap[i], std::abs(K - S / w_hat));
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            probe.K_values[i * n + j] = std::conj(probe.K_values[j * n + i]);
            probe.S_values[i * n + j] = std::conj(probe.S_values[j * n + i]);
        }
    }
    probe.gap = *std::max_element(row_gap.begin(), row_gap.end()) / t;
    return probe;
}

double universality_gap(const SampledPotential& pot, double s, double t, double C, double w_hat,
                        int grid_n) {
    return kernel_probe(pot, s, t, C, w_hat, grid_n).gap;
}

namespace {

/// sup over the box grid of |E(t, z) - model(z)|, and sup |E|.
template <typename Model>
std::pair<double, double> sup_deviation(const SampledPotential& pot, double t, double s, double half_width,
                                        int grid_n, Model model) {
    const auto pts = box_grid(s, half_width, grid_n);
    std::vector<double> dev(pts.size()), mag(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) {
        const cplx E = hermite_biehler(transfer(pot, t, pts[k])).E;
        dev[k] = std::abs(E - model(pts[k]));
        mag[k] = std::abs(E);
    });
    return {*std::max_element(dev.begin(), dev.end()), *std::max_element(mag.begin(), mag.end())};
}

}  // namespace

SineFit hb_sine_fit(const SampledPotential& pot, double s, double t, double C, int grid_n) {
    const auto zeros = find_zeros(pot, t, Box{s, C / t, 16});
    if (zeros.empty()) {
        throw PreconditionError("E(t, .) has no zero in Q(s, C/t); use the exponential fit");
    }
    const auto nearest = std::min_element(zeros.begin(), zeros.end(), [s](const ThetaZero& a, const ThetaZero& b) {
        return std::abs(a.z - s) < std::abs(b.z - s);
    });
    SineFit fit;
    fit.t = t;
    fit.s = s;
    fit.x = nearest->z.real();
    fit.y = nearest->z.imag();
    if (!(t * fit.y > 1.0)) {
        throw PreconditionError("sine model needs t y > 1 (t y = " + std::to_string(t * fit.y) + ")");
    }
    const cplx z_t(fit.x, -fit.y);
    const double g = gamma_fn(t * fit.y);
    const cplx E_s = hermite_biehler(transfer(pot, t, cplx(s, 0.0))).E;
    // model = kappa sin(t (z - z_t)) with kappa = alpha gamma / sqrt(w), pinned at z = s
    const cplx kappa = E_s / std::sin(t * (cplx(s, 0.0) - z_t));
    fit.alpha = kappa / std::abs(kappa);
    fit.w_used = std::pow(g / std::abs(kappa), 2);
    const auto [res, sup] = sup_deviation(pot, t, s, C / t, grid_n,
                                          [&](cplx z) { return kappa * std::sin(t * (z - z_t)); });
    fit.residual = res;
    fit.sup_abs_E = sup;
    return fit;
}

ExpFit hb_exp_fit(const SampledPotential& pot, double s, double t, double D, int grid_n) {
    if (!find_zeros(pot, t, Box{s, D / t, 16}).empty()) {
        throw PreconditionError("E(t, .) has a zero in Q(s, D/t); use the sine fit");
    }
    const cplx E_s = hermite_biehler(transfer(pot, t, cplx(s, 0.0))).E;
    // model = kappa e^{-itz} with kappa = -i alpha / sqrt(w) = E(t, s) e^{its}
    const cplx kappa = E_s * std::exp(I * t * s);
    ExpFit fit;
    fit.alpha = I * kappa / std::abs(kappa);
    fit.w_used = 1.0 / std::norm(kappa);
    const auto [res, sup] = sup_deviation(pot, t, s, D / t, grid_n,
                                          [&](cplx z) { return kappa * std::exp(-I * t * z); });
    fit.residual = res;
    fit.sup_abs_E = sup;
    return fit;
}

}  // namespace nlft
