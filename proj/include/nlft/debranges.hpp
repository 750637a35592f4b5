#pragma once

// Reproducing kernels of the de Branges spaces B(E(t, .)),
//
//     K(t, l, z) = (A(z) C(conj l) - C(z) A(conj l)) / (pi (conj l - z)),
//
// their comparison with the Paley-Wiener sinc kernel, estimates of the
// spectral density w(s) = lim 1/|E(t, s)|^2, and local sine / exponential
// models of E near a real point.

#include <complex>
#include <vector>

#include "nlft/potential.hpp"
#include "nlft/propagator.hpp"

namespace nlft {

/// K(t, lambda, z) from the transfer matrix. When |conj(lambda) - z| is below
/// 1e-6 (1 + |z|) the divided difference is replaced by its first-order Taylor
/// form built from dM and d2M at z.
cplx kernel_K(const SampledPotential& pot, double t, cplx lambda, cplx z);

/// S(t, lambda, z) = sin(t (z - conj lambda)) / (pi (z - conj lambda)).
cplx kernel_sinc(double t, cplx lambda, cplx z);

/// gamma(p) = sqrt(2) / sqrt(sinh(2p)), p > 0.
double gamma_fn(double p);

struct WEstimate {
    double w_hat = 0.0;  // mean of 1/|E(t, s)|^2 over the window
    double spread = 0.0;  // max/min - 1 of the samples
    double w_tilde_hat = 0.0;  // same for E~
    double w_tilde_spread = 0.0;
    int samples = 0;
};

/// Samples n equally spaced times in [t_lo, t_hi] (both ends included).
WEstimate estimate_w(const SampledPotential& pot, double s, double t_lo, double t_hi, int n);

struct KernelProbe {
    double t = 0.0;
    double s = 0.0;
    double C = 0.0;
    double w_hat = 0.0;
    int grid_n = 0;
    std::vector<cplx> points;  // grid_n x grid_n tensor grid of Q(s, C/t), row-major
    std::vector<cplx> K_values;  // K(points[i], points[j]) at i * size + j
    std::vector<cplx> S_values;
    double gap = 0.0;  // max |K - S / w_hat| / t
};

/// Tensor grid of the square Q(s, h): grid_n points per side including the edges.
std::vector<cplx> box_grid(double s, double half_width, int grid_n);

/// Evaluates K and S on all pairs of the box grid of Q(s, C/t).
KernelProbe kernel_probe(const SampledPotential& pot, double s, double t, double C, double w_hat,
                         int grid_n = 16);

/// max over pairs in Q(s, C/t) of |K - S / w_hat| / t (Hermitian pairs evaluated once).
double universality_gap(const SampledPotential& pot, double s, double t, double C, double w_hat,
                        int grid_n = 16);

struct SineFit {
    double t = 0.0;
    double s = 0.0;
    cplx alpha;  // unimodular
    double x = 0.0;  // zero of the model at x - iy
    double y = 0.0;
    double residual = 0.0;  // sup over the box grid of |E - model|
    double w_used = 0.0;
    double sup_abs_E = 0.0;
};

/// E(t, z) ~ alpha gamma(t y) / sqrt(w) sin(t (z - (x - iy))) on Q(s, C/t), with
/// x - iy the zero of E nearest to s (conjugate of a theta-zero). alpha and w
/// are fixed by matching E(t, s) exactly. PreconditionError when the box holds
/// no zero or t y <= 1.
SineFit hb_sine_fit(const SampledPotential& pot, double s, double t, double C, int grid_n = 16);

struct ExpFit {
    cplx alpha;  // unimodular
    double residual = 0.0;
    double w_used = 0.0;
    double sup_abs_E = 0.0;
};

/// E(t, z) ~ (-i alpha / sqrt(w)) e^{-itz} on Q(s, D/t), matched at z = s.
/// PreconditionError when E(t, .) has a zero in Q(s, D/t).
ExpFit hb_exp_fit(const SampledPotential& pot, double s, double t, double D, int grid_n = 16);

}  // namespace nlft
