#pragma once

// Scattering data of the half-line Dirac system:
//
//     a(T, z) = e^{iTz} (E + iE~) / 2,    b(T, z) = e^{iTz} (E - iE~) / 2,
//
// and the non-linear Fourier transform r = b / a. On the real line
// |a|^2 - |b|^2 = 1, and log|a| and arg a form a Hilbert-transform pair.

#include <complex>
#include <span>
#include <vector>

#include "nlft/errors.hpp"
#include "nlft/potential.hpp"
#include "nlft/propagator.hpp"

namespace nlft {

struct ScatteringPoint {
    cplx z;
    cplx a;
    cplx b;
    cplx r;
    double log_abs_a = 0.0;
    /// |a|^2 - |b|^2 - 1 evaluated in extended precision; NaN off the real axis.
    double unimodular_defect = 0.0;
    /// |det M - 1| of the underlying transfer matrix.
    double det_defect = 0.0;
};

struct ScatteringData {
    double T = 0.0;
    std::vector<cplx> grid;
    std::vector<cplx> a;
    std::vector<cplx> b;
    std::vector<cplx> r;
    std::vector<double> log_abs_a;
    std::vector<double> unimodular_defect;
    std::vector<double> det_defect;
};

/// a, b, r at a single point, from the transfer matrix of pot on (0, T).
ScatteringPoint scattering_point(const SampledPotential& pot, double T, cplx z);

/// Scattering data on a grid; evaluated in parallel, identical to sequential.
/// Throws NumericalError if |a| is not a positive finite number at some point.
ScatteringData nlft_forward(const SampledPotential& pot, double T, std::span<const cplx> grid);

/// Scattering data of the shifted potential f(. + t1) on (0, t2 - t1).
ScatteringPoint interval_scattering_point(const SampledPotential& pot, double t1, double t2, cplx z);

/// a_{t1 -> t2}(z) = e^{i(t2-t1)z} (E_{t1->t2} + i E~_{t1->t2}) / 2.
cplx interval_scattering(const SampledPotential& pot, double t1, double t2, cplx z);

/// Linear-scattering normalisation: int log|a| dx = (pi/2) ||f||^2.
inline constexpr double parseval_normalization = 1.5707963267948966;

struct ParsevalReport {
    double lhs = 0.0;  // int_R log|a(T, x)| dx
    double rhs = 0.0;  // ||f||^2 on the interval
    double rel_err = 0.0;  // |lhs - rhs| / rhs
    double domain_half_width = 0.0;
    int refinement_levels = 0;  // number of domain doublings
    double normalization = parseval_normalization;
    double normalized_rel_err = 0.0;  // |lhs - normalization * rhs| / (normalization * rhs)
};

/// Raised when the domain-doubling loop stops before the tail criterion holds.
class ParsevalNonConvergence : public NumericalError {
public:
    ParsevalNonConvergence(const std::string& what, ParsevalReport partial)
        : NumericalError(what), report(partial) {}
    ParsevalReport report;
};

struct ParsevalOptions {
    int max_doublings = 14;
    /// Initial half-width; 0 selects max(4, 8 / (t2 - t1)).
    double initial_half_width = 0.0;
};

/// Symmetric adaptive quadrature of log|a(T, x)| over [-X, X], doubling X until
/// the contribution of the newest shell falls below tol * rhs.
ParsevalReport parseval_check(const SampledPotential& pot, double T, double tol,
                              const ParsevalOptions& options = {});

/// Same for a_{t1 -> t2} against ||f||^2 on (t1, t2).
ParsevalReport interval_parseval_check(const SampledPotential& pot, double t1, double t2,
                                       double tol, const ParsevalOptions& options = {});

/// Continuous branch of arg a_{t1 -> t2} along a symmetric real grid containing
/// 0, pinned to 0 at x = 0. Throws AliasingError when a phase increment between
/// neighbours reaches pi/2.
std::vector<double> arg_a_branch(const SampledPotential& pot, double t1, double t2,
                                 std::span<const double> x_grid);

/// The same unwrapping applied to precomputed values a(x_k) on a symmetric real
/// grid. Even-sized grids (0 not a node) start from the principal branch at the
/// two central nodes.
std::vector<double> unwrap_arg_from_zero(std::span<const double> x_grid, std::span<const cplx> a);

/// Discrete Hilbert transform (multiplier -i sgn(xi)) of uniformly sampled data,
/// zero-padded to at least pad_factor times the input length.
std::vector<double> hilbert_transform(std::span<const double> values, int pad_factor = 4);

struct HilbertResult {
    double residual = 0.0;  // max |arg a - H(log|a|)| over the central half
    std::vector<double> arg_a;
    std::vector<double> hilbert_log_abs_a;
};

/// Compares arg a (continuous branch) with H(log|a|) on a uniform symmetric real
/// grid. Throws DomainTooSmallError if |log|a|| exceeds edge_tol at the grid ends.
HilbertResult hilbert_consistency(const ScatteringData& sd, double edge_tol = 1e-4);

}  // namespace nlft
