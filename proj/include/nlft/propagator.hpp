#pragma once

// Transfer matrices of the real Dirac system
//
//     X' = [[f, -z], [z, -f]] X,    M(0, z) = I,
//
// over piecewise-constant potentials. Each cell has the closed-form propagator
// exp(h [[q, -z], [z, -q]]) = cosh(lh) I + sinh(lh)/l [[q, -z], [z, -q]],
// l^2 = q^2 - z^2. Products are accumulated in double-double so that
// det M = 1 survives the e^{2 |Im z| t} growth of the entries.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "nlft/compensated.hpp"
#include "nlft/potential.hpp"

namespace nlft {

using cplx = std::complex<double>;
using compensated::Mat2;

/// Largest accepted |Im z| * (propagation length).
inline constexpr double max_growth_exponent = 50.0;

/// Fundamental matrix M(t, z) = [[A, B], [C, D]]. Columns are the Neumann and
/// Dirichlet solutions. Entries are carried in extended precision.
class TransferMatrix {
public:
    TransferMatrix() = default;
    TransferMatrix(double t, cplx z, compensated::Mat2DD m) : t_(t), z_(z), m_(m) {}

    [[nodiscard]] double t() const { return t_; }
    [[nodiscard]] cplx z() const { return z_; }

    [[nodiscard]] cplx A() const { return m_.a.value(); }
    [[nodiscard]] cplx B() const { return m_.b.value(); }
    [[nodiscard]] cplx C() const { return m_.c.value(); }
    [[nodiscard]] cplx D() const { return m_.d.value(); }

    [[nodiscard]] Mat2 matrix() const { return m_.value(); }
    [[nodiscard]] const compensated::Mat2DD& extended() const { return m_; }

    /// det M - 1, evaluated from the extended-precision entries.
    [[nodiscard]] cplx det_minus_one() const { return compensated::det_minus_one(m_); }

private:
    double t_ = 0.0;
    cplx z_ = 0.0;
    compensated::Mat2DD m_ = compensated::Mat2DD::identity();
};

/// Transfer matrix with its first (and optionally second) z-derivative.
struct AugmentedTransfer {
    TransferMatrix m;
    Mat2 dM;
    std::optional<Mat2> d2M;
    compensated::Mat2DD dM_ext;  // dM before rounding to double
};

/// E = A - iC, E~ = B - iD and their Schwarz reflections E# = A + iC,
/// E~# = B + iD (A, B, C, D are real entire for real f).
struct HermiteBiehlerPair {
    cplx E;
    cplx Etilde;
    cplx Esharp;
    cplx Etildesharp;
    /// det [[E, E~], [E#, E~#]], identically 2i; evaluated in extended precision.
    cplx wronskian;
};

/// Cell factor exp(h [[q, -z], [z, -q]]).
Mat2 cell_propagator(double q, double h, cplx z);

/// Cell factor with its first and second z-derivatives.
struct CellFactors {
    Mat2 P;
    Mat2 dP;
    Mat2 d2P;
};
CellFactors cell_factors(double q, double h, cplx z, int order);

/// M(t, z) for 0 <= t <= pot.T(); the cell containing t is truncated.
TransferMatrix transfer(const SampledPotential& pot, double t, cplx z);

/// M_{t1 -> t2}(z) = M(t2, z) M(t1, z)^{-1}, computed as the product of the
/// cell factors covering (t1, t2), i.e. the transfer matrix of the shifted
/// potential f(. + t1) on (0, t2 - t1). No inverse is formed.
TransferMatrix transfer_between(const SampledPotential& pot, double t1, double t2, cplx z);

/// M(t_k, z) for every t_k of a non-decreasing list, in one sweep.
std::vector<TransferMatrix> transfer_at_times(const SampledPotential& pot,
                                              std::span<const double> times, cplx z);

/// M with dM/dz (order 1) or additionally d2M/dz2 (order 2).
AugmentedTransfer transfer_derivative(const SampledPotential& pot, double t, cplx z, int order);
AugmentedTransfer transfer_derivative_between(const SampledPotential& pot, double t1, double t2,
                                              cplx z, int order);

HermiteBiehlerPair hermite_biehler(const TransferMatrix& m);

/// theta = E#/E = (A + iC)/(A - iC). Throws PoleProximityError when E is
/// numerically zero relative to |A| + |C|.
cplx theta(const TransferMatrix& m);

/// theta~ = E~#/E~ = (B + iD)/(B - iD).
cplx theta_tilde(const TransferMatrix& m);

struct ThetaDerivatives {
    cplx theta;
    cplx theta_z;
    cplx theta_zz;  // zero unless the augmented transfer carries d2M
};

ThetaDerivatives theta_derivs(const AugmentedTransfer& aug);

namespace debug {

/// Relative perturbation applied to the C entry of every cell factor. Zero in
/// normal operation; used to exercise the drift monitor.
void set_cell_corruption(double relative);
double cell_corruption();

}  // namespace debug

}  // namespace nlft
