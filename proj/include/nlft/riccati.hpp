#pragma once

// Riccati flow of the Dirac inner functions
//
//     d theta / dt = 2iz theta - f (1 - theta^2),
//
// with theta(0) = 1 (Neumann) or -1 (Dirichlet), and the polar ODEs for E on
// the real line. These are independent routes to quantities the propagator
// also produces.

#include <complex>

#include "nlft/potential.hpp"
#include "nlft/propagator.hpp"

namespace nlft {

enum class InitialCondition { neumann, dirichlet };

struct InnerFlowState {
    double t = 0.0;
    cplx z;
    cplx theta;
    InitialCondition init = InitialCondition::neumann;
};

/// theta(t, z) by the Moebius action of each cell propagator on the
/// Neumann (1, 0) or Dirichlet (0, 1) column, theta = (u + iv) / (u - iv).
/// The column is renormalised after every cell.
InnerFlowState riccati_evolve_moebius(const SampledPotential& pot, cplx z, double t,
                                      InitialCondition init = InitialCondition::neumann);

/// Classical RK4 on the Riccati equation with steps no longer than dt_max that
/// never straddle a cell boundary. Throws InstabilityError if |theta| exceeds
/// 1.1 while Im z >= 0.
InnerFlowState riccati_evolve_rk(const SampledPotential& pot, cplx z, double t, double dt_max,
                                 InitialCondition init = InitialCondition::neumann);

struct PolarE {
    double arg_E = 0.0;
    double mod_E = 1.0;
};

/// Integrates d(arg E)/dt = -x - f sin(2 arg E) and
/// d(log|E|)/dt = f cos(2 arg E) with RK4 from arg E = 0, |E| = 1.
/// The step is at most min(cell width, 0.1 / (|x| + |f| + 1), dt_max).
PolarE arg_mod_E_evolve(const SampledPotential& pot, double x, double t, double dt_max = 1e-3);

}  // namespace nlft
