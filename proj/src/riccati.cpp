#include "nlft/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlft/errors.hpp"

namespace nlft {

namespace {

constexpr cplx I(0.0, 1.0);

void check_horizon(const SampledPotential& pot, double t) {
    if (!(t >= 0.0) || t > pot.T() * (1.0 + 1e-12)) {
        throw RangeError("t = " + std::to_string(t) + " outside [0, " + std::to_string(pot.T()) + "]");
    }
}

cplx initial_theta(InitialCondition init) { return init == InitialCondition::neumann ? 1.0 : -1.0; }

/// Calls step(q, width) for every (possibly partial) cell covering (0, t).
template <typename Step>
void for_each_cell(const SampledPotential& pot, double t, Step step) {
    const auto cells = pot.cells();
    for (std::size_t j = 0; j < pot.size(); ++j) {
        const double start = pot.cell_start(j);
        if (start >= t) break;
        const double width = std::min(pot.cell_width(j), t - start);
        if (width > 0.0) step(cells[j], width);
    }
}

// theta_t = 2iz theta + f (1 - theta^2), the form obtained from
// theta = (u + iv)/(u - iv) with u' = f u - z v, v' = z u - f v.
cplx riccati_rhs(cplx theta, cplx z, double f) { return 2.0 * I * z * theta + f * (1.0 - theta * theta); }

}  // namespace

InnerFlowState riccati_evolve_moebius(const SampledPotential& pot, cplx z, double t,
                                      InitialCondition init) {
    check_horizon(pot, t);
    t = std::min(t, pot.T());
    cplx u = init == InitialCondition::neumann ? 1.0 : 0.0;
    cplx v = init == InitialCondition::neumann ? 0.0 : 1.0;
    for_each_cell(pot, t, [&](double q, double width) {
        const Mat2 P = cell_propagator(q, width, z);
        const cplx nu = P.a * u + P.b * v;
        const cplx nv = P.c * u + P.d * v;
        const double scale = std::max(std::abs(nu), std::abs(nv));
        u = nu / scale;
        v = nv / scale;
    });
    const cplx den = u - I * v;
    if (!(std::abs(den) > 1e-14 * (std::abs(u) + std::abs(v)))) {
        throw PoleProximityError("u - iv vanishes: z is a zero of E(t, .)");
    }
    return {t, z, (u + I * v) / den, init};
}

InnerFlowState riccati_evolve_rk(const SampledPotential& pot, cplx z, double t, double dt_max,
                                 InitialCondition init) {
    check_horizon(pot, t);
    if (!(dt_max > 0.0)) throw ValidationError("dt_max must be positive");
    t = std::min(t, pot.T());
    cplx theta = initial_theta(init);
    double now = 0.0;
    for_each_cell(pot, t, [&](double q, double width) {
        const auto steps = static_cast<long>(std::ceil(width / dt_max - 1e-9));
        const double dt = width / static_cast<double>(std::max(1L, steps));
        for (long k = 0; k < std::max(1L, steps); ++k) {
            const cplx k1 = riccati_rhs(theta, z, q);
            const cplx k2 = riccati_rhs(theta + 0.5 * dt * k1, z, q);
            const cplx k3 = riccati_rhs(theta + 0.5 * dt * k2, z, q);
            const cplx k4 = riccati_rhs(theta + dt * k3, z, q);
            theta += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            now += dt;
            if (z.imag() >= 0.0 && !(std::abs(theta) <= 1.1)) {
                throw InstabilityError("|theta| = " + std::to_string(std::abs(theta)) +
                                       " at t = " + std::to_string(now) + "; reduce dt_max");
            }
        }
    });
    return {t, z, theta, init};
}

PolarE arg_mod_E_evolve(const SampledPotential& pot, double x, double t, double dt_max) {
    check_horizon(pot, t);
    if (!(dt_max > 0.0)) throw ValidationError("dt_max must be positive");
    t = std::min(t, pot.T());
    double phi = 0.0;
    double log_mod = 0.0;
    for_each_cell(pot, t, [&](double q, double width) {
        const double cap = std::min(dt_max, 0.1 / (std::abs(x) + std::abs(q) + 1.0));
        const auto steps = std::max(1L, static_cast<long>(std::ceil(width / cap - 1e-9)));
        const double dt = width / static_cast<double>(steps);
        auto dphi = [&](double p) { return -x - q * std::sin(2.0 * p); };
        auto dlog = [&](double p) { return q * std::cos(2.0 * p); };
        for (long k = 0; k < steps; ++k) {
            const double p1 = phi;
            const double a1 = dphi(p1);
            const double p2 = phi + 0.5 * dt * a1;
            const double a2 = dphi(p2);
            const double p3 = phi + 0.5 * dt * a2;
            const double a3 = dphi(p3);
            const double p4 = phi + dt * a3;
            const double a4 = dphi(p4);
            log_mod += dt / 6.0 * (dlog(p1) + 2.0 * dlog(p2) + 2.0 * dlog(p3) + dlog(p4));
            phi += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
    });
    return {phi, std::exp(log_mod)};
}

}  // namespace nlft
