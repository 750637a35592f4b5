#pragma once

// Reference integrators used as independent oracles by the tests. They share
// nothing with the library beyond the potential container.

#include <array>
#include <complex>

#include "nlft/potential.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = std::array<cplx, 4>;  // row-major [[a, b], [c, d]]

/// RK4 on X' = [[f, -z], [z, -f]] X, X(0) = I, with n steps per cell.
inline Mat dirac_rk4(const nlft::SampledPotential& pot, double t, cplx z, int steps_per_cell = 200) {
    Mat X{1.0, 0.0, 0.0, 1.0};
    auto rhs = [z](double f, const Mat& m) {
        return Mat{f * m[0] - z * m[2], f * m[1] - z * m[3], z * m[0] - f * m[2], z * m[1] - f * m[3]};
    };
    double pos = 0.0;
    for (std::size_t j = 0; j < pot.size() && pos < t; ++j) {
        const double end = std::min(t, pot.cell_start(j) + pot.cell_width(j));
        const double h = (end - pos) / steps_per_cell;
        const double f = pot.cells()[j];
        for (int k = 0; k < steps_per_cell; ++k) {
            const Mat k1 = rhs(f, X);
            Mat tmp;
            for (int i = 0; i < 4; ++i) tmp[i] = X[i] + 0.5 * h * k1[i];
            const Mat k2 = rhs(f, tmp);
            for (int i = 0; i < 4; ++i) tmp[i] = X[i] + 0.5 * h * k2[i];
            const Mat k3 = rhs(f, tmp);
            for (int i = 0; i < 4; ++i) tmp[i] = X[i] + h * k3[i];
            const Mat k4 = rhs(f, tmp);
            for (int i = 0; i < 4; ++i) X[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        pos = end;
    }
    return X;
}

}  // namespace oracle
