#include "nlft/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include "nlft/errors.hpp"
#include "nlft/parallel.hpp"

namespace nlft {

void Box::validate() const {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ValidationError("box half_width must be positive");
    if (!std::isfinite(s)) throw ValidationError("box centre must be finite");
    if (grid_n < 8) throw ValidationError("box grid_n must be at least 8");
}

std::string to_string(TrackStatus status) {
    switch (status) {
        case TrackStatus::completed: return "completed";
        case TrackStatus::left_upper_half_plane: return "left_upper_half_plane";
        case TrackStatus::newton_failed: return "newton_failed";
    }
    return "unknown";
}

std::string to_string(EigenKind kind) { return kind == EigenKind::NN ? "NN" : "ND"; }

namespace {

constexpr double pi = std::numbers::pi;
constexpr double near_zero_floor = 1e-7;

/// theta(t, .) with memoisation, so that sub-boxes sharing edges reuse samples.
class ThetaSampler {
public:
    ThetaSampler(const SampledPotential& pot, double t)
        : pot_(pot), t_(t), phase_rate_(2.0 * (t + abs_integral(pot, 0.0, std::min(t, pot.T())))) {}

    double t() const { return t_; }

    /// Rough bound on |d arg theta / dz| used to choose the initial sampling.
    double phase_rate() const { return phase_rate_; }

    cplx operator()(cplx z) {
        const auto key = std::make_pair(z.real(), z.imag());
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const cplx value = theta(transfer(pot_, t_, z));
        cache_.emplace(key, value);
        return value;
    }

private:
    const SampledPotential& pot_;
    double t_;
    double phase_rate_;
    std::map<std::pair<double, double>, cplx> cache_;
};

/// Total change of arg theta along the segment [za, zb], bisecting wherever
/// the increment between neighbours reaches max_step.
bool nearly_zero(const ThetaSampler& theta_at, cplx z, cplx th) {
    // |theta| decays like e^{-2 t Im z} away from the real axis
    return std::abs(th) < near_zero_floor * std::exp(-2.0 * theta_at.t() * z.imag());
}

double phase_change(ThetaSampler& theta_at, cplx za, cplx zb, int n, double max_step) {
    double total = 0.0;
    // Resolve the known oscillation first so that no increment aliases by 2 pi.
    const double resolve = std::ceil(std::abs(zb - za) * theta_at.phase_rate() / (0.5 * max_step));
    n = std::max(n, static_cast<int>(std::min(resolve, 1e6)));
    const double min_len = 1e-12 * (1.0 + std::abs(za) + std::abs(zb));
    struct Piece {
        cplx z0, z1;
        cplx th0, th1;
        int depth;
    };
    std::vector<Piece> stack;
    std::vector<cplx> nodes(n + 1);
    for (int k = 0; k <= n; ++k) {
        nodes[k] = za + (zb - za) * (static_cast<double>(k) / n);
        const cplx th = theta_at(nodes[k]);
        if (nearly_zero(theta_at, nodes[k], th)) {
            throw BoundaryNearZeroError("theta nearly vanishes on a box edge");
        }
    }
    for (int k = n; k-- > 0;) {
        stack.push_back({nodes[k], nodes[k + 1], theta_at(nodes[k]), theta_at(nodes[k + 1]), 0});
    }
    while (!stack.empty()) {
        const Piece p = stack.back();
        stack.pop_back();
        const double d = std::arg(p.th1 / p.th0);
        if (std::abs(d) < max_step) {
            total += d;
            continue;
        }
        if (std::abs(p.z1 - p.z0) < min_len || p.depth > 40) {
            throw BoundaryNearZeroError("phase of theta not resolved on a box edge");
        }
        const cplx zm = 0.5 * (p.z0 + p.z1);
        const cplx thm = theta_at(zm);
        if (nearly_zero(theta_at, zm, thm)) {
            throw BoundaryNearZeroError("theta nearly vanishes on a box edge");
        }
        stack.push_back({zm, p.z1, thm, p.th1, p.depth + 1});
        stack.push_back({p.z0, zm, p.th0, thm, p.depth + 1});
    }
    return total;
}

int count_once(ThetaSampler& theta_at, double x0, double x1, double y0, double y1, int n,
               double max_step) {
    const std::array<cplx, 5> corners{cplx(x0, y0), cplx(x1, y0), cplx(x1, y1), cplx(x0, y1),
                                      cplx(x0, y0)};
    double total = 0.0;
    for (int side = 0; side < 4; ++side) {
        total += phase_change(theta_at, corners[side], corners[side + 1], n, max_step);
    }
    const double turns = total / (2.0 * pi);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 0.1) {
        throw BoundaryNearZeroError("winding number is not close to an integer");
    }
    return static_cast<int>(rounded);
}

int count_zeros(ThetaSampler& theta_at, double x0, double x1, double y0, double y1, int n) {
    const int coarse = count_once(theta_at, x0, x1, y0, y1, n, 0.25 * pi);
    const int fine = count_once(theta_at, x0, x1, y0, y1, 2 * n, 0.125 * pi);
    if (coarse != fine) {
        throw BoundaryNearZeroError("winding number changes under boundary refinement (" +
                                    std::to_string(coarse) + " vs " + std::to_string(fine) + ")");
    }
    if (coarse < 0) throw NumericalError("negative winding number for an analytic function");
    return coarse;
}

struct NewtonResult {
    cplx z;
    ThetaDerivatives d;
};

NewtonResult newton(const SampledPotential& pot, double t, cplx z, int max_iter) {
    const double floor = 1e-8 * t;
    ThetaDerivatives d = theta_derivs(transfer_derivative(pot, t, z, 2));
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(d.theta_z) < floor) {
            throw DerivativeDegenerateError("|theta_z| below 1e-8 t near z = (" +
                                            std::to_string(z.real()) + ", " +
                                            std::to_string(z.imag()) + ")");
        }
        const cplx step = d.theta / d.theta_z;
        z -= step;
        d = theta_derivs(transfer_derivative(pot, t, z, 2));
        if (std::abs(d.theta) <= 1e-15 || std::abs(step) <= 4e-16 * (1.0 + std::abs(z))) break;
    }
    return {z, d};
}

struct Rect {
    double x0, x1, y0, y1;
};

class ZeroFinder {
public:
    ZeroFinder(const SampledPotential& pot, double t, int n) : pot_(pot), t_(t), n_(n), theta_at_(pot, t) {}

    int count(const Rect& r) { return count_zeros(theta_at_, r.x0, r.x1, r.y0, r.y1, n_); }

    void solve(const Rect& r, int expected, int depth) {
        if (expected == 0) return;
        if (expected == 1 && try_newton(r)) return;
        if (depth >= 30) throw NumericalError("zero search did not separate zeros (multiple zero?)");

        // Quadrisect; shift the cut lines if a child boundary passes too close to a zero.
        for (double frac : {0.5, 0.5 + 0.137, 0.5 - 0.171, 0.5 + 0.311}) {
            const double xm = r.x0 + frac * (r.x1 - r.x0);
            const double ym = r.y0 + frac * (r.y1 - r.y0);
            const std::array<Rect, 4> kids{Rect{r.x0, xm, r.y0, ym}, Rect{xm, r.x1, r.y0, ym},
                                           Rect{r.x0, xm, ym, r.y1}, Rect{xm, r.x1, ym, r.y1}};
            std::array<int, 4> counts{};
            try {
                for (int k = 0; k < 4; ++k) counts[k] = this->count(kids[k]);
            } catch (const BoundaryNearZeroError&) {
                continue;
            }
            if (counts[0] + counts[1] + counts[2] + counts[3] != expected) continue;
            for (int k = 0; k < 4; ++k) solve(kids[k], counts[k], depth + 1);
            return;
        }
        throw BoundaryNearZeroError("could not place sub-box boundaries away from zeros");
    }

    std::vector<ThetaZero> zeros;

private:
    bool try_newton(const Rect& r) {
        NewtonResult res;
        try {
            res = newton(pot_, t_, cplx(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)), 60);
        } catch (const NumericalError&) {
            return false;
        }
        const double slack = 1e-9 * (1.0 + std::abs(res.z));
        const bool inside = res.z.real() >= r.x0 - slack && res.z.real() <= r.x1 + slack &&
                            res.z.imag() >= r.y0 - slack && res.z.imag() <= r.y1 + slack;
        if (!inside || !(std::abs(res.d.theta) <= zero_residual_tol)) return false;
        zeros.push_back({res.z, res.d.theta_z, std::abs(res.d.theta)});
        return true;
    }

    const SampledPotential& pot_;
    double t_;
    int n_;
    ThetaSampler theta_at_;
};

}  // namespace

int winding_number(const SampledPotential& pot, double t, double x0, double x1, double y0,
                   double y1, int samples_per_side) {
    if (!(x1 > x0) || !(y1 > y0)) throw ValidationError("degenerate rectangle");
    ThetaSampler theta_at(pot, t);
    return count_zeros(theta_at, x0, x1, y0, y1, std::max(4, samples_per_side));
}

ThetaZero newton_theta_zero(const SampledPotential& pot, double t, cplx z0, int max_iter) {
    const NewtonResult r = newton(pot, t, z0, max_iter);
    return {r.z, r.d.theta_z, std::abs(r.d.theta)};
}

std::vector<ThetaZero> find_zeros(const SampledPotential& pot, double t, const Box& box,
                                  double im_floor) {
    box.validate();
    if (!(t > 0.0)) throw RangeError("find_zeros needs t > 0");
    const Rect top{box.s - box.half_width, box.s + box.half_width, im_floor, box.half_width};
    if (!(top.y1 > top.y0)) throw ValidationError("box lies below the imaginary floor");
    ZeroFinder finder(pot, t, box.grid_n);
    const int count = finder.count(top);
    finder.solve(top, count, 0);

    auto zeros = std::move(finder.zeros);
    std::sort(zeros.begin(), zeros.end(), [](const ThetaZero& a, const ThetaZero& b) {
        return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
    });
    std::vector<ThetaZero> unique;
    for (const auto& z : zeros) {
        if (unique.empty() || std::abs(unique.back().z - z.z) > 1e-8 * (1.0 + std::abs(z.z))) {
            unique.push_back(z);
        }
    }
    if (static_cast<int>(unique.size()) != count) {
        throw NumericalError("found " + std::to_string(unique.size()) + " zeros but the winding number is " +
                             std::to_string(count));
    }
    return unique;
}

ResonanceTrack track_resonance(const SampledPotential& pot, cplx z0, double t0, double t1, double dt,
                               double im_floor) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t0 > 0.0) || !(t1 >= t0) || t1 > pot.T()) throw RangeError("need 0 < t0 <= t1 <= pot.T");

    NewtonResult cur;
    try {
        cur = newton(pot, t0, z0, 60);
    } catch (const NumericalError&) {
        throw PreconditionError("no zero of theta near the starting point");
    }
    if (!(std::abs(cur.d.theta) <= zero_residual_tol) || !(cur.z.imag() > im_floor) ||
        std::abs(cur.z - z0) > 0.5) {
        throw PreconditionError("theta(t0, z0) is not zero and Newton did not reach a nearby zero");
    }

    ResonanceTrack track;
    auto record = [&](double t, const NewtonResult& r) {
        track.samples.push_back({t, r.z, r.d.theta_z, r.d.theta_zz, std::abs(r.d.theta)});
    };
    record(t0, cur);

    const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
    double t = t0;
    for (long k = 1; k <= steps; ++k) {
        const double t_next = k == steps ? t1 : t0 + static_cast<double>(k) * dt;
        const double f = pot.value(0.5 * (t + t_next));
        const cplx predicted = cur.z - (t_next - t) * f / cur.d.theta_z;
        NewtonResult next;
        try {
            next = newton(pot, t_next, predicted, 30);
        } catch (const DerivativeDegenerateError&) {
            throw;
        } catch (const NumericalError&) {
            track.status = TrackStatus::newton_failed;
            return track;
        }
        const double jump_limit = 0.25 * pi / t_next;
        if (!(std::abs(next.d.theta) <= zero_residual_tol) || std::abs(next.z - predicted) > jump_limit) {
            track.status = TrackStatus::newton_failed;
            return track;
        }
        if (!(next.z.imag() > im_floor)) {
            track.status = TrackStatus::left_upper_half_plane;
            return track;
        }
        cur = next;
        t = t_next;
        record(t, cur);
    }
    return track;
}

namespace {

struct RealLevel {
    double g;   // C(t, x) for NN, A(t, x) for ND
    double dg;
    cplx theta_z;
};

RealLevel level_function(const SampledPotential& pot, double t, EigenKind kind, double x, bool need_theta) {
    const AugmentedTransfer aug = transfer_derivative(pot, t, cplx(x, 0.0), 1);
    RealLevel r{};
    if (kind == EigenKind::NN) {
        r.g = aug.m.C().real();
        r.dg = aug.dM.c.real();
    } else {
        r.g = aug.m.A().real();
        r.dg = aug.dM.a.real();
    }
    if (need_theta) r.theta_z = theta_derivs(aug).theta_z;
    return r;
}

double level_value(const SampledPotential& pot, double t, EigenKind kind, double x) {
    const TransferMatrix m = transfer(pot, t, cplx(x, 0.0));
    return kind == EigenKind::NN ? m.C().real() : m.A().real();
}

double polish_real(const SampledPotential& pot, double t, EigenKind kind, double x, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const RealLevel l = level_function(pot, t, kind, x, false);
        if (l.dg == 0.0) throw DerivativeDegenerateError("level function has zero slope");
        const double step = l.g / l.dg;
        x -= step;
        if (std::abs(step) <= 4e-16 * (1.0 + std::abs(x))) break;
    }
    return x;
}

double velocity(EigenKind kind, double x, cplx theta_z) {
    const cplx i(0.0, 1.0);
    const cplx v = kind == EigenKind::NN ? -2.0 * i * x / theta_z : 2.0 * i * x / theta_z;
    return v.real();
}

}  // namespace

std::vector<double> find_eigenvalues(const SampledPotential& pot, double t, EigenKind kind,
                                     double xmin, double xmax) {
    if (!(xmax > xmin)) throw ValidationError("empty eigenvalue search interval");
    if (!(t > 0.0)) throw RangeError("find_eigenvalues needs t > 0");
    const double spacing = std::min(pi / (8.0 * t), (xmax - xmin) / 16.0);
    const auto n = static_cast<std::size_t>(std::ceil((xmax - xmin) / spacing));
    std::vector<double> xs(n + 1), g(n + 1);
    for (std::size_t k = 0; k <= n; ++k) xs[k] = xmin + (xmax - xmin) * static_cast<double>(k) / static_cast<double>(n);
    parallel_for(n + 1, [&](std::size_t k) { g[k] = level_value(pot, t, kind, xs[k]); });

    std::vector<double> roots;
    for (std::size_t k = 0; k < n; ++k) {
        if (g[k] == 0.0) {
            roots.push_back(xs[k]);
            continue;
        }
        if ((g[k] < 0.0) == (g[k + 1] < 0.0) || g[k + 1] == 0.0) continue;
        double lo = xs[k], hi = xs[k + 1], glo = g[k];
        for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = level_value(pot, t, kind, mid);
            if (gm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        double x = 0.5 * (lo + hi);
        const double polished = polish_real(pot, t, kind, x, 8);
        if (std::abs(polished - x) <= hi - lo + 1e-9) x = polished;
        roots.push_back(x);
    }
    if (g[n] == 0.0) roots.push_back(xs[n]);
    return roots;
}

EigenTrack track_eigenvalue(const SampledPotential& pot, EigenKind kind, double x0, double t0,
                            double t1, double dt) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t0 > 0.0) || !(t1 >= t0) || t1 > pot.T()) throw RangeError("need 0 < t0 <= t1 <= pot.T");

    const cplx target = kind == EigenKind::NN ? 1.0 : -1.0;
    double x = polish_real(pot, t0, kind, x0, 30);
    {
        const double th_err = std::abs(theta(transfer(pot, t0, cplx(x, 0.0))) - target);
        if (!(th_err <= 1e-9) || std::abs(x - x0) > pi / (4.0 * t0)) {
            throw PreconditionError("x0 is not an " + to_string(kind) + " eigenvalue at t0");
        }
    }

    EigenTrack track;
    track.kind = kind;
    RealLevel here = level_function(pot, t0, kind, x, true);
    track.samples.push_back({t0, x, velocity(kind, x, here.theta_z)});

    const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
    double t = t0;
    for (long k = 1; k <= steps; ++k) {
        const double t_next = k == steps ? t1 : t0 + static_cast<double>(k) * dt;
        const double predicted = x + (t_next - t) * velocity(kind, x, here.theta_z);
        double next = 0.0;
        try {
            next = polish_real(pot, t_next, kind, predicted, 30);
        } catch (const NumericalError&) {
            track.status = TrackStatus::newton_failed;
            return track;
        }
        if (std::abs(next - predicted) > pi / (4.0 * t_next)) {
            track.status = TrackStatus::newton_failed;
            return track;
        }
        if (x > 0.0 && !(next < x)) track.monotone = false;
        if (x < 0.0 && !(next > x)) track.monotone = false;
        x = next;
        t = t_next;
        here = level_function(pot, t, kind, x, true);
        track.samples.push_back({t, x, velocity(kind, x, here.theta_z)});
    }
    return track;
}

std::vector<std::optional<MotionLabel>> step_labels(const ResonanceTrack& track, double tau_v,
                                                    double tau_h) {
    if (!(tau_v > 0.0 && tau_v < tau_h && tau_h < 1.0)) {
        throw ValidationError("thresholds must satisfy 0 < tau_v < tau_h < 1");
    }
    std::vector<std::optional<MotionLabel>> labels;
    const auto& s = track.samples;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const cplx v = (s[k + 1].z - s[k].z) / (s[k + 1].t - s[k].t);
        const double speed = std::abs(v);
        if (speed == 0.0 || !std::isfinite(speed)) {
            labels.emplace_back();
        } else if (std::abs(v.real()) <= tau_v * speed) {
            labels.emplace_back(MotionLabel::V);
        } else if (std::abs(v.real()) >= tau_h * speed) {
            labels.emplace_back(MotionLabel::H);
        } else {
            labels.emplace_back();
        }
    }
    return labels;
}

std::vector<MotionSegment> classify_track(const ResonanceTrack& track, double tau_v, double tau_h) {
    if (track.samples.size() < 3) throw ValidationError("classification needs at least three samples");
    const auto labels = step_labels(track, tau_v, tau_h);
    const auto& s = track.samples;
    std::vector<MotionSegment> out;
    std::size_t k = 0;
    while (k < labels.size()) {
        if (!labels[k]) {
            ++k;
            continue;
        }
        std::size_t end = k;
        cplx direction = 0.0;
        while (end < labels.size() && labels[end] == labels[k]) {
            const cplx v = s[end + 1].z - s[end].z;
            direction += v / std::abs(v);
            ++end;
        }
        const double norm = std::abs(direction);
        out.push_back({s[k].t, s[end].t, *labels[k], norm > 0.0 ? direction / norm : cplx(0.0)});
        k = end;
    }
    return out;
}

std::vector<HorizonEntry> zero_free_horizon(const SampledPotential& pot, double s, double C,
                                            const std::vector<double>& t_grid) {
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) throw ValidationError("t_grid must be increasing");
    }
    std::vector<HorizonEntry> out(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t k) {
        const double t = t_grid[k];
        const auto zeros = find_zeros(pot, t, Box{s, C / t, 16});
        HorizonEntry e{t, !zeros.empty(), std::numeric_limits<double>::quiet_NaN()};
        for (const auto& z : zeros) {
            const double d = std::abs(z.z - s);
            if (!(d >= e.nearest_distance)) e.nearest_distance = d;
        }
        out[k] = e;
    });
    return out;
}

}  // namespace nlft
