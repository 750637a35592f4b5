#pragma once

// Zeros of theta(t, .) in the upper half-plane (complex conjugates of the
// resonances, i.e. of the zeros of E), their motion z' = -f / theta_z, the
// flow of the real level sets theta = 1 (NN) and theta = -1 (ND), and a
// kinematic vertical/horizontal classification of resonance tracks.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nlft/potential.hpp"
#include "nlft/propagator.hpp"

namespace nlft {

/// Square Q(s, half_width) around a real point. Searches use its upper half
/// [s - hw, s + hw] x [im_floor, hw].
struct Box {
    double s = 0.0;
    double half_width = 1.0;
    int grid_n = 16;  // boundary samples per side before adaptive refinement

    void validate() const;
};

inline constexpr double default_im_floor = 1e-12;
inline constexpr double zero_residual_tol = 1e-9;

struct ThetaZero {
    cplx z;
    cplx theta_z;
    double residual = 0.0;  // |theta(t, z)|
};

/// Winding number of theta(t, .) along the boundary of the rectangle
/// [x0, x1] x [y0, y1], with adaptive sampling (phase step below pi/4) and a
/// refined recount. Throws BoundaryNearZeroError when the two counts differ or
/// theta nearly vanishes on the boundary.
int winding_number(const SampledPotential& pot, double t, double x0, double x1, double y0,
                   double y1, int samples_per_side = 16);

/// Newton iteration on theta(t, .) from z0. Throws DerivativeDegenerateError
/// when |theta_z| drops below 1e-8 t. Returns the last iterate; the caller
/// inspects its residual.
ThetaZero newton_theta_zero(const SampledPotential& pot, double t, cplx z0, int max_iter = 50);

/// All zeros of theta(t, .) in the upper half of the box: argument-principle
/// count, quadrisection down to single zeros, Newton polish to |theta| <= 1e-9.
std::vector<ThetaZero> find_zeros(const SampledPotential& pot, double t, const Box& box,
                                  double im_floor = default_im_floor);

enum class TrackStatus { completed, left_upper_half_plane, newton_failed };
std::string to_string(TrackStatus status);

struct TrackSample {
    double t = 0.0;
    cplx z;
    cplx theta_z;
    cplx theta_zz;
    double residual = 0.0;
};

struct ResonanceTrack {
    std::vector<TrackSample> samples;
    TrackStatus status = TrackStatus::completed;
};

/// Follows a zero of theta from (t0, z0) to t1 with step dt: Euler predictor
/// z - dt f / theta_z, Newton corrector at the new time. z0 is polished first;
/// PreconditionError if it does not converge to a zero.
ResonanceTrack track_resonance(const SampledPotential& pot, cplx z0, double t0, double t1, double dt,
                               double im_floor = default_im_floor);

enum class EigenKind { NN, ND };  // theta = 1, theta = -1
std::string to_string(EigenKind kind);

struct EigenSample {
    double t = 0.0;
    double x = 0.0;
    double velocity = 0.0;  // predicted dx/dt = -+2ix / theta_z
};

struct EigenTrack {
    EigenKind kind = EigenKind::NN;
    std::vector<EigenSample> samples;
    TrackStatus status = TrackStatus::completed;
    /// Every accepted step moves x strictly toward 0.
    bool monotone = true;
};

/// Real points with theta(t, x) = 1 (C(t, x) = 0) or -1 (A(t, x) = 0) in
/// [xmin, xmax], found by sign changes on a grid of spacing at most pi/(8t).
std::vector<double> find_eigenvalues(const SampledPotential& pot, double t, EigenKind kind,
                                     double xmin, double xmax);

/// Follows an NN/ND eigenvalue from (t0, x0) to t1: predictor from
/// N' = -2iN/theta_z (D' = 2iD/theta_z), Newton corrector on C (or A).
EigenTrack track_eigenvalue(const SampledPotential& pot, EigenKind kind, double x0, double t0,
                            double t1, double dt);

enum class MotionLabel { V, H };

struct MotionSegment {
    double t1 = 0.0;
    double t2 = 0.0;
    MotionLabel label = MotionLabel::V;
    cplx mean_direction;  // unit vector, normalised mean of unit velocities
};

inline constexpr double default_tau_v = 0.1;
inline constexpr double default_tau_h = 0.25;

/// Velocity per step between consecutive samples; a step is V when
/// |Re z'| <= tau_v |z'| and H when |Re z'| >= tau_h |z'| (steps in between
/// or with zero velocity stay unlabeled). Maximal runs of equal labels become
/// segments.
std::vector<MotionSegment> classify_track(const ResonanceTrack& track, double tau_v = default_tau_v,
                                          double tau_h = default_tau_h);

/// Per-step labels used by classify_track (empty optional = unlabeled).
std::vector<std::optional<MotionLabel>> step_labels(const ResonanceTrack& track, double tau_v,
                                                    double tau_h);

struct HorizonEntry {
    double t = 0.0;
    bool has_zero = false;  // E(t, .) has a zero in Q(s, C/t)
    double nearest_distance = 0.0;  // |z - s| for the nearest zero; NaN if none
};

/// Membership of each t in T0(s, C), by searching theta-zeros in the reflected
/// box [s - C/t, s + C/t] x (0, C/t].
std::vector<HorizonEntry> zero_free_horizon(const SampledPotential& pot, double s, double C,
                                            const std::vector<double>& t_grid);

}  // namespace nlft
