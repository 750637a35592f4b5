#pragma once

// Real potentials f on [0, T]: analytic families, piecewise-constant samples,
// restriction, L2 mass and sigma-interval detection.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nlft {

enum class Family { zero, constant, box, powerlaw, damped_cosine, custom_samples };

/// Family name as used in potential files ("zero", "constant", ...).
std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Analytic description of a potential.
///
/// Parameter keys:
///   q      amplitude (constant, box, powerlaw, damped_cosine)
///   T0     support end (box; optional cut-off for powerlaw and damped_cosine)
///   p      decay exponent, f ~ (1+t)^-p, must exceed 1/2
///   omega  frequency (damped_cosine)
struct PotentialSpec {
    Family family = Family::zero;
    std::map<std::string, double> params;
    std::vector<double> samples;  // custom_samples only
    std::string description;

    /// Throws ValidationError on non-finite parameters or p <= 1/2.
    void validate() const;

    /// Analytic value f(t); not available for custom_samples.
    [[nodiscard]] double evaluate(double t) const;

    [[nodiscard]] double param(const std::string& key, double fallback) const;
};

/// Piecewise-constant potential: f = cells[j] on [j h, (j+1) h), the last
/// cell possibly shortened so that the total length is T.
class SampledPotential {
public:
    SampledPotential(double h, std::vector<double> cells);
    SampledPotential(double h, std::vector<double> cells, double length);

    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double T() const { return length_; }
    [[nodiscard]] std::span<const double> cells() const { return cells_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }

    /// Width of cell j (equals h except possibly for the last cell).
    [[nodiscard]] double cell_width(std::size_t j) const;
    [[nodiscard]] double cell_start(std::size_t j) const { return static_cast<double>(j) * h_; }

    /// Cell index containing t (right-continuous; t = T maps to the last cell).
    [[nodiscard]] std::size_t cell_index(double t) const;

    /// f(t), right-continuous. Zero past T.
    [[nodiscard]] double value(double t) const;

    /// True when every cell value is exactly zero.
    [[nodiscard]] bool is_zero() const;

    /// Largest t such that f vanishes on (t, T]; 0 for the zero potential.
    [[nodiscard]] double support_end() const;

private:
    double h_;
    std::vector<double> cells_;
    double length_;
};

/// Midpoint sampling of an analytic family on [0, T] with cell width h.
SampledPotential sample(const PotentialSpec& spec, double h, double T);

/// Midpoint sampling of an arbitrary function.
SampledPotential sample_function(const std::function<double(double)>& f, double h, double T);

/// The restriction f_T of the potential to (0, T).
SampledPotential restrict_to(const SampledPotential& pot, double T);

/// The potential extended by zero cells up to length T >= pot.T().
SampledPotential extend_with_zeros(const SampledPotential& pot, double T);

/// Exact integral of f^2 over (t1, t2).
double l2_norm_sq(const SampledPotential& pot, double t1, double t2);
double l2_norm_sq(const SampledPotential& pot);

/// Integrals of f and |f| over (t1, t2).
double integral(const SampledPotential& pot, double t1, double t2);
double abs_integral(const SampledPotential& pot, double t1, double t2);

/// Uniform double in [0, 1) from the top 53 bits of one draw. Unlike
/// std::uniform_real_distribution the result does not depend on the standard library.
double unit_uniform(std::mt19937_64& rng);

/// Seeded piecewise-constant test potential: length drawn from [T_min, T_max]
/// and rounded to whole cells, 1..max_pieces constant pieces with values
/// uniform in [-amplitude, amplitude].
SampledPotential random_piecewise(std::uint64_t seed, double h, double T_min, double T_max,
                                  double amplitude, int max_pieces = 16);

/// Interval on which f has almost constant sign: |int f| >= (1 - sigma) int |f|.
struct SigmaInterval {
    double t1 = 0.0;
    double t2 = 0.0;
    double sigma = 0.0;
    double mass = 0.0;  // int |f| over (t1, t2)
};

inline constexpr double default_sigma = 0.01;

/// Greedy left-to-right search over cell boundaries. From each start cell with
/// f != 0 the interval is extended to the furthest cell boundary at which the
/// sigma condition holds; it is emitted when its mass reaches min_mass and the
/// search resumes at its end. Returned intervals are disjoint and ordered.
std::vector<SigmaInterval> sigma_intervals(const SampledPotential& pot, double sigma,
                                           double min_mass);

}  // namespace nlft
