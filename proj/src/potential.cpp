#include "nlft/potential.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "nlft/errors.hpp"

namespace nlft {

namespace {

std::size_t cell_count(double h, double T) {
    const double ratio = T / h;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) < 1e-9 * std::max(1.0, nearest)) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(ratio));
}

void require_finite(const std::string& what, double value) {
    if (!std::isfinite(value)) {
        throw ValidationError(what + " must be finite");
    }
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::zero: return "zero";
        case Family::constant: return "constant";
        case Family::box: return "box";
        case Family::powerlaw: return "powerlaw";
        case Family::damped_cosine: return "damped_cosine";
        case Family::custom_samples: return "custom_samples";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    for (Family f : {Family::zero, Family::constant, Family::box, Family::powerlaw,
                     Family::damped_cosine, Family::custom_samples}) {
        if (to_string(f) == name) return f;
    }
    throw ValidationError("unknown potential family '" + name + "'");
}

double PotentialSpec::param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void PotentialSpec::validate() const {
    for (const auto& [key, value] : params) {
        require_finite("parameter '" + key + "'", value);
    }
    switch (family) {
        case Family::box:
            if (param("T0", 0.0) <= 0.0) throw ValidationError("box potential needs T0 > 0");
            break;
        case Family::powerlaw:
        case Family::damped_cosine:
            if (!(param("p", 1.0) > 0.5)) {
                throw ValidationError("decay exponent p must exceed 1/2 for f in L2");
            }
            break;
        case Family::custom_samples:
            if (samples.empty()) throw ValidationError("custom_samples needs at least one sample");
            for (double v : samples) require_finite("sample", v);
            break;
        default:
            break;
    }
}

double PotentialSpec::evaluate(double t) const {
    const double q = param("q", 1.0);
    const double cutoff = param("T0", INFINITY);
    switch (family) {
        case Family::zero: return 0.0;
        case Family::constant: return q;
        case Family::box: return t < cutoff ? q : 0.0;
        case Family::powerlaw:
            return t < cutoff ? q * std::pow(1.0 + t, -param("p", 1.0)) : 0.0;
        case Family::damped_cosine:
            return t < cutoff
                       ? q * std::cos(param("omega", 1.0) * t) * std::pow(1.0 + t, -param("p", 1.0))
                       : 0.0;
        case Family::custom_samples: break;
    }
    throw ValidationError("custom_samples has no analytic form");
}

SampledPotential::SampledPotential(double h, std::vector<double> cells)
    : SampledPotential(h, std::move(cells), -1.0) {}

SampledPotential::SampledPotential(double h, std::vector<double> cells, double length)
    : h_(h), cells_(std::move(cells)), length_(length) {
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw ValidationError("cell width h must be positive");
    if (cells_.empty()) throw ValidationError("potential needs at least one cell");
    for (double v : cells_) require_finite("cell value", v);
    const double full = h_ * static_cast<double>(cells_.size());
    if (length_ < 0.0) {
        length_ = full;
    } else {
        const double lower = h_ * static_cast<double>(cells_.size() - 1);
        if (!(length_ > lower * (1.0 - 1e-12)) || length_ > full * (1.0 + 1e-12)) {
            throw ValidationError("length inconsistent with cell count");
        }
    }
}

double SampledPotential::cell_width(std::size_t j) const {
    if (j + 1 < cells_.size()) return h_;
    return length_ - cell_start(j);
}

std::size_t SampledPotential::cell_index(double t) const {
    if (t <= 0.0) return 0;
    auto j = static_cast<std::size_t>(std::floor(t / h_));
    if (cell_start(j + 1) <= t) ++j;
    return std::min(j, cells_.size() - 1);
}

double SampledPotential::value(double t) const {
    if (t < 0.0 || t > length_) return 0.0;
    return cells_[cell_index(t)];
}

bool SampledPotential::is_zero() const {
    return std::all_of(cells_.begin(), cells_.end(), [](double v) { return v == 0.0; });
}

double SampledPotential::support_end() const {
    for (std::size_t j = cells_.size(); j-- > 0;) {
        if (cells_[j] != 0.0) return std::min(length_, cell_start(j + 1));
    }
    return 0.0;
}

SampledPotential sample_function(const std::function<double(double)>& f, double h, double T) {
    if (!(h > 0.0)) throw ValidationError("cell width h must be positive");
    if (!(T >= h * (1.0 - 1e-12))) throw ValidationError("horizon T must be at least h");
    const std::size_t n = cell_count(h, T);
    std::vector<double> cells(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = static_cast<double>(j) * h;
        const double b = std::min(T, a + h);
        cells[j] = f(0.5 * (a + b));
    }
    return {h, std::move(cells), T};
}

SampledPotential sample(const PotentialSpec& spec, double h, double T) {
    spec.validate();
    if (spec.family == Family::custom_samples) {
        SampledPotential full(h, spec.samples);
        if (T > full.T() * (1.0 + 1e-12)) {
            throw ValidationError("custom samples cover less than the requested horizon");
        }
        return T < full.T() ? restrict_to(full, T) : full;
    }
    return sample_function([&spec](double t) { return spec.evaluate(t); }, h, T);
}

SampledPotential restrict_to(const SampledPotential& pot, double T) {
    if (!(T > 0.0) || T > pot.T()) throw RangeError("restriction horizon outside (0, pot.T]");
    if (T == pot.T()) return pot;
    const std::size_t n = cell_count(pot.h(), T);
    std::vector<double> cells(pot.cells().begin(), pot.cells().begin() + static_cast<long>(n));
    return {pot.h(), std::move(cells), T};
}

SampledPotential extend_with_zeros(const SampledPotential& pot, double T) {
    if (T < pot.T()) throw RangeError("extension horizon shorter than the potential");
    const double full = pot.h() * static_cast<double>(pot.size());
    if (pot.T() < full * (1.0 - 1e-12)) {
        throw ValidationError("cannot extend a potential whose last cell is partial");
    }
    std::vector<double> cells(pot.cells().begin(), pot.cells().end());
    cells.resize(std::max(cells.size(), cell_count(pot.h(), T)), 0.0);
    return {pot.h(), std::move(cells), T};
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SampledPotential random_piecewise(std::uint64_t seed, double h, double T_min, double T_max,
                                  double amplitude, int max_pieces) {
    if (!(h > 0.0) || !(T_min >= h) || !(T_max >= T_min)) {
        throw ValidationError("random_piecewise needs h <= T_min <= T_max");
    }
    if (max_pieces < 1) throw ValidationError("max_pieces must be at least 1");
    std::mt19937_64 rng(seed);
    const double T = T_min + (T_max - T_min) * unit_uniform(rng);
    const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(T / h)));
    const int pieces = 1 + static_cast<int>(unit_uniform(rng) * max_pieces);
    std::vector<double> cells(n);
    std::size_t start = 0;
    for (int k = 0; k < pieces; ++k) {
        const std::size_t end = k + 1 == pieces ? n : std::min(n, start + static_cast<std::size_t>(
                                                                          unit_uniform(rng) * 2.0 * n / pieces));
        const double value = amplitude * (2.0 * unit_uniform(rng) - 1.0);
        for (std::size_t j = start; j < end; ++j) cells[j] = value;
        start = std::max(start, end);
    }
    return {h, std::move(cells)};
}

namespace {

template <typename Weight>
double accumulate_over(const SampledPotential& pot, double t1, double t2, Weight weight) {
    if (t1 < 0.0 || t2 > pot.T() || t1 > t2) throw RangeError("interval outside [0, T] or reversed");
    double sum = 0.0;
    for (std::size_t j = pot.cell_index(t1); j < pot.size(); ++j) {
        const double start = pot.cell_start(j);
        const double end = start + pot.cell_width(j);
        if (start >= t2) break;
        // Full cells contribute exactly cell_width, matching sigma_intervals.
        double overlap = pot.cell_width(j);
        if (t1 > start) overlap -= t1 - start;
        if (t2 < end) overlap -= end - t2;
        if (overlap > 0.0) sum += weight(pot.cells()[j]) * overlap;
    }
    return sum;
}

}  // namespace

double l2_norm_sq(const SampledPotential& pot, double t1, double t2) {
    return accumulate_over(pot, t1, t2, [](double v) { return v * v; });
}

double l2_norm_sq(const SampledPotential& pot) { return l2_norm_sq(pot, 0.0, pot.T()); }

double integral(const SampledPotential& pot, double t1, double t2) {
    return accumulate_over(pot, t1, t2, [](double v) { return v; });
}

double abs_integral(const SampledPotential& pot, double t1, double t2) {
    return accumulate_over(pot, t1, t2, [](double v) { return std::abs(v); });
}

std::vector<SigmaInterval> sigma_intervals(const SampledPotential& pot, double sigma,
                                           double min_mass) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw ValidationError("sigma must lie in (0, 1)");
    if (!(min_mass > 0.0)) throw ValidationError("min_mass must be positive");

    const auto cells = pot.cells();
    const std::size_t n = cells.size();
    std::vector<double> tail_mass(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) {
        tail_mass[j] = tail_mass[j + 1] + std::abs(cells[j]) * pot.cell_width(j);
    }

    std::vector<SigmaInterval> out;
    std::size_t i = 0;
    while (i < n) {
        if (cells[i] == 0.0) {
            ++i;
            continue;
        }
        double s = 0.0;
        double a = 0.0;
        std::size_t best_end = i;
        double best_mass = 0.0;
        for (std::size_t j = i; j < n; ++j) {
            const double w = pot.cell_width(j);
            s += cells[j] * w;
            a += std::abs(cells[j]) * w;
            if (std::abs(s) >= (1.0 - sigma) * a) {
                best_end = j + 1;
                best_mass = a;
            }
            // a' - |s'| never decreases, so no longer interval can qualify.
            if (a - std::abs(s) > sigma * (a + tail_mass[j + 1])) break;
        }
        if (best_end > i && best_mass >= min_mass) {
            out.push_back({pot.cell_start(i), pot.cell_start(best_end - 1) + pot.cell_width(best_end - 1),
                           sigma, best_mass});
            i = best_end;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace nlft
