#include "nlft/cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <variant>

#include "CLI11.hpp"
#include "nlft/config.hpp"
#include "nlft/debranges.hpp"
#include "nlft/experiments.hpp"
#include "nlft/parallel.hpp"
#include "nlft/propagator.hpp"
#include "nlft/resonance.hpp"
#include "nlft/riccati.hpp"
#include "nlft/scattering.hpp"

namespace nlft::cli {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

using Cell = std::variant<double, std::string>;

/// Column-oriented output shared by the CSV and JSON writers.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw std::logic_error("row width mismatch");
        rows_.push_back(std::move(row));
    }
    [[nodiscard]] std::size_t size() const { return rows_.size(); }

    void write_csv(std::ostream& os) const {
        for (std::size_t k = 0; k < columns_.size(); ++k) os << (k ? "," : "") << columns_[k];
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (k) os << ',';
                if (const double* d = std::get_if<double>(&row[k])) {
                    os << format_double(*d);
                } else {
                    os << std::get<std::string>(row[k]);
                }
            }
            os << '\n';
        }
    }

    [[nodiscard]] json to_json() const {
        json rows = json::array();
        for (const auto& row : rows_) {
            json r = json::array();
            for (const auto& c : row) {
                if (const double* d = std::get_if<double>(&c)) {
                    r.push_back(std::isfinite(*d) ? json(*d) : json(nullptr));
                } else {
                    r.push_back(std::get<std::string>(c));
                }
            }
            rows.push_back(std::move(r));
        }
        return {{"columns", columns_}, {"rows", std::move(rows)}};
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Context {
    RunConfig cfg;
    std::string command;
    std::ostream& out;
    spdlog::logger& log;

    [[nodiscard]] json meta() const {
        return {{"tool", "nlft"}, {"version", tool_version}, {"command", command},
                {"config_hash", config_hash(cfg)}};
    }

    [[nodiscard]] fs::path path_for(const std::string& stem, const std::string& ext) const {
        fs::create_directories(cfg.output);
        return fs::path(cfg.output) / (stem + "." + ext);
    }

    void write_json(const std::string& stem, json doc) const {
        doc["meta"] = meta();
        const fs::path p = path_for(stem, "json");
        std::ofstream os(p, std::ios::binary);
        os << doc.dump(2) << '\n';
        if (!os) throw ConfigError("cannot write " + p.string());
        log.info("wrote {}", p.string());
    }

    void write_csv(const std::string& stem, const Table& table) const {
        const fs::path p = path_for(stem, "csv");
        std::ofstream os(p, std::ios::binary);
        os << "# tool: nlft " << tool_version << '\n';
        os << "# command: " << command << '\n';
        os << "# config_hash: " << config_hash(cfg) << '\n';
        table.write_csv(os);
        if (!os) throw ConfigError("cannot write " + p.string());
        log.info("wrote {}", p.string());
    }

    /// Writes a table in the configured format, with optional extra JSON fields.
    void write_table(const std::string& stem, const Table& table, json extra = json::object()) const {
        if (cfg.format == "csv") {
            write_csv(stem, table);
            return;
        }
        json doc = table.to_json();
        for (auto& [k, v] : extra.items()) doc[k] = v;
        write_json(stem, std::move(doc));
    }
};

std::vector<cplx> line_grid(const GridSpec& g) {
    std::vector<cplx> z(g.nz);
    for (int k = 0; k < g.nz; ++k) {
        z[k] = cplx(g.zmin + (g.zmax - g.zmin) * k / (g.nz - 1.0), g.im);
    }
    return z;
}

std::vector<double> number_list(const json& section, const std::string& key) {
    std::vector<double> out;
    const auto it = section.find(key);
    if (it == section.end() || it->is_null()) return out;
    if (!it->is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
    for (const auto& v : *it) {
        if (!v.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

/// Potential long enough for a run up to t_needed, zero-extended if necessary.
SampledPotential potential_covering(const RunConfig& cfg, double t_needed) {
    SampledPotential pot = load_potential(cfg);
    if (t_needed > pot.T() * (1.0 + 1e-12)) pot = extend_with_zeros(pot, t_needed);
    return pot;
}

int cmd_transform(Context& ctx) {
    double T = 0.0;
    const SampledPotential pot = potential_for_horizon(ctx.cfg, T);
    const auto grid = line_grid(ctx.cfg.grid);
    ctx.log.info("transform: {} points, T = {}", grid.size(), T);
    const ScatteringData sd = nlft_forward(pot, T, grid);

    Table table({"T", "re_z", "im_z", "re_a", "im_a", "re_b", "im_b", "re_r", "im_r", "log_abs_a"});
    double max_unimodular = 0.0;
    double max_det = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        table.add({T, grid[k].real(), grid[k].imag(), sd.a[k].real(), sd.a[k].imag(), sd.b[k].real(),
                   sd.b[k].imag(), sd.r[k].real(), sd.r[k].imag(), sd.log_abs_a[k]});
        if (!std::isnan(sd.unimodular_defect[k])) {
            max_unimodular = std::max(max_unimodular, sd.unimodular_defect[k]);
        }
        max_det = std::max(max_det, sd.det_defect[k]);
    }
    const bool on_axis = ctx.cfg.grid.im == 0.0;
    json summary = {{"max_det_defect", max_det},
                    {"max_unimodular_defect", on_axis ? json(max_unimodular) : json(nullptr)}};
    ctx.write_table("scattering", table, {{"summary", summary}});

    ctx.out << "max |det M - 1| = " << format_double(max_det) << '\n';
    if (on_axis) ctx.out << "max ||a|^2 - |b|^2 - 1| = " << format_double(max_unimodular) << '\n';
    if (max_det > ctx.cfg.tolerance("det") ||
        (on_axis && max_unimodular > ctx.cfg.tolerance("unimodular"))) {
        ctx.log.error("identity defect beyond tolerance");
        return exit_invariant;
    }
    return exit_ok;
}

struct CheckResult {
    std::string name;
    std::string potential;
    double max_error = 0.0;
    double tolerance = 0.0;
    [[nodiscard]] bool pass() const { return max_error <= tolerance; }
};

int cmd_verify(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const json& sec = cfg.section("verify");
    const int random_count = get_int(sec, "random_count", 0);
    const double random_T_min = get_number(sec, "random_T_min", 1.0);
    const double random_T_max = get_number(sec, "random_T_max", 10.0);
    const double amplitude = get_number(sec, "amplitude", 2.0);
    const int riccati_samples = get_int(sec, "riccati_samples", 4);
    const double riccati_dt = get_number(sec, "riccati_dt", 1e-3);
    const bool check_parseval = sec.value("parseval", true);
    if (random_count < 0 || riccati_samples < 0) throw ConfigError("verify counts must be non-negative");

    struct Subject {
        std::string label;
        SampledPotential pot;
        double T;
    };
    std::vector<Subject> subjects;
    {
        double T = 0.0;
        SampledPotential pot = potential_for_horizon(cfg, T);
        subjects.push_back({"config", std::move(pot), T});
    }
    std::mt19937_64 seeds(cfg.seed);
    for (int k = 0; k < random_count; ++k) {
        SampledPotential pot = random_piecewise(seeds(), cfg.h, random_T_min, random_T_max, amplitude);
        const double T = pot.T();
        subjects.push_back({"random[" + std::to_string(k) + "]", std::move(pot), T});
    }

    const std::vector<cplx> points = invariant_sample_points(cfg.seed);
    std::vector<CheckResult> checks;
    for (std::size_t p = 0; p < subjects.size(); ++p) {
        const Subject& sub = subjects[p];
        std::vector<double> det(points.size()), wr(points.size()), uni(points.size(), 0.0);
        parallel_for(points.size(), [&](std::size_t k) {
            const TransferMatrix m = transfer(sub.pot, sub.T, points[k]);
            det[k] = std::abs(m.det_minus_one());
            wr[k] = std::abs(hermite_biehler(m).wronskian - cplx(0.0, 2.0));
            if (points[k].imag() == 0.0) {
                uni[k] = scattering_point(sub.pot, sub.T, points[k]).unimodular_defect;
            }
        });
        checks.push_back({"det_M", sub.label, *std::max_element(det.begin(), det.end()), cfg.tolerance("det")});
        checks.push_back({"wronskian_2i", sub.label, *std::max_element(wr.begin(), wr.end()),
                          cfg.tolerance("wronskian")});
        checks.push_back({"unimodular", sub.label, *std::max_element(uni.begin(), uni.end()),
                          cfg.tolerance("unimodular")});

        if (riccati_samples > 0) {
            std::mt19937_64 rng(cfg.seed * 7919 + p);
            std::vector<cplx> zs(riccati_samples);
            for (cplx& z : zs) z = cplx(10.0 * unit_uniform(rng) - 5.0, unit_uniform(rng));
            std::vector<double> diff(zs.size());
            parallel_for(zs.size(), [&](std::size_t k) {
                const cplx a = riccati_evolve_moebius(sub.pot, zs[k], sub.T).theta;
                const cplx b = riccati_evolve_rk(sub.pot, zs[k], sub.T, riccati_dt).theta;
                diff[k] = std::abs(a - b);
            });
            checks.push_back({"riccati_cross_method", sub.label, *std::max_element(diff.begin(), diff.end()),
                              cfg.tolerance("riccati")});
        }
        if (p == 0 && check_parseval) {
            const ParsevalReport rep = parseval_check(sub.pot, sub.T, cfg.tolerance("parseval"));
            checks.push_back({"parseval_normalized", sub.label, rep.normalized_rel_err, cfg.tolerance("parseval")});
        }
    }

    bool all = true;
    json list = json::array();
    for (const auto& c : checks) {
        all = all && c.pass();
        list.push_back({{"name", c.name}, {"potential", c.potential}, {"max_error", finite_or_null(c.max_error)},
                        {"tolerance", c.tolerance}, {"pass", c.pass()}});
        ctx.out << (c.pass() ? "PASS " : "FAIL ") << c.name << " [" << c.potential
                << "] max_error=" << format_double(c.max_error) << " tol=" << format_double(c.tolerance) << '\n';
    }
    ctx.write_json("verify", {{"checks", list}, {"pass", all}});
    return all ? exit_ok : exit_invariant;
}

int cmd_resonances(Context& ctx) {
    const json& sec = ctx.cfg.section("resonances");
    double T = 0.0;
    (void)potential_for_horizon(ctx.cfg, T);
    const std::optional<double> track_to =
        sec.contains("track_to") ? std::optional<double>(get_number(sec, "track_to", 0.0)) : std::nullopt;
    const SampledPotential pot = potential_covering(ctx.cfg, std::max(T, track_to.value_or(T)));

    Box box{ctx.cfg.s, get_number(sec, "half_width", ctx.cfg.C / T), get_int(sec, "grid_n", 16)};
    const double im_floor = get_number(sec, "im_floor", default_im_floor);
    const auto zeros = find_zeros(pot, T, box, im_floor);
    ctx.log.info("resonances: {} zeros in the box at t = {}", zeros.size(), T);

    Table table({"t", "re_z", "im_z", "re_theta_z", "im_theta_z", "residual", "label"});
    json statuses = json::array();
    if (!track_to) {
        for (const auto& z : zeros) {
            table.add({T, z.z.real(), z.z.imag(), z.theta_z.real(), z.theta_z.imag(), z.residual, std::string()});
        }
    } else {
        const double dt = get_number(sec, "dt", 1e-3);
        const double tau_v = get_number(sec, "tau_v", default_tau_v);
        const double tau_h = get_number(sec, "tau_h", default_tau_h);
        std::vector<ResonanceTrack> tracks(zeros.size());
        parallel_for(zeros.size(), [&](std::size_t k) {
            tracks[k] = track_resonance(pot, zeros[k].z, T, *track_to, dt, im_floor);
        });
        for (const auto& track : tracks) {
            const auto labels = step_labels(track, tau_v, tau_h);
            for (std::size_t k = 0; k < track.samples.size(); ++k) {
                const TrackSample& s = track.samples[k];
                std::string label;
                if (k > 0 && labels[k - 1]) label = *labels[k - 1] == MotionLabel::V ? "V" : "H";
                table.add({s.t, s.z.real(), s.z.imag(), s.theta_z.real(), s.theta_z.imag(), s.residual, label});
            }
            statuses.push_back(to_string(track.status));
        }
    }
    ctx.write_table("resonance", table, {{"track_status", statuses}});
    ctx.out << zeros.size() << " zero(s) of theta in Q(" << format_double(box.s) << ", "
            << format_double(box.half_width) << ") at t = " << format_double(T) << '\n';
    return exit_ok;
}

int cmd_eigenvalues(Context& ctx) {
    const json& sec = ctx.cfg.section("eigenvalues");
    double T = 0.0;
    (void)potential_for_horizon(ctx.cfg, T);
    const std::optional<double> track_to =
        sec.contains("track_to") ? std::optional<double>(get_number(sec, "track_to", 0.0)) : std::nullopt;
    const SampledPotential pot = potential_covering(ctx.cfg, std::max(T, track_to.value_or(T)));
    const double xmin = get_number(sec, "xmin", ctx.cfg.grid.zmin);
    const double xmax = get_number(sec, "xmax", ctx.cfg.grid.zmax);
    const std::string kind_name = get_string(sec, "kind", "both");
    std::vector<EigenKind> kinds;
    if (kind_name == "NN" || kind_name == "both") kinds.push_back(EigenKind::NN);
    if (kind_name == "ND" || kind_name == "both") kinds.push_back(EigenKind::ND);
    if (kinds.empty()) throw ConfigError("eigenvalues.kind must be NN, ND or both");

    Table table({"t", "kind", "track", "x", "velocity"});
    int track_id = 0;
    int count = 0;
    bool monotone = true;
    for (const EigenKind kind : kinds) {
        const auto xs = find_eigenvalues(pot, T, kind, xmin, xmax);
        count += static_cast<int>(xs.size());
        if (!track_to) {
            for (const double x : xs) {
                const ThetaDerivatives td = theta_derivs(transfer_derivative(pot, T, cplx(x, 0.0), 1));
                const cplx sign = kind == EigenKind::NN ? cplx(0.0, -2.0) : cplx(0.0, 2.0);
                table.add({T, to_string(kind), static_cast<double>(track_id++), x, (sign * x / td.theta_z).real()});
            }
            continue;
        }
        const double dt = get_number(sec, "dt", 1e-3);
        std::vector<EigenTrack> tracks(xs.size());
        parallel_for(xs.size(), [&](std::size_t k) { tracks[k] = track_eigenvalue(pot, kind, xs[k], T, *track_to, dt); });
        for (const auto& tr : tracks) {
            monotone = monotone && tr.monotone;
            for (const auto& s : tr.samples) {
                table.add({s.t, to_string(kind), static_cast<double>(track_id), s.x, s.velocity});
            }
            ++track_id;
        }
    }
    ctx.write_table("eigenvalues", table, {{"monotone", monotone}});
    ctx.out << count << " eigenvalue(s) in [" << format_double(xmin) << ", " << format_double(xmax)
            << "] at t = " << format_double(T) << '\n';
    if (track_to) ctx.out << "tracks monotone: " << (monotone ? "yes" : "no") << '\n';
    return exit_ok;
}

int cmd_kernels(Context& ctx) {
    const json& sec = ctx.cfg.section("kernels");
    double T = 0.0;
    (void)potential_for_horizon(ctx.cfg, T);
    std::vector<double> t_list = number_list(sec, "t_list");
    if (t_list.empty()) t_list.push_back(T);
    const double t_max = *std::max_element(t_list.begin(), t_list.end());
    const SampledPotential pot = potential_covering(ctx.cfg, std::max(T, t_max));
    std::vector<double> window = number_list(sec, "w_window");
    if (window.empty()) window = {0.75 * pot.T(), pot.T()};
    if (window.size() != 2) throw ConfigError("kernels.w_window must hold two numbers");
    const int grid_n = get_int(sec, "grid_n", 16);
    const std::string fit = get_string(sec, "fit", "auto");
    if (fit != "auto" && fit != "sine" && fit != "exp" && fit != "none") {
        throw ConfigError("kernels.fit must be auto, sine, exp or none");
    }
    const double s = ctx.cfg.s;
    const double C = ctx.cfg.C;
    const double D = get_number(sec, "D", C);
    const WEstimate w = estimate_w(pot, s, window[0], window[1], get_int(sec, "w_samples", 16));
    ctx.log.info("kernels: w_hat = {} (spread {})", w.w_hat, w.spread);

    Table table({"t", "s", "C", "w_hat", "gap", "fit_kind", "re_alpha", "im_alpha", "x", "y", "residual"});
    for (const double t : t_list) {
        const double gap = universality_gap(pot, s, t, C, w.w_hat, grid_n);
        std::string kind = "none";
        cplx alpha(nan, nan);
        double x = nan, y = nan, residual = nan;
        std::string want = fit;
        if (fit == "auto") want = find_zeros(pot, t, Box{s, C / t, 16}).empty() ? "exp" : "sine";
        try {
            if (want == "sine") {
                const SineFit f = hb_sine_fit(pot, s, t, C, grid_n);
                kind = "sine";
                alpha = f.alpha;
                x = f.x;
                y = f.y;
                residual = f.residual;
            } else if (want == "exp") {
                const ExpFit f = hb_exp_fit(pot, s, t, D, grid_n);
                kind = "exp";
                alpha = f.alpha;
                residual = f.residual;
            }
        } catch (const PreconditionError& e) {
            ctx.log.warn("t = {}: no {} fit ({})", t, want, e.what());
        }
        table.add({t, s, C, w.w_hat, gap, kind, alpha.real(), alpha.imag(), x, y, residual});
        ctx.out << "t=" << format_double(t) << " gap=" << format_double(gap) << " fit=" << kind << '\n';
    }
    ctx.write_table("kernels", table,
                    {{"w_window", window}, {"w_spread", w.spread}, {"w_tilde_hat", w.w_tilde_hat}});
    return exit_ok;
}

int cmd_converge(Context& ctx) {
    const json& sec = ctx.cfg.section("converge");
    double T = 0.0;
    (void)potential_for_horizon(ctx.cfg, T);
    std::vector<double> s_list = number_list(sec, "s_list");
    if (s_list.empty()) {
        s_list = seeded_uniform(ctx.cfg.seed, get_int(sec, "s_count", 20), get_number(sec, "s_min", -5.0),
                                get_number(sec, "s_max", 5.0));
    }
    std::vector<double> T_list = number_list(sec, "T_list");
    if (T_list.empty()) T_list = {T / 16, T / 8, T / 4, T / 2, T};
    const double t_max = *std::max_element(T_list.begin(), T_list.end());
    const SampledPotential pot = potential_covering(ctx.cfg, t_max);
    const ConvergenceTable table =
        run_convergence(pot, s_list, T_list, ctx.cfg.C, get_int(sec, "box_samples", 8), ctx.cfg.seed);

    auto to_json = [](const std::vector<std::vector<double>>& m) {
        json out = json::array();
        for (const auto& row : m) {
            json r = json::array();
            for (double v : row) r.push_back(finite_or_null(v));
            out.push_back(std::move(r));
        }
        return out;
    };
    Table csv({"s", "T", "err", "cauchy_err"});
    int failures = 0;
    for (std::size_t i = 0; i < s_list.size(); ++i) {
        for (std::size_t j = 0; j < T_list.size(); ++j) {
            csv.add({s_list[i], T_list[j], table.err[i][j], table.cauchy_err[i][j]});
            if (!table.failure[i][j].empty()) {
                ++failures;
                ctx.log.warn("s = {}, T = {}: {}", s_list[i], T_list[j], table.failure[i][j]);
            }
        }
    }
    ctx.write_json("converge", {{"s", s_list},
                                {"T", T_list},
                                {"C", ctx.cfg.C},
                                {"err", to_json(table.err)},
                                {"cauchy_err", to_json(table.cauchy_err)},
                                {"reference_T", table.reference_T},
                                {"failure", table.failure}});
    ctx.write_csv("converge", csv);
    for (std::size_t j = 0; j < T_list.size(); ++j) {
        ctx.out << "T=" << format_double(T_list[j]) << " median_err=" << format_double(table.median_err(j)) << '\n';
    }
    return failures ? exit_numerical : exit_ok;
}

json parseval_json(const ParsevalReport& r) {
    return {{"lhs", r.lhs},
            {"rhs", r.rhs},
            {"rel_err", r.rel_err},
            {"domain_half_width", r.domain_half_width},
            {"refinement_levels", r.refinement_levels},
            {"normalization", r.normalization},
            {"normalized_rel_err", r.normalized_rel_err}};
}

int cmd_parseval(Context& ctx) {
    const json& sec = ctx.cfg.section("parseval");
    double T = 0.0;
    const SampledPotential pot = potential_for_horizon(ctx.cfg, T);
    ParsevalOptions opt;
    opt.max_doublings = get_int(sec, "max_doublings", opt.max_doublings);
    opt.initial_half_width = get_number(sec, "initial_half_width", opt.initial_half_width);
    const std::vector<double> interval = number_list(sec, "interval");
    if (!interval.empty() && interval.size() != 2) throw ConfigError("parseval.interval must hold two numbers");
    const double t1 = interval.empty() ? 0.0 : interval[0];
    const double t2 = interval.empty() ? T : interval[1];
    const double tol = ctx.cfg.tolerance("parseval");

    ParsevalReport rep;
    bool converged = true;
    try {
        rep = interval.empty() ? parseval_check(pot, T, tol, opt) : interval_parseval_check(pot, t1, t2, tol, opt);
    } catch (const ParsevalNonConvergence& e) {
        ctx.log.error("{}", e.what());
        rep = e.report;
        converged = false;
    }
    json doc = parseval_json(rep);
    doc["t1"] = t1;
    doc["t2"] = t2;
    doc["converged"] = converged;
    ctx.write_json("parseval", doc);
    ctx.out << "lhs=" << format_double(rep.lhs) << " rhs=" << format_double(rep.rhs)
            << " rel_err=" << format_double(rep.rel_err) << " normalized_rel_err=" << format_double(rep.normalized_rel_err)
            << '\n';
    return converged ? exit_ok : exit_numerical;
}

spdlog::level::level_enum log_level_from_env() {
    const char* env = std::getenv("NLFT_LOG");
    if (!env) return spdlog::level::warn;
    const std::string v = env;
    if (v == "error") return spdlog::level::err;
    if (v == "warn") return spdlog::level::warn;
    if (v == "info") return spdlog::level::info;
    if (v == "debug") return spdlog::level::debug;
    return spdlog::level::warn;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    spdlog::logger log("nlft", sink);
    log.set_pattern("nlft: [%l] %v");
    log.set_level(log_level_from_env());

    CLI::App app{"Nonlinear Fourier transform of real Dirac systems", "nlft"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("nlft ") + tool_version);

    std::string config_path;
    std::optional<std::string> out_dir, format;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> T, zmin, zmax, s, C;
    std::optional<int> nz;
    double corruption = 0.0;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--T", T, "time horizon");
    app.add_option("--zmin", zmin, "grid start");
    app.add_option("--zmax", zmax, "grid end");
    app.add_option("--nz", nz, "grid points");
    app.add_option("--s", s, "real base point");
    app.add_option("--C", C, "box scale");
    app.add_option("--debug-corrupt-propagator", corruption)->group("");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"transform", "scattering data a, b, r on a grid"},
        {"verify", "invariant suite (det M, Wronskian, |a|^2-|b|^2, Riccati, Parseval)"},
        {"resonances", "zeros of theta in a box, optionally tracked in time"},
        {"eigenvalues", "NN / ND eigenvalues, optionally tracked in time"},
        {"kernels", "universality gap and Hermite-Biehler fits"},
        {"converge", "convergence table of r_T near real points"},
        {"parseval", "nonlinear Parseval report"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    struct CorruptionGuard {
        ~CorruptionGuard() { debug::set_cell_corruption(0.0); }
    } guard;
    debug::set_cell_corruption(corruption);

    try {
        json doc = json::object();
        std::string base_dir;
        if (!config_path.empty()) {
            doc = read_json_file(config_path);
            base_dir = fs::path(config_path).parent_path().string();
        }
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        if (out_dir) doc["output"] = *out_dir;
        if (format) doc["format"] = *format;
        if (threads) doc["threads"] = *threads;
        if (seed) doc["seed"] = *seed;
        if (T) doc["T"] = *T;
        if (zmin) doc["grid"]["zmin"] = *zmin;
        if (zmax) doc["grid"]["zmax"] = *zmax;
        if (nz) doc["grid"]["nz"] = *nz;
        if (s) doc["s"] = *s;
        if (C) doc["C"] = *C;

        Context ctx{make_config(doc, base_dir), command, out, log};
        set_max_threads(static_cast<unsigned>(ctx.cfg.threads));
        log.debug("config hash {}", config_hash(ctx.cfg));

        if (command == "transform") return cmd_transform(ctx);
        if (command == "verify") return cmd_verify(ctx);
        if (command == "resonances") return cmd_resonances(ctx);
        if (command == "eigenvalues") return cmd_eigenvalues(ctx);
        if (command == "kernels") return cmd_kernels(ctx);
        if (command == "converge") return cmd_converge(ctx);
        if (command == "parseval") return cmd_parseval(ctx);
        return exit_usage;
    } catch (const InvariantViolation& e) {
        log.error("invariant violation: {}", e.what());
        return exit_invariant;
    } catch (const NumericalError& e) {
        log.error("numerical failure: {}", e.what());
        return exit_numerical;
    } catch (const Error& e) {
        log.error("{}", e.what());
        return exit_usage;
    } catch (const json::exception& e) {
        log.error("config: {}", e.what());
        return exit_usage;
    } catch (const fs::filesystem_error& e) {
        log.error("{}", e.what());
        return exit_usage;
    }
}

}  // namespace nlft::cli
