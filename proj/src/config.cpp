#include "nlft/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace nlft::cli {

namespace {

const std::map<std::string, double> default_tolerances = {
    {"det", 1e-10}, {"wronskian", 1e-10}, {"unimodular", 1e-10}, {"riccati", 1e-6}, {"parseval", 1e-2},
};

const std::map<std::string, std::set<std::string>> section_keys = {
    {"transform", {}},
    {"verify", {"random_count", "random_T_min", "random_T_max", "amplitude", "riccati_samples",
                "riccati_dt", "parseval"}},
    {"resonances", {"half_width", "grid_n", "im_floor", "track_to", "dt", "tau_v", "tau_h"}},
    {"eigenvalues", {"kind", "xmin", "xmax", "track_to", "dt"}},
    {"kernels", {"t_list", "w_window", "w_samples", "grid_n", "fit", "D"}},
    {"converge", {"s_list", "s_count", "s_min", "s_max", "T_list", "box_samples"}},
    {"parseval", {"interval", "max_doublings", "initial_half_width"}},
};

const std::set<std::string> top_level_keys = {"potential", "h", "T", "grid", "tolerances", "output",
                                              "format", "seed", "threads", "s", "C"};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
    return v;
}

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

}  // namespace

double get_number(const json& obj, const std::string& key, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return number(*it, "'" + key + "'");
}

int get_int(const json& obj, const std::string& key, int fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (!it->is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return it->get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (!it->is_string()) throw ConfigError("'" + key + "' must be a string");
    return it->get<std::string>();
}

double RunConfig::tolerance(const std::string& key) const {
    const auto it = tolerances.find(key);
    if (it == tolerances.end()) throw ConfigError("no tolerance named '" + key + "'");
    return it->second;
}

const json& RunConfig::section(const std::string& command) const {
    static const json empty = json::object();
    const auto it = sections.find(command);
    return it == sections.end() ? empty : *it;
}

json parse_config_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.what() already carries "at line L, column C"
        throw ConfigError(origin + ": " + e.what());
    }
}

json read_json_file(const std::string& path) { return parse_config_text(read_text(path), path); }

RunConfig make_config(const json& doc, const std::string& base_dir) {
    require_keys(doc, [] {
        std::set<std::string> keys = top_level_keys;
        for (const auto& [name, _] : section_keys) keys.insert(name);
        return keys;
    }(), "config");

    RunConfig cfg;
    cfg.h = get_number(doc, "h", cfg.h);
    if (!(cfg.h > 0.0)) throw ConfigError("h must be positive");
    if (doc.contains("T") && !doc["T"].is_null()) {
        cfg.T = number(doc["T"], "'T'");
        if (!(*cfg.T > 0.0)) throw ConfigError("T must be positive");
    }

    if (const auto it = doc.find("grid"); it != doc.end()) {
        require_keys(*it, {"zmin", "zmax", "nz", "im"}, "grid");
        cfg.grid.zmin = get_number(*it, "zmin", cfg.grid.zmin);
        cfg.grid.zmax = get_number(*it, "zmax", cfg.grid.zmax);
        cfg.grid.nz = get_int(*it, "nz", cfg.grid.nz);
        cfg.grid.im = get_number(*it, "im", cfg.grid.im);
    }
    if (cfg.grid.nz < 2) throw ConfigError("grid.nz must be at least 2");
    if (!(cfg.grid.zmax > cfg.grid.zmin)) throw ConfigError("grid.zmax must exceed grid.zmin");

    cfg.tolerances = default_tolerances;
    if (const auto it = doc.find("tolerances"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("tolerances must be an object");
        for (const auto& [key, value] : it->items()) {
            if (!default_tolerances.count(key)) throw ConfigError("unknown tolerance '" + key + "'");
            const double v = number(value, "tolerance '" + key + "'");
            if (!(v > 0.0)) throw ConfigError("tolerance '" + key + "' must be positive");
            cfg.tolerances[key] = v;
        }
    }

    cfg.output = get_string(doc, "output", cfg.output);
    cfg.format = get_string(doc, "format", cfg.format);
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
    if (const auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 0) {
            throw ConfigError("seed must be a non-negative integer");
        }
        cfg.seed = it->get<std::uint64_t>();
    }
    cfg.threads = get_int(doc, "threads", cfg.threads);
    if (cfg.threads < 0) throw ConfigError("threads must be non-negative");
    cfg.s = get_number(doc, "s", cfg.s);
    cfg.C = get_number(doc, "C", cfg.C);
    if (!(cfg.C > 0.0)) throw ConfigError("C must be positive");

    cfg.potential = doc.value("potential", json{{"family", "zero"}, {"T", 1.0}});
    if (cfg.potential.is_string()) {
        std::filesystem::path p = cfg.potential.get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        cfg.potential = read_json_file(p.string());
    }
    if (!cfg.potential.is_object()) throw ConfigError("potential must be an object or a file path");
    require_keys(cfg.potential, {"family", "params", "samples", "cells", "h", "T", "description"},
                 "potential");

    for (const auto& [name, keys] : section_keys) {
        if (const auto it = doc.find(name); it != doc.end()) {
            require_keys(*it, keys, name);
            cfg.sections[name] = *it;
        }
    }

    cfg.effective = {{"potential", cfg.potential}, {"h", cfg.h},
                     {"grid", {{"zmin", cfg.grid.zmin}, {"zmax", cfg.grid.zmax}, {"nz", cfg.grid.nz},
                               {"im", cfg.grid.im}}},
                     {"tolerances", cfg.tolerances}, {"format", cfg.format}, {"seed", cfg.seed},
                     {"s", cfg.s}, {"C", cfg.C}, {"sections", cfg.sections}};
    cfg.effective["T"] = cfg.T ? json(*cfg.T) : json(nullptr);
    // validates the potential document early so that errors surface as config errors
    (void)load_potential(cfg);
    return cfg;
}

SampledPotential load_potential(const RunConfig& cfg) {
    const json& p = cfg.potential;
    const double h = get_number(p, "h", cfg.h);
    if (!(h > 0.0)) throw ConfigError("potential h must be positive");
    if (p.contains("cells")) {
        if (p.contains("family")) throw ConfigError("potential has both 'cells' and 'family'");
        const json& cells = p["cells"];
        if (!cells.is_array() || cells.empty()) throw ConfigError("potential cells must be a non-empty array");
        std::vector<double> values;
        for (const auto& v : cells) values.push_back(number(v, "potential cell"));
        SampledPotential pot(h, std::move(values));
        if (p.contains("T")) {
            const double T = number(p["T"], "potential T");
            return T <= pot.T() ? restrict_to(pot, T) : extend_with_zeros(pot, T);
        }
        return pot;
    }
    PotentialSpec spec;
    spec.family = family_from_string(get_string(p, "family", "zero"));
    if (const auto it = p.find("params"); it != p.end()) {
        if (!it->is_object()) throw ConfigError("potential params must be an object");
        for (const auto& [key, value] : it->items()) spec.params[key] = number(value, "parameter '" + key + "'");
    }
    if (const auto it = p.find("samples"); it != p.end()) {
        if (!it->is_array()) throw ConfigError("potential samples must be an array");
        for (const auto& v : *it) spec.samples.push_back(number(v, "potential sample"));
    }
    spec.description = get_string(p, "description", "");
    double T = 0.0;
    if (p.contains("T")) {
        T = number(p["T"], "potential T");
    } else if (cfg.T) {
        T = *cfg.T;
    } else if (spec.family == Family::custom_samples) {
        T = h * static_cast<double>(spec.samples.size());
    } else {
        throw ConfigError("potential length unknown: set potential.T or T");
    }
    return sample(spec, h, T);
}

SampledPotential potential_for_horizon(const RunConfig& cfg, double& T) {
    SampledPotential pot = load_potential(cfg);
    T = cfg.T ? *cfg.T : pot.T();
    if (T > pot.T() * (1.0 + 1e-12)) pot = extend_with_zeros(pot, T);
    return pot;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.effective.dump())));
    return std::string("fnv1a64:") + buf;
}

}  // namespace nlft::cli
