#pragma once

// Run configuration of the nlft command-line tool. A JSON document (file or
// defaults) is merged with flag overrides, validated, and hashed so that every
// output file can name the exact configuration that produced it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nlft/errors.hpp"
#include "nlft/potential.hpp"

namespace nlft::cli {

using json = nlohmann::json;

/// Malformed or inconsistent configuration (exit code 1).
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct GridSpec {
    double zmin = -10.0;
    double zmax = 10.0;
    int nz = 201;
    double im = 0.0;  // constant imaginary part of the grid
};

struct RunConfig {
    json potential;  // inline potential document (file references already resolved)
    double h = 0.01;
    std::optional<double> T;  // horizon; defaults to the potential length
    GridSpec grid;
    std::map<std::string, double> tolerances;
    std::string output = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    int threads = 0;
    double s = 0.0;
    double C = 4.0;
    json sections = json::object();  // per-command objects keyed by command name
    json effective;  // canonical document the hash is computed from

    [[nodiscard]] double tolerance(const std::string& key) const;
    /// The section for a command, or an empty object.
    [[nodiscard]] const json& section(const std::string& command) const;
};

/// Parses JSON text. Syntax errors become ConfigError with line and column.
json parse_config_text(const std::string& text, const std::string& origin);
json read_json_file(const std::string& path);

/// Validates a configuration document. Relative potential file paths are
/// resolved against base_dir and inlined.
RunConfig make_config(const json& doc, const std::string& base_dir);

/// Builds the potential described by cfg.potential, sampled with cfg.h.
SampledPotential load_potential(const RunConfig& cfg);

/// Horizon T of the run: cfg.T or the potential length. The potential is
/// zero-extended when T exceeds its length.
SampledPotential potential_for_horizon(const RunConfig& cfg, double& T);

std::uint64_t fnv1a64(std::string_view bytes);

/// "fnv1a64:<16 hex digits>" over the canonical dump of cfg.effective.
std::string config_hash(const RunConfig& cfg);

// Typed access to optional fields of a section.
double get_number(const json& obj, const std::string& key, double fallback);
int get_int(const json& obj, const std::string& key, int fallback);
std::string get_string(const json& obj, const std::string& key, const std::string& fallback);

}  // namespace nlft::cli
