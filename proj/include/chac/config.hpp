#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chac/model.hpp"
#include "chac/scheme.hpp"

namespace chac {

/// Malformed or invalid configuration. line() is 0 when the problem is not tied
/// to a line of a configuration file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what) : std::runtime_error(what), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

struct RunConfig {
    int mesh_k = 4;
    double tau_factor = 0.001;
    double T = 0.1;
    double gamma_rho = 1e-3;
    double gamma_eta = 1e-3;
    double C = 1.0;
    double D = 0.062;
    double alpha = 2.0;
    double l22 = 1000.0;
    double l12_scale = 31.622776601683793;
    double normal_c = 1.0;
    double newton_tol = 1e-11;
    double newton_abs_floor = 1e-13;
    int newton_max_iter = 25;
    int quad_degree = 8;
    int time_quad_points = 2;
    /// Write a VTK snapshot every this many steps; 0 disables snapshots.
    int snapshot_every = 0;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    [[nodiscard]] double h() const;
    [[nodiscard]] double tau() const;
    [[nodiscard]] std::size_t n_steps() const;
    [[nodiscard]] ModelParams model() const;
    [[nodiscard]] RunOptions run_options() const;
};

/// Names of all accepted keys, in file order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Throws ConfigError.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value, int line = 0);

/// Parses `key = value` lines; `#` starts a comment. Starts from `base`.
RunConfig parse_config(std::string_view text, const RunConfig& base = {});
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

/// Applies a `key=value` override.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// Checks ranges, the time grid and sampled positive definiteness of the mobility.
void validate_config(const RunConfig& cfg);

/// The effective configuration, one `key = value` per line, plus derived h, tau and N as comments.
std::string format_config(const RunConfig& cfg);

}  // namespace chac
