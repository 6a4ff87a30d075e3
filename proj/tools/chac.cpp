#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chac/commands.hpp"
#include "chac/config.hpp"

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "configuration file (key = value lines)");
    sub->add_option("--out", c.out_dir, "output directory (default: $CHAC_OUT_DIR, then output_dir)");
    sub->add_option("--set", c.overrides, "override a configuration key, key=value (repeatable)");
}

std::optional<chac::RunConfig> resolve(const Common& c) {
    try {
        chac::RunConfig cfg;
        if (!c.config_path.empty()) cfg = chac::load_config(c.config_path);
        for (const auto& o : c.overrides) chac::apply_override(cfg, o);
        if (!c.out_dir.empty()) {
            cfg.output_dir = c.out_dir;
        } else if (const char* env = std::getenv("CHAC_OUT_DIR"); env != nullptr && *env != '\0') {
            cfg.output_dir = env;
        }
        return cfg;
    } catch (const chac::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return std::nullopt;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cahn-Hilliard/Allen-Cahn P2 finite element solver"};
    app.require_subcommand(1);

    Common sim_opts;
    auto* sim = app.add_subcommand("simulate", "run one simulation and write time series and snapshots");
    add_common(sim, sim_opts);

    Common conv_opts;
    int k_min = 1;
    int k_max = 4;
    int jobs = 1;
    auto* conv = app.add_subcommand("converge", "run a refinement ladder and report inter-grid errors");
    add_common(conv, conv_opts);
    conv->add_option("--k-min", k_min, "coarsest level")->capture_default_str();
    conv->add_option("--k-max", k_max, "finest level")->capture_default_str();
    conv->add_option("--jobs", jobs, "levels simulated concurrently")->capture_default_str();

    Common check_opts;
    auto* check = app.add_subcommand("check", "run 20 steps and verify the discrete invariants");
    add_common(check, check_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : chac::kExitConfig;
    }

    if (*sim) {
        const auto cfg = resolve(sim_opts);
        return cfg ? chac::cmd_simulate(*cfg, std::cout, std::cerr) : chac::kExitConfig;
    }
    if (*conv) {
        const auto cfg = resolve(conv_opts);
        return cfg ? chac::cmd_converge(*cfg, k_min, k_max, jobs, std::cout, std::cerr) : chac::kExitConfig;
    }
    const auto cfg = resolve(check_opts);
    return cfg ? chac::cmd_check(*cfg, std::cout, std::cerr) : chac::kExitConfig;
}
