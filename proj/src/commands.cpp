#include "chac/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "chac/errors.hpp"
#include "chac/output.hpp"
#include "chac/study.hpp"

namespace chac {

namespace fs = std::filesystem;

namespace {

class RowCollector : public RunObserver {
public:
    std::vector<DiagnosticsRow> rows;
    void on_start(const State&, const DiagnosticsRow& row) override { rows.push_back(row); }
    void on_step(const StepRecord& r) override { rows.push_back(r.row); }
};

FeSpace space_for(const RunConfig& cfg) {
    return build_space(build_periodic_mesh(std::size_t{1} << cfg.mesh_k), cfg.quad_degree);
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate_config(cfg);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }
    const fs::path dir = cfg.output_dir;
    try {
        fs::create_directories(dir);
        std::ofstream(dir / "run.cfg") << format_config(cfg);
        const FeSpace space = space_for(cfg);
        const TimeGrid grid{cfg.T, cfg.n_steps()};
        TimeseriesWriter series(dir / "timeseries.csv");
        SnapshotWriter snapshots(space, dir, cfg.snapshot_every);
        RowCollector rows;
        RunObserver* observers[] = {&series, &snapshots, &rows};
        run(space, cfg.model(), grid, benchmark_initial_data(), observers, cfg.run_options());
        const DiagnosticsRow& last = rows.rows.back();
        out << "completed " << grid.N << " steps, h = " << cfg.h() << ", tau = " << grid.tau()
            << ", final energy = " << last.energy << '\n'
            << "output: " << dir.string() << '\n';
    } catch (const StepFailure& ex) {
        err << "solver failure: " << ex.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_converge(const RunConfig& cfg, int k_min, int k_max, int jobs, std::ostream& out, std::ostream& err) {
    LadderConfig lc;
    try {
        validate_config(cfg);
        if (k_min < 1 || k_max <= k_min) throw ConfigError(0, "need 1 <= k_min < k_max");
        if (jobs < 1) throw ConfigError(0, "jobs must be >= 1");
        for (int k = k_min; k <= k_max; ++k) {
            try {
                (void)steps_for_level(cfg.T, cfg.tau_factor, k);
            } catch (const InvalidParameter& ex) {
                throw ConfigError(0, ex.what());
            }
        }
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }
    lc.params = cfg.model();
    lc.tau_factor = cfg.tau_factor;
    lc.T = cfg.T;
    lc.run = cfg.run_options();
    lc.quad_degree = cfg.quad_degree;
    lc.jobs = jobs;
    lc.progress = [&err](int k, std::size_t step, std::size_t n) {
        if (step == n || (n >= 10 && step % (n / 10) == 0)) {
            err << "  k=" << k << ": step " << step << " / " << n << '\n';
        }
    };
    const fs::path dir = cfg.output_dir;
    try {
        fs::create_directories(dir);
        const ConvergenceTable table = run_ladder(lc, k_min, k_max);
        write_convergence_csv(dir / "convergence.csv", table);
        print_convergence_table(out, table);
    } catch (const StepFailure& ex) {
        err << "solver failure: " << ex.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_check(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
    constexpr std::size_t kSteps = 20;
    RunConfig cfg = cfg_in;
    try {
        validate_config(cfg);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kExitConfig;
    }
    RowCollector rows;
    try {
        const FeSpace space = space_for(cfg);
        const TimeGrid grid{kSteps * cfg.tau(), kSteps};
        RunObserver* observers[] = {&rows};
        run(space, cfg.model(), grid, benchmark_initial_data(), observers, cfg.run_options());
    } catch (const std::exception& ex) {
        err << "solver failure: " << ex.what() << '\n';
        out << "FAIL solver\n";
        return kExitSolver;
    }

    const auto& r = rows.rows;
    const double m0 = r.front().mass_rho;
    double mass_drift = 0.0;
    double identity = 0.0;
    double increase = 0.0;
    int max_iters = 0;
    for (std::size_t n = 1; n < r.size(); ++n) {
        mass_drift = std::max(mass_drift, std::abs(r[n].mass_rho - m0) / std::abs(m0));
        identity = std::max(identity, std::abs(r[n].energy_identity_residual));
        increase = std::max(increase, r[n].energy - r[n - 1].energy);
        max_iters = std::max(max_iters, r[n].newton_iters);
    }
    bool all = true;
    auto line = [&](bool ok, const char* name, double value, double tol) {
        all = all && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s %-18s %.3e (tol %.1e)\n", ok ? "PASS" : "FAIL", name, value, tol);
        out << buf;
    };
    line(mass_drift <= 1e-11, "mass_conservation", mass_drift, 1e-11);
    line(identity <= 1e-10, "energy_identity", identity, 1e-10);
    line(increase <= 1e-10, "energy_decay", increase, 1e-10);
    line(max_iters <= 10, "newton_iterations", max_iters, 10);
    return all ? kExitOk : kExitSolver;
}

}  // namespace chac
