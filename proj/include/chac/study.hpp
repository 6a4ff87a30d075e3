#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chac/fespace.hpp"
#include "chac/model.hpp"
#include "chac/scheme.hpp"

namespace chac {

/// Nodal states and interval potentials of one run, streamed to a scratch file.
///
/// Frames are appended in time order: node 0 by on_start(), then node n and the
/// potentials of interval n by on_step().  The scratch directory is removed on
/// destruction.
class TrajectoryStore : public RunObserver {
public:
    TrajectoryStore(const FeSpace& space, const TimeGrid& grid, const std::filesystem::path& scratch_root = {});
    ~TrajectoryStore() override;
    TrajectoryStore(const TrajectoryStore&) = delete;
    TrajectoryStore& operator=(const TrajectoryStore&) = delete;

    void on_start(const State& initial, const DiagnosticsRow& row) override;
    void on_step(const StepRecord& record) override;

    void push_node(const FieldVec& rho, const FieldVec& eta);
    void push_potentials(const FieldVec& mu_rho, const FieldVec& mu_eta);

    [[nodiscard]] const FeSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
    [[nodiscard]] std::size_t n_nodes() const noexcept { return n_nodes_; }
    [[nodiscard]] std::size_t n_intervals() const noexcept { return n_intervals_; }
    /// True once all N+1 nodes and N intervals are stored.
    [[nodiscard]] bool complete() const noexcept { return n_nodes_ == grid_.N + 1 && n_intervals_ == grid_.N; }

    [[nodiscard]] State node(std::size_t n) const;
    /// Potentials of interval n, 1 <= n <= N.
    [[nodiscard]] IntervalPotentials potentials(std::size_t n) const;

private:
    void write_pair(std::fstream& file, const FieldVec& a, const FieldVec& b);
    void read_pair(std::fstream& file, std::size_t frame, FieldVec& a, FieldVec& b) const;

    const FeSpace* space_;
    TimeGrid grid_;
    std::filesystem::path dir_;
    mutable std::fstream nodes_;
    mutable std::fstream pots_;
    std::size_t n_nodes_ = 0;
    std::size_t n_intervals_ = 0;
};

enum class ErrorKind {
    RhoLinfH1,    ///< max over time nodes of the H1 norm of the rho difference
    EtaLinfH1,    ///< same for eta
    MuRhoL2H1,    ///< L2-in-time of the H1 norm of the mu_rho difference
    MuEtaL2L2,    ///< L2-in-time of the L2 norm of the mu_eta difference
};

/// Distance between two trajectories on consecutive levels (or the same level).
/// The coarse trajectory is prolonged into the fine space; its value at a fine
/// node in the middle of a coarse interval is the coarse interval average.
double inter_grid_error(const TrajectoryStore& fine, const TrajectoryStore& coarse, ErrorKind which);

/// Experimental order of convergence log2(err_coarse / err_fine).
double eoc(double err_coarse, double err_fine);

struct ConvergenceRow {
    int k = 0;
    double h = 0.0;
    double tau = 0.0;
    std::array<double, 4> err{};
    std::array<std::optional<double>, 4> eoc{};
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

struct LadderConfig {
    ModelParams params;
    double tau_factor = 0.001;
    double T = 0.1;
    RunOptions run;
    int quad_degree = FeSpace::kMinQuadDegree;
    InitialData initial = benchmark_initial_data();
    std::filesystem::path scratch_dir;
    /// Number of levels simulated concurrently.
    int jobs = 1;
    /// Called after every completed step of every level: (k, step, N).
    std::function<void(int, std::size_t, std::size_t)> progress;
};

/// Number of steps for h = 2^-k and tau = tau_factor * h; throws InvalidParameter
/// unless T is an integer multiple of tau.
std::size_t steps_for_level(double T, double tau_factor, int k);

/// Runs levels k_min..k_max and compares each level with the next finer one.
/// Row k holds the errors between levels k and k+1.
ConvergenceTable run_ladder(const LadderConfig& config, int k_min, int k_max);

}  // namespace chac
