#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

#include "chac/scheme.hpp"
#include "chac/study.hpp"

namespace chac {

inline constexpr const char* kTimeseriesHeader =
    "step,t,mass_rho,energy,dissipation_interval,energy_identity_residual,newton_iters,newton_residual";
inline constexpr const char* kConvergenceHeader =
    "k,h,tau,err_rho,eoc_rho,err_eta,eoc_eta,err_mu_rho,eoc_mu_rho,err_mu_eta,eoc_mu_eta";

std::string format_row(const DiagnosticsRow& row);

/// Appends one CSV line per step, starting with the initial row.
class TimeseriesWriter : public RunObserver {
public:
    explicit TimeseriesWriter(const std::filesystem::path& path);
    void on_start(const State& initial, const DiagnosticsRow& row) override;
    void on_step(const StepRecord& record) override;

private:
    std::ofstream out_;
};

/// Legacy ASCII VTK of (rho, eta): each element is written as four linear
/// sub-triangles through its six nodes, unwrapped across the periodic seams.
void write_vtk(const std::filesystem::path& path, const FeSpace& space, const State& state);

/// Writes snapshot_NNNNNN.vtk at step 0 and every `every` steps.
class SnapshotWriter : public RunObserver {
public:
    SnapshotWriter(const FeSpace& space, std::filesystem::path dir, int every);
    void on_start(const State& initial, const DiagnosticsRow& row) override;
    void on_step(const StepRecord& record) override;

private:
    void write(const State& s, std::size_t step) const;
    const FeSpace* space_;
    std::filesystem::path dir_;
    int every_;
};

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceTable& table);
void print_convergence_table(std::ostream& os, const ConvergenceTable& table);

}  // namespace chac
