#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chac/diagnostics.hpp"
#include "chac/fespace.hpp"
#include "chac/model.hpp"
#include "chac/sparse.hpp"

namespace chac {

/// Uniform time grid t^n = n * T / N.
struct TimeGrid {
    double T = 0.1;
    std::size_t N = 0;

    [[nodiscard]] double tau() const { return N == 0 ? 0.0 : T / static_cast<double>(N); }
    [[nodiscard]] double time(std::size_t n) const { return static_cast<double>(n) * tau(); }
};

/// Nodal fields at a time node.
struct State {
    FieldVec rho;
    FieldVec eta;
    double time = 0.0;
};

/// Chemical potentials, constant over one time interval.
struct IntervalPotentials {
    FieldVec mu_rho;
    FieldVec mu_eta;
};

struct NewtonOpts {
    /// Relative to the residual of the initial guess.
    double tol_residual = 1e-11;
    double abs_floor = 1e-13;
    int max_iter = 25;
    /// Compare the assembled Jacobian with a directional finite difference at the
    /// first iterate; throws on mismatch above 1e-6.
    bool fd_jacobian_check = false;
};

struct StepStats {
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
};

struct StepResult {
    State next;
    IntervalPotentials pots;
    StepStats stats;
};

/// Packed unknown vector (rho^n, eta^n, mu_rho, mu_eta) of one time interval.
struct StepUnknowns {
    State next;
    IntervalPotentials pots;
};

/// Per-interval nonlinear system of the Petrov-Galerkin scheme and its Newton solver.
///
/// Unknowns and residual blocks are ordered (rho^n, eta^n, mu_rho, mu_eta) and
/// (R1, R2, R3, R4):
///   R1 = M(rho^n - rho^{n-1}) + tau [A11(w) mu_rho + B12(w) mu_eta]
///   R2 = M(eta^n - eta^{n-1}) + tau [B12(w)^T mu_rho + C22(w) mu_eta]
///   R3 = tau [M mu_rho - gamma_rho K rho_bar - F_rho]
///   R4 = tau [M mu_eta - gamma_eta K eta_bar - F_eta]
/// with w the interval average of (rho, eta, grad rho, grad eta), rho_bar the
/// interval average of rho, and F the time integral of the potential
/// derivatives along the linear-in-time path, by Gauss-Legendre in time.
class Stepper {
public:
    Stepper(const FeSpace& space, const ModelParams& params, int time_quad_points = 2);

    [[nodiscard]] const FeSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t n_unknowns() const noexcept { return 4 * space_->n_dofs(); }

    [[nodiscard]] std::vector<double> residual(const State& prev, const StepUnknowns& x, double tau) const;
    [[nodiscard]] SparseMat jacobian(const State& prev, const StepUnknowns& x, double tau) const;

    /// Initial Newton guess: frozen fields, potentials from (R3, R4) at the previous state.
    [[nodiscard]] StepUnknowns initial_guess(const State& prev) const;

    StepResult step(const State& prev, double tau, const NewtonOpts& opts);
    StepResult step_from(const State& prev, StepUnknowns guess, double tau, const NewtonOpts& opts);

    [[nodiscard]] std::vector<double> pack(const StepUnknowns& x) const;
    [[nodiscard]] StepUnknowns unpack(std::span<const double> v, double time) const;

private:
    template <bool WithJacobian>
    void assemble(const State& prev, const StepUnknowns& x, double tau, std::vector<double>* res,
                  std::vector<double>* jac_values) const;

    const FeSpace* space_;
    ModelParams params_;
    LineRule time_rule_;
    ElementPattern scalar_;
    SparseMat jac_pattern_;
    /// For element e, local unknown pair (row block br, a; col block bc, b) the
    /// position in jac_pattern_ values, or npos for structurally zero blocks.
    std::vector<std::size_t> jac_positions_;
    SparseMat mass_;
    SparseMat stiffness_;
    SparseLU mass_lu_;
    SparseLU jac_lu_;
};

/// Free-function forms of the Stepper operations.
std::vector<double> assemble_step_residual(const FeSpace& space, const ModelParams& params, const State& prev,
                                           const State& next, const IntervalPotentials& pots, double tau);
SparseMat assemble_step_jacobian(const FeSpace& space, const ModelParams& params, const State& prev,
                                 const State& next, const IntervalPotentials& pots, double tau);
StepResult step(const FeSpace& space, const ModelParams& params, const State& prev, double tau,
                const NewtonOpts& opts = {});

/// Analytic initial data and its gradient.
struct InitialData {
    ScalarFn rho;
    GradientFn grad_rho;
    ScalarFn eta;
    GradientFn grad_eta;
};

/// rho_0 = 0.5 + 0.5 sin(2 pi x) sin(2 pi y),  eta_0 = 0.5 + 0.5 sin(4 pi x) sin(2 pi y).
InitialData benchmark_initial_data();

/// H1 projection of the analytic data.
State project_initial(const FeSpace& space, const InitialData& data);

/// Everything known about one completed interval.
struct StepRecord {
    const State& prev;
    const State& next;
    const IntervalPotentials& pots;
    const DiagnosticsRow& row;
};

/// Receives the initial state and each completed step of run().
class RunObserver {
public:
    virtual ~RunObserver() = default;
    virtual void on_start(const State& /*initial*/, const DiagnosticsRow& /*row*/) {}
    virtual void on_step(const StepRecord& /*record*/) {}
};

struct RunOptions {
    NewtonOpts newton;
    int time_quad_points = 2;
};

/// Projects the initial data, then advances N steps, reporting to every observer.
/// Step failures are rethrown as StepFailure carrying the failing step index.
State run(const FeSpace& space, const ModelParams& params, const TimeGrid& grid, const InitialData& initial,
          std::span<RunObserver* const> observers, const RunOptions& opts = {});

}  // namespace chac
