#pragma once

#include <cstddef>

#include "chac/fespace.hpp"
#include "chac/model.hpp"

namespace chac {

/// One line of the per-step time series.
struct DiagnosticsRow {
    std::size_t step = 0;
    double t = 0.0;
    double mass_rho = 0.0;
    double energy = 0.0;
    /// tau * D over the interval that ended at `t`.
    double dissipation_interval = 0.0;
    double energy_identity_residual = 0.0;
    int newton_iters = 0;
    double newton_residual = 0.0;
};

/// Integral of rho over the domain.
double mass(const FeSpace& space, const FieldVec& rho);

/// Free energy: integral of gamma_rho/2 |grad rho|^2 + gamma_eta/2 |grad eta|^2 + f(rho, eta).
double energy(const FeSpace& space, const ModelParams& params, const FieldVec& rho, const FieldVec& eta);

/// Dissipation integral of xi^T L(omega_bar) xi with xi = (grad mu_rho, mu_eta), where
/// omega_bar is built from the interval-averaged fields rho_bar, eta_bar.
double dissipation(const FeSpace& space, const ModelParams& params, const FieldVec& rho_bar, const FieldVec& eta_bar,
                   const FieldVec& mu_rho, const FieldVec& mu_eta);

/// E_next - E_prev + tau * D; zero for an exact solution of the discrete scheme.
inline double energy_identity_residual(double energy_prev, double energy_next, double tau, double dissipation) {
    return energy_next - energy_prev + tau * dissipation;
}

/// Regularized relative energy of (rho, eta) with respect to (rho_hat, eta_hat):
/// gradient and alpha-weighted L2 terms of the differences plus the Bregman
/// distance of f.
double relative_energy(const FeSpace& space, const ModelParams& params, const FieldVec& rho, const FieldVec& eta,
                       const FieldVec& rho_hat, const FieldVec& eta_hat, double alpha);

}  // namespace chac
