#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "chac/mesh.hpp"

namespace chac {

/// Two-field quartic free-energy density
///   f(rho, eta) = C rho^2 (1-rho)^2
///               + D [ rho^2 + 6 (1-rho) a(eta) - 4 (2-rho) b(eta) + 3 a(eta)^2 ]
/// with a(eta) = eta^2 + (1-eta)^2 and b(eta) = eta^3 + (1-eta)^3.
struct PotentialSpec {
    double C = 1.0;
    double D = 0.062;
    /// Convexity shift; only used by the relative-energy diagnostic.
    double alpha = 2.0;
};

struct PotentialValue {
    double f;
    double f_rho;
    double f_eta;
    double f_rho_rho;
    double f_rho_eta;
    double f_eta_eta;
};

PotentialValue potential_eval(const PotentialSpec& p, double rho, double eta);

/// Mobility built from the regularized normal n = grad(rho) / sqrt(c + |grad(rho)|^2):
///   L12 = l12_scale * n,  L22 = l22,  L11 = I + L12 L12^T / L22.
struct MobilitySpec {
    double l22 = 1000.0;
    double l12_scale = std::sqrt(1000.0);
    double c = 1.0;
};

struct ModelParams {
    double gamma_rho = 1e-3;
    double gamma_eta = 1e-3;
    PotentialSpec potential;
    MobilitySpec mobility;
};

/// Throws InvalidParameter when a parameter violates its constraint (positive
/// gammas, C, D >= 0, alpha > 0, l22 > 0, c > 0).
void validate(const ModelParams& params);

struct RegularizedNormal {
    Vec2 n;
    Mat2 dn_dg;
};

RegularizedNormal regularized_normal(const Vec2& g, double c);

/// omega = (rho, eta, d_x rho, d_y rho, d_x eta, d_y eta).
using Omega = std::array<double, 6>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// 3x3 mobility with rows/columns ordered (grad slot x, grad slot y, scalar slot),
/// so that the dissipation density is xi^T L xi for xi = (grad mu_rho, mu_eta).
/// `dL[k]` is the partial derivative of L with respect to omega[k].
struct MobilityValue {
    Mat3 L;
    std::array<Mat3, 6> dL;
};

MobilityValue mobility_eval(const MobilitySpec& m, const Omega& omega);

/// Sampled positive-definiteness check of the mobility (Cholesky on
/// `samples` pseudo-random arguments with |grad rho| up to `max_grad`).
/// Throws InvalidParameter naming the first failing argument.
void check_mobility_spd(const MobilitySpec& m, int samples = 1000, double max_grad = 1e3,
                        std::uint64_t seed = 12345);

/// True when the symmetric 3x3 matrix admits a Cholesky factorization.
bool cholesky_ok(const Mat3& a);

}  // namespace chac
