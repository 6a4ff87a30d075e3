#include "chac/model.hpp"

#include <random>
#include <sstream>
#include <string>

#include "chac/errors.hpp"

namespace chac {

PotentialValue potential_eval(const PotentialSpec& p, double rho, double eta) {
    const double C = p.C;
    const double D = p.D;
    const double a = eta * eta + (1.0 - eta) * (1.0 - eta);
    const double da = 4.0 * eta - 2.0;
    const double b = eta * eta * eta + (1.0 - eta) * (1.0 - eta) * (1.0 - eta);
    const double db = 6.0 * eta - 3.0;
    const double r1 = 1.0 - rho;

    PotentialValue v{};
    v.f = C * rho * rho * r1 * r1 + D * (rho * rho + 6.0 * r1 * a - 4.0 * (2.0 - rho) * b + 3.0 * a * a);
    v.f_rho = 2.0 * C * rho * r1 * (1.0 - 2.0 * rho) + D * (2.0 * rho - 6.0 * a + 4.0 * b);
    v.f_eta = D * (6.0 * r1 * da - 4.0 * (2.0 - rho) * db + 6.0 * a * da);
    v.f_rho_rho = C * (2.0 - 12.0 * rho + 12.0 * rho * rho) + 2.0 * D;
    v.f_rho_eta = D * (-6.0 * da + 4.0 * db);
    v.f_eta_eta = D * (24.0 * r1 - 24.0 * (2.0 - rho) + 6.0 * (da * da + 4.0 * a));
    return v;
}

void validate(const ModelParams& params) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidParameter(what);
    };
    require(params.gamma_rho > 0.0, "gamma_rho must be positive");
    require(params.gamma_eta > 0.0, "gamma_eta must be positive");
    require(params.potential.C >= 0.0, "potential C must be nonnegative");
    require(params.potential.D >= 0.0, "potential D must be nonnegative");
    require(params.potential.alpha > 0.0, "potential alpha must be positive");
    require(params.mobility.l22 > 0.0, "mobility l22 must be positive");
    require(params.mobility.c > 0.0, "mobility normal regularization c must be positive");
    require(std::isfinite(params.mobility.l12_scale), "mobility l12_scale must be finite");
}

RegularizedNormal regularized_normal(const Vec2& g, double c) {
    const double s2 = c + g[0] * g[0] + g[1] * g[1];
    const double s = std::sqrt(s2);
    const double inv_s = 1.0 / s;
    const double inv_s3 = inv_s / s2;
    RegularizedNormal out;
    out.n = {g[0] * inv_s, g[1] * inv_s};
    out.dn_dg = {{{inv_s - g[0] * g[0] * inv_s3, -g[0] * g[1] * inv_s3},
                  {-g[1] * g[0] * inv_s3, inv_s - g[1] * g[1] * inv_s3}}};
    return out;
}

MobilityValue mobility_eval(const MobilitySpec& m, const Omega& omega) {
    const RegularizedNormal rn = regularized_normal({omega[2], omega[3]}, m.c);
    const double sigma = m.l12_scale;
    const double k = sigma * sigma / m.l22;
    const Vec2& n = rn.n;

    MobilityValue out{};
    Mat3& L = out.L;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            L[i][j] = (i == j ? 1.0 : 0.0) + k * n[i] * n[j];
        }
        L[i][2] = sigma * n[i];
        L[2][i] = sigma * n[i];
    }
    L[2][2] = m.l22;

    // Only grad(rho) enters the mobility: omega[2], omega[3].
    for (int comp = 0; comp < 2; ++comp) {
        Mat3& dL = out.dL[2 + comp];
        const Vec2 dn{rn.dn_dg[0][comp], rn.dn_dg[1][comp]};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                dL[i][j] = k * (dn[i] * n[j] + n[i] * dn[j]);
            }
            dL[i][2] = sigma * dn[i];
            dL[2][i] = sigma * dn[i];
        }
    }
    return out;
}

bool cholesky_ok(const Mat3& a) {
    double l[3][3] = {};
    for (int j = 0; j < 3; ++j) {
        double d = a[j][j];
        for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
        if (!(d > 0.0)) return false;
        l[j][j] = std::sqrt(d);
        for (int i = j + 1; i < 3; ++i) {
            double s = a[i][j];
            for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = s / l[j][j];
        }
    }
    return true;
}

void check_mobility_spd(const MobilitySpec& m, int samples, double max_grad, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> field(-2.0, 3.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> mag(0.0, max_grad);
    for (int s = 0; s < samples; ++s) {
        const double r = mag(rng);
        const double theta = unit(rng) * 3.141592653589793;
        const Omega w{field(rng), field(rng), r * std::cos(theta), r * std::sin(theta), unit(rng), unit(rng)};
        const MobilityValue mv = mobility_eval(m, w);
        if (!cholesky_ok(mv.L)) {
            std::ostringstream os;
            os << "mobility is not positive definite at grad rho = (" << w[2] << ", " << w[3] << ")";
            throw InvalidParameter(os.str());
        }
    }
}

}  // namespace chac
