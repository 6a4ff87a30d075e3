#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chac/errors.hpp"
#include "chac/model.hpp"

namespace chac {
namespace {

TEST(Potential, ValuesAtPureStates) {
    const PotentialSpec p;
    // f reduces to C rho^2 (1-rho)^2 + D (1-rho)^2 + 12 D eta^2 (1-eta)^2 + const
    const double c0 = potential_eval(p, 1.0, 1.0).f;
    EXPECT_NEAR(potential_eval(p, 1.0, 0.0).f, c0, 1e-15);
    EXPECT_NEAR(potential_eval(p, 0.0, 1.0).f - c0, p.D, 1e-15);
    EXPECT_NEAR(potential_eval(p, 0.5, 0.5).f - c0, p.C / 16.0 + p.D / 4.0 + 12.0 * p.D / 16.0, 1e-15);
}

TEST(Potential, DerivativesMatchCentralDifferences) {
    const PotentialSpec p;
    constexpr double h = 1e-5;
    for (double rho : {-0.3, 0.0, 0.2, 0.5, 0.93, 1.4}) {
        for (double eta : {-0.2, 0.1, 0.5, 0.77, 1.3}) {
            const PotentialValue v = potential_eval(p, rho, eta);
            const auto fd = [&](auto get, double dr, double de) {
                return (get(potential_eval(p, rho + dr, eta + de)) - get(potential_eval(p, rho - dr, eta - de))) /
                       (2.0 * h);
            };
            auto f = [](const PotentialValue& x) { return x.f; };
            auto fr = [](const PotentialValue& x) { return x.f_rho; };
            auto fe = [](const PotentialValue& x) { return x.f_eta; };
            EXPECT_NEAR(v.f_rho, fd(f, h, 0), 1e-6);
            EXPECT_NEAR(v.f_eta, fd(f, 0, h), 1e-6);
            EXPECT_NEAR(v.f_rho_rho, fd(fr, h, 0), 1e-6);
            EXPECT_NEAR(v.f_rho_eta, fd(fr, 0, h), 1e-6);
            EXPECT_NEAR(v.f_rho_eta, fd(fe, h, 0), 1e-6);
            EXPECT_NEAR(v.f_eta_eta, fd(fe, 0, h), 1e-6);
        }
    }
}

TEST(Potential, MixedDerivativeVanishesIdentically) {
    const PotentialSpec p;
    for (double eta = -1.0; eta <= 2.0; eta += 0.125) {
        EXPECT_NEAR(potential_eval(p, 0.3, eta).f_rho_eta, 0.0, 1e-15);
    }
}

TEST(Potential, ConvexAfterQuadraticShift) {
    // f + alpha/2 (rho^2 + eta^2) has a positive definite Hessian on [-0.5, 1.5]^2
    const PotentialSpec p;
    for (double rho = -0.5; rho <= 1.5; rho += 0.01) {
        for (double eta = -0.5; eta <= 1.5; eta += 0.01) {
            const PotentialValue v = potential_eval(p, rho, eta);
            const double a = v.f_rho_rho + p.alpha;
            const double c = v.f_eta_eta + p.alpha;
            EXPECT_GT(a, 0.0);
            EXPECT_GT(a * c - v.f_rho_eta * v.f_rho_eta, 0.0);
        }
    }
}

TEST(Validate, RejectsBadParameters) {
    ModelParams ok;
    EXPECT_NO_THROW(validate(ok));
    auto bad = ok;
    bad.gamma_rho = 0.0;
    EXPECT_THROW(validate(bad), InvalidParameter);
    bad = ok;
    bad.mobility.c = -1.0;
    EXPECT_THROW(validate(bad), InvalidParameter);
    bad = ok;
    bad.mobility.l22 = 0.0;
    EXPECT_THROW(validate(bad), InvalidParameter);
}

TEST(RegularizedNormal, BoundedAndDifferentiable) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 30.0);
    constexpr double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        const Vec2 x{g(rng), g(rng)};
        const RegularizedNormal rn = regularized_normal(x, 1.0);
        EXPECT_LT(std::hypot(rn.n[0], rn.n[1]), 1.0);
        for (int c = 0; c < 2; ++c) {
            Vec2 xp = x;
            Vec2 xm = x;
            xp[c] += h;
            xm[c] -= h;
            const auto np = regularized_normal(xp, 1.0).n;
            const auto nm = regularized_normal(xm, 1.0).n;
            for (int r = 0; r < 2; ++r) EXPECT_NEAR(rn.dn_dg[r][c], (np[r] - nm[r]) / (2 * h), 1e-6);
        }
    }
    const RegularizedNormal zero = regularized_normal({0.0, 0.0}, 1.0);
    EXPECT_EQ(zero.n[0], 0.0);
    EXPECT_EQ(zero.n[1], 0.0);
}

TEST(Mobility, SchurComplementIsIdentity) {
    const MobilitySpec m;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const Omega w{0.3, 0.6, u(rng), u(rng), u(rng), u(rng)};
        const Mat3 L = mobility_eval(m, w).L;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                const double s = L[r][c] - L[r][2] * L[c][2] / L[2][2];
                EXPECT_NEAR(s, r == c ? 1.0 : 0.0, 1e-13);
            }
        }
        EXPECT_EQ(L[0][1], L[1][0]);
    }
}

TEST(Mobility, DerivativesMatchCentralDifferences) {
    const MobilitySpec m;
    constexpr double h = 1e-6;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const Omega w{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const MobilityValue v = mobility_eval(m, w);
        for (int k = 0; k < 6; ++k) {
            Omega wp = w;
            Omega wm = w;
            wp[k] += h;
            wm[k] -= h;
            const Mat3 lp = mobility_eval(m, wp).L;
            const Mat3 lm = mobility_eval(m, wm).L;
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) {
                    const double fd = (lp[r][c] - lm[r][c]) / (2 * h);
                    EXPECT_NEAR(v.dL[k][r][c], fd, 1e-6 * (1.0 + std::abs(fd)));
                }
            }
        }
    }
}

TEST(Mobility, PositiveDefiniteOnTenThousandSamples) {
    EXPECT_NO_THROW(check_mobility_spd(MobilitySpec{}, 10000, 1e3, 99));
}

TEST(Mobility, DefiniteForAnyCouplingStrength) {
    // the Schur complement is I by construction, independent of l12_scale and l22
    for (double sigma : {0.0, 1.0, 100.0}) {
        for (double l22 : {0.1, 10.0, 1000.0}) {
            EXPECT_NO_THROW(check_mobility_spd(MobilitySpec{l22, sigma, 1.0}, 500, 1e3, 3));
        }
    }
}

TEST(Cholesky, DetectsIndefiniteMatrix) {
    const Mat3 spd{{{2, 1, 0}, {1, 2, 0}, {0, 0, 1}}};
    const Mat3 indef{{{1, 2, 0}, {2, 1, 0}, {0, 0, 1}}};
    EXPECT_TRUE(cholesky_ok(spd));
    EXPECT_FALSE(cholesky_ok(indef));
}

}  // namespace
}  // namespace chac
