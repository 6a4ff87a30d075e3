#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "chac/errors.hpp"
#include "chac/study.hpp"

namespace chac {
namespace {

TEST(Eoc, LogRatio) {
    EXPECT_DOUBLE_EQ(eoc(4.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(eoc(1.0, 1.0), 0.0);
    EXPECT_THROW(eoc(0.0, 1.0), InvalidParameter);
    EXPECT_THROW(eoc(1.0, -1.0), InvalidParameter);
}

TEST(Eoc, ManufacturedSecondOrderSequence) {
    const double a = 3.7;
    for (int k = 1; k < 10; ++k) {
        EXPECT_NEAR(eoc(a * std::pow(4.0, -k), a * std::pow(4.0, -(k + 1))), 2.0, 1e-12);
    }
}

TEST(StepsForLevel, IntegerMultiplesOnly) {
    EXPECT_EQ(steps_for_level(0.1, 0.001, 1), 200u);
    EXPECT_EQ(steps_for_level(0.1, 0.001, 5), 3200u);
    EXPECT_THROW(steps_for_level(0.1, 0.0007, 1), InvalidParameter);
    EXPECT_THROW(steps_for_level(0.1, 0.001, 0), InvalidParameter);
}

TEST(TrajectoryStore, RoundTripsFramesAndCleansUp) {
    const FeSpace s = build_space(build_periodic_mesh(2));
    std::filesystem::path dir;
    {
        TrajectoryStore t(s, TimeGrid{1.0, 2});
        dir = t.directory();
        EXPECT_TRUE(std::filesystem::exists(dir));
        EXPECT_FALSE(t.complete());
        t.push_node(s.constant(1.0), s.constant(2.0));
        t.push_node(s.constant(3.0), s.constant(4.0));
        t.push_potentials(s.constant(5.0), s.constant(6.0));
        t.push_node(s.constant(7.0), s.constant(8.0));
        t.push_potentials(s.constant(9.0), s.constant(10.0));
        EXPECT_TRUE(t.complete());
        EXPECT_THROW(t.push_node(s.zeros(), s.zeros()), InvalidParameter);
        EXPECT_DOUBLE_EQ(t.node(1).rho[0], 3.0);
        EXPECT_DOUBLE_EQ(t.node(2).eta[5], 8.0);
        EXPECT_DOUBLE_EQ(t.node(2).time, 1.0);
        EXPECT_DOUBLE_EQ(t.potentials(1).mu_eta[3], 6.0);
        EXPECT_DOUBLE_EQ(t.potentials(2).mu_rho[0], 9.0);
        EXPECT_THROW((void)t.potentials(0), IndexOutOfRange);
        EXPECT_THROW((void)t.node(3), IndexOutOfRange);
    }
    EXPECT_FALSE(std::filesystem::exists(dir));
}

// Fills a store with rho = eta = a(t) u and mu_rho = mu_eta = b(interval) u for a fixed field u.
void fill(TrajectoryStore& t, const FieldVec& u, const std::function<double(std::size_t)>& node_scale,
          const std::function<double(std::size_t)>& pot_scale) {
    const FeSpace& s = t.space();
    auto scaled = [&](double c) {
        std::vector<double> v = u.coeffs;
        for (double& x : v) x *= c;
        return s.wrap(std::move(v));
    };
    t.push_node(scaled(node_scale(0)), scaled(node_scale(0)));
    for (std::size_t n = 1; n <= t.grid().N; ++n) {
        t.push_node(scaled(node_scale(n)), scaled(node_scale(n)));
        t.push_potentials(scaled(pot_scale(n)), scaled(pot_scale(n)));
    }
}

TEST(InterGridError, SameTrajectoryTwiceIsZero) {
    const FeSpace s = build_space(build_periodic_mesh(2));
    const FieldVec u = s.interpolate([](const Vec2& x) { return std::sin(6.0 * x[0]) + x[1]; });
    TrajectoryStore a(s, TimeGrid{0.1, 4});
    TrajectoryStore b(s, TimeGrid{0.1, 4});
    auto node = [](std::size_t n) { return 1.0 + 0.1 * n; };
    auto pot = [](std::size_t n) { return 2.0 - 0.3 * n; };
    fill(a, u, node, pot);
    fill(b, u, node, pot);
    for (ErrorKind k : {ErrorKind::RhoLinfH1, ErrorKind::EtaLinfH1, ErrorKind::MuRhoL2H1, ErrorKind::MuEtaL2L2}) {
        EXPECT_EQ(inter_grid_error(a, b, k), 0.0);
    }
}

TEST(InterGridError, ClosedFormsOnConsecutiveLevels) {
    // coarse trajectory is identically zero; the fine one is t * u at nodes and
    // t_mid * u on intervals, so the errors are max_t t ||u|| and
    // sqrt(sum tau t_mid^2) ||u|| = sqrt(T^3/3 - T tau^2/12) ||u||
    const FeSpace coarse = build_space(build_periodic_mesh(2));
    const FeSpace fine = build_space(refine_uniform(coarse.mesh()));
    const double T = 0.4;
    const TimeGrid gc{T, 4};
    const TimeGrid gf{T, 8};
    const FieldVec u = fine.interpolate([](const Vec2& x) { return std::cos(6.283185307179586 * x[0]) + x[1] * (1 - x[1]); });
    TrajectoryStore c(coarse, gc);
    TrajectoryStore f(fine, gf);
    fill(c, coarse.zeros(), [](std::size_t) { return 0.0; }, [](std::size_t) { return 0.0; });
    const double tf = gf.tau();
    fill(f, u, [&](std::size_t n) { return n * tf; }, [&](std::size_t n) { return (n - 0.5) * tf; });

    const double h1 = norm(fine, u, NormKind::H1);
    const double l2 = norm(fine, u, NormKind::L2);
    const double time_factor = std::sqrt(T * T * T / 3.0 - T * tf * tf / 12.0);
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::RhoLinfH1), T * h1, 1e-13);
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::EtaLinfH1), T * h1, 1e-13);
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::MuRhoL2H1), time_factor * h1, 1e-13);
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::MuEtaL2L2), time_factor * l2, 1e-13);
}

TEST(InterGridError, OddFineNodesCompareWithCoarseAverage) {
    // coarse nodes 0, 1 carry 0 and 2u, so the midpoint value is u; fine carries u at every node
    const FeSpace coarse = build_space(build_periodic_mesh(2));
    const FeSpace fine = build_space(refine_uniform(coarse.mesh()));
    const FieldVec uc = coarse.interpolate([](const Vec2& x) { return std::sin(6.283185307179586 * x[1]); });
    const FieldVec uf = prolong(coarse, fine, uc);
    TrajectoryStore c(coarse, TimeGrid{0.1, 1});
    TrajectoryStore f(fine, TimeGrid{0.1, 2});
    fill(c, uc, [](std::size_t n) { return 2.0 * n; }, [](std::size_t) { return 1.0; });
    fill(f, uf, [](std::size_t n) { return n == 1 ? 1.0 : 2.0 * (n / 2); }, [](std::size_t) { return 1.0; });
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::RhoLinfH1), 0.0, 1e-13);
    EXPECT_NEAR(inter_grid_error(f, c, ErrorKind::MuRhoL2H1), 0.0, 1e-13);
}

TEST(InterGridError, LineageMismatchIsRejected) {
    const FeSpace a = build_space(build_periodic_mesh(2));
    const FeSpace b = build_space(refine_uniform(refine_uniform(a.mesh())));
    TrajectoryStore ta(a, TimeGrid{0.1, 1});
    TrajectoryStore tb(b, TimeGrid{0.1, 4});
    fill(ta, a.zeros(), [](std::size_t) { return 0.0; }, [](std::size_t) { return 0.0; });
    fill(tb, b.zeros(), [](std::size_t) { return 0.0; }, [](std::size_t) { return 0.0; });
    EXPECT_THROW(inter_grid_error(tb, ta, ErrorKind::RhoLinfH1), LineageMismatch);

    const FeSpace a2 = build_space(refine_uniform(a.mesh()));
    TrajectoryStore wrong_time(a2, TimeGrid{0.1, 3});
    fill(wrong_time, a2.zeros(), [](std::size_t) { return 0.0; }, [](std::size_t) { return 0.0; });
    EXPECT_THROW(inter_grid_error(wrong_time, ta, ErrorKind::RhoLinfH1), LineageMismatch);

    TrajectoryStore incomplete(a2, TimeGrid{0.1, 2});
    EXPECT_THROW(inter_grid_error(incomplete, ta, ErrorKind::RhoLinfH1), LineageMismatch);
}

TEST(RunLadder, TwoLevelsGiveOneRowWithoutEoc) {
    LadderConfig cfg;
    cfg.T = 0.002;
    const ConvergenceTable t = run_ladder(cfg, 1, 2);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].k, 1);
    EXPECT_DOUBLE_EQ(t.rows[0].h, 0.5);
    EXPECT_DOUBLE_EQ(t.rows[0].tau, 0.0005);
    for (int c = 0; c < 4; ++c) {
        EXPECT_GT(t.rows[0].err[c], 0.0);
        EXPECT_FALSE(t.rows[0].eoc[c].has_value());
    }
}

TEST(RunLadder, ConcurrentLevelsMatchSequential) {
    LadderConfig cfg;
    cfg.T = 0.002;
    const ConvergenceTable seq = run_ladder(cfg, 1, 3);
    cfg.jobs = 3;
    const ConvergenceTable par = run_ladder(cfg, 1, 3);
    ASSERT_EQ(seq.rows.size(), 2u);
    ASSERT_TRUE(seq.rows[1].eoc[0].has_value());
    for (std::size_t r = 0; r < seq.rows.size(); ++r) {
        for (int c = 0; c < 4; ++c) EXPECT_EQ(seq.rows[r].err[c], par.rows[r].err[c]) << r << " " << c;
    }
}

TEST(RunLadder, FailureNamesTheLevel) {
    LadderConfig cfg;
    cfg.T = 0.002;
    cfg.run.newton.max_iter = 1;
    try {
        (void)run_ladder(cfg, 1, 2);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& ex) {
        EXPECT_EQ(ex.index(), 1u);
        EXPECT_NE(std::string(ex.what()).find("k=1"), std::string::npos);
    }
}

TEST(RunLadder, InvalidRangeOrGridThrows) {
    LadderConfig cfg;
    EXPECT_THROW(run_ladder(cfg, 0, 2), InvalidParameter);
    EXPECT_THROW(run_ladder(cfg, 3, 2), InvalidParameter);
    cfg.T = 0.00123;
    EXPECT_THROW(run_ladder(cfg, 1, 2), InvalidParameter);
}

}  // namespace
}  // namespace chac
