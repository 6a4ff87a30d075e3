#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "chac/errors.hpp"
#include "chac/fespace.hpp"

namespace chac {
namespace {

constexpr double kPi = std::numbers::pi;

FieldVec random_field(const FeSpace& s, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(s.n_dofs());
    for (double& v : c) v = u(rng);
    return s.wrap(std::move(c));
}

TEST(FeSpace, DofCountIsFourTimesCellCount) {
    for (std::size_t n : {2u, 3u, 4u, 8u}) {
        const FeSpace s = build_space(build_periodic_mesh(n));
        EXPECT_EQ(s.n_dofs(), 4 * n * n);
        EXPECT_EQ(s.n_elements(), 2 * n * n);
    }
}

TEST(FeSpace, ElementDofsAreDistinctAndCoverTheSpace) {
    const FeSpace s = build_space(build_periodic_mesh(4));
    std::set<std::size_t> seen;
    for (std::size_t e = 0; e < s.n_elements(); ++e) {
        const auto& d = s.element_dofs(e);
        EXPECT_EQ(std::set<std::size_t>(d.begin(), d.end()).size(), 6u);
        seen.insert(d.begin(), d.end());
    }
    EXPECT_EQ(seen.size(), s.n_dofs());
}

TEST(FeSpace, RejectsLowQuadratureDegree) {
    EXPECT_THROW(build_space(build_periodic_mesh(2), 7), InvalidParameter);
}

TEST(FeSpace, ForeignVectorIsRejected) {
    const FeSpace a = build_space(build_periodic_mesh(2));
    const FeSpace b = build_space(build_periodic_mesh(2));
    EXPECT_THROW(a.check(b.zeros()), LineageMismatch);
    EXPECT_THROW(a.wrap(std::vector<double>(3)), LineageMismatch);
}

TEST(P2Basis, NodalAndPartitionOfUnity) {
    const Vec2 nodes[6] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
    for (int i = 0; i < 6; ++i) {
        const auto v = p2_values(nodes[i]);
        for (int j = 0; j < 6; ++j) EXPECT_NEAR(v[j], i == j ? 1.0 : 0.0, 1e-15);
    }
    const Vec2 p{0.21, 0.33};
    const auto v = p2_values(p);
    const auto g = p2_gradients(p);
    double s = 0.0;
    Vec2 gs{0, 0};
    for (int j = 0; j < 6; ++j) {
        s += v[j];
        gs[0] += g[j][0];
        gs[1] += g[j][1];
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(gs[0], 0.0, 1e-14);
    EXPECT_NEAR(gs[1], 0.0, 1e-14);
}

TEST(Assembly, MassTotalIsAreaAndStiffnessAnnihilatesConstants) {
    const FeSpace s = build_space(build_periodic_mesh(4));
    const SparseMat m = assemble_mass(s);
    const SparseMat k = assemble_stiffness(s);
    const std::vector<double> one(s.n_dofs(), 1.0);
    const auto m1 = matvec(m, one);
    const auto k1 = matvec(k, one);
    double total = 0.0;
    for (double v : m1) total += v;
    EXPECT_NEAR(total, 1.0, 1e-14);
    for (double v : k1) EXPECT_NEAR(v, 0.0, 1e-12);
    for (std::size_t i = 0; i < s.n_dofs(); ++i) {
        for (std::size_t j = 0; j < s.n_dofs(); j += 7) EXPECT_NEAR(m.at(i, j), m.at(j, i), 1e-16);
    }
}

TEST(Projection, ConstantReproducedExactly) {
    const FeSpace s = build_space(build_periodic_mesh(4));
    const FieldVec p = l2_project(s, [](const Vec2&) { return 0.7; });
    const FieldVec q = h1_project(s, [](const Vec2&) { return 0.7; }, [](const Vec2&) { return Vec2{0, 0}; });
    for (std::size_t i = 0; i < s.n_dofs(); ++i) {
        EXPECT_NEAR(p[i], 0.7, 1e-12);
        EXPECT_NEAR(q[i], 0.7, 1e-12);
    }
}

TEST(Projection, DiscreteFunctionsAreFixedPoints) {
    const FeSpace s = build_space(build_periodic_mesh(4));
    const FieldVec v = random_field(s, 11);
    auto fn = [&](const Vec2& x) { return evaluate_at(s, v, x).value; };
    auto grad = [&](const Vec2& x) { return evaluate_at(s, v, x).gradient; };
    const FieldVec p = l2_project(s, fn);
    const FieldVec q = h1_project(s, fn, grad);
    for (std::size_t i = 0; i < s.n_dofs(); ++i) {
        EXPECT_NEAR(p[i], v[i], 1e-12);
        EXPECT_NEAR(q[i], v[i], 1e-12);
    }
}

TEST(Projection, SmoothFunctionConvergesAtOptimalOrder) {
    auto u = [](const Vec2& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); };
    auto du = [](const Vec2& x) {
        return Vec2{2 * kPi * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]),
                    -2 * kPi * std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1])};
    };
    double prev_l2 = 0.0;
    double prev_h1 = 0.0;
    for (std::size_t n : {8u, 16u, 32u}) {
        const FeSpace s = build_space(build_periodic_mesh(n));
        const FieldVec p = l2_project(s, u);
        // error via projection of the difference onto a finer quadrature: sample at quad points
        double l2 = 0.0;
        double h1 = 0.0;
        for (std::size_t e = 0; e < s.n_elements(); ++e) {
            for (std::size_t q = 0; q < s.n_quad(); ++q) {
                const auto& l = s.quad().points[q];
                const PointValue pv = evaluate(s, p, e, Vec2{l[1], l[2]});
                const Vec2 x = s.quad_point(e, q);
                const Vec2 g = du(x);
                l2 += s.weight(e, q) * std::pow(pv.value - u(x), 2);
                h1 += s.weight(e, q) * (std::pow(pv.gradient[0] - g[0], 2) + std::pow(pv.gradient[1] - g[1], 2));
            }
        }
        l2 = std::sqrt(l2);
        h1 = std::sqrt(h1);
        if (prev_l2 > 0.0) {
            EXPECT_NEAR(std::log2(prev_l2 / l2), 3.0, 0.3);
            EXPECT_NEAR(std::log2(prev_h1 / h1), 2.0, 0.3);
        }
        prev_l2 = l2;
        prev_h1 = h1;
    }
}

TEST(Evaluate, InterpolatedQuadraticIsExactAwayFromSeams) {
    // a linear field is not periodic, so only elements not crossing the seam see it
    const FeSpace s = build_space(build_periodic_mesh(8));
    const FieldVec v = s.interpolate([](const Vec2& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1] + x[0] * x[1]; });
    int checked = 0;
    for (std::size_t e = 0; e < s.n_elements(); ++e) {
        const Vec2 c0 = s.mesh().corner(e, 0);
        const Vec2 c2 = s.mesh().corner(e, 2);
        const Vec2 c1 = s.mesh().corner(e, 1);
        if (std::max({c0[0], c1[0], c2[0]}) > 1.0 - 1e-12 || std::max({c0[1], c1[1], c2[1]}) > 1.0 - 1e-12) continue;
        const Vec2 ref{0.2, 0.3};
        const Vec2 x = s.mesh().element_affine_map(e).apply(ref);
        const PointValue pv = evaluate(s, v, e, ref);
        EXPECT_NEAR(pv.value, 1.0 + 2.0 * x[0] - 3.0 * x[1] + x[0] * x[1], 1e-13);
        EXPECT_NEAR(pv.gradient[0], 2.0 + x[1], 1e-12);
        EXPECT_NEAR(pv.gradient[1], -3.0 + x[0], 1e-12);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(Norm, ConstantsAndScaling) {
    const FeSpace s = build_space(build_periodic_mesh(4));
    EXPECT_NEAR(norm(s, s.constant(3.0), NormKind::L2), 3.0, 1e-13);
    EXPECT_NEAR(norm(s, s.constant(3.0), NormKind::H1semi), 0.0, 1e-13);
    EXPECT_NEAR(norm(s, s.constant(3.0), NormKind::H1), 3.0, 1e-13);
    const FieldVec v = random_field(s, 2);
    const double l2 = norm(s, v, NormKind::L2);
    const double semi = norm(s, v, NormKind::H1semi);
    EXPECT_NEAR(norm(s, v, NormKind::H1), std::hypot(l2, semi), 1e-12);
}

TEST(Prolongation, ReproducesCoarseFunctionPointwise) {
    const FeSpace coarse = build_space(build_periodic_mesh(2));
    const FeSpace fine = build_space(refine_uniform(coarse.mesh()));
    const FieldVec v = random_field(coarse, 9);
    const FieldVec w = prolong(coarse, fine, v);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const PointValue a = evaluate_at(coarse, v, x);
        const PointValue b = evaluate_at(fine, w, x);
        EXPECT_NEAR(a.value, b.value, 1e-12);
        EXPECT_NEAR(a.gradient[0], b.gradient[0], 1e-11);
        EXPECT_NEAR(a.gradient[1], b.gradient[1], 1e-11);
    }
    EXPECT_NEAR(norm(coarse, v, NormKind::H1), norm(fine, w, NormKind::H1), 1e-12);
}

TEST(Prolongation, SameMeshIsIdentityAndUnrelatedMeshThrows) {
    const FeSpace a = build_space(build_periodic_mesh(4));
    const FieldVec v = random_field(a, 4);
    const FieldVec w = prolong(a, a, v);
    for (std::size_t i = 0; i < a.n_dofs(); ++i) EXPECT_DOUBLE_EQ(v[i], w[i]);
    const FeSpace b = build_space(build_periodic_mesh(3));
    EXPECT_THROW(prolongation_matrix(b, a), LineageMismatch);
    const FeSpace c = build_space(refine_uniform(refine_uniform(build_periodic_mesh(2))));
    EXPECT_THROW(prolongation_matrix(build_space(build_periodic_mesh(2)), c), LineageMismatch);
}

}  // namespace
}  // namespace chac
