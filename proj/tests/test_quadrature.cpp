#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "chac/quadrature.hpp"

namespace chac {
namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Integral of x^a y^b over the reference triangle.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

TEST(GaussLegendre, ExactOnUnitIntervalUpToDegree2nMinus1) {
    for (int n = 1; n <= 8; ++n) {
        const LineRule r = gauss_legendre_unit(n);
        ASSERT_EQ(r.points.size(), static_cast<std::size_t>(n));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], p);
            EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
        }
    }
}

TEST(GaussLegendre, TwoPointNodes) {
    const LineRule r = gauss_legendre_unit(2);
    EXPECT_NEAR(r.points[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r.points[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r.weights[0], 0.5, 1e-15);
}

class TriangleRuleExactness : public ::testing::TestWithParam<int> {};

TEST_P(TriangleRuleExactness, IntegratesAllMonomialsOfItsDegree) {
    const int degree = GetParam();
    const QuadRule q = triangle_rule(degree);
    EXPECT_GE(q.degree, degree);
    EXPECT_NEAR(std::accumulate(q.weights.begin(), q.weights.end(), 0.0), 0.5, 1e-15);
    for (double w : q.weights) EXPECT_GT(w, 0.0);
    for (const auto& l : q.points) {
        EXPECT_NEAR(l[0] + l[1] + l[2], 1.0, 1e-15);
        for (double c : l) EXPECT_GE(c, 0.0);
    }
    for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                s += q.weights[i] * std::pow(q.points[i][1], a) * std::pow(q.points[i][2], b);
            }
            EXPECT_NEAR(s, monomial_integral(a, b), 1e-14) << "x^" << a << " y^" << b;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, TriangleRuleExactness, ::testing::Values(1, 2, 4, 5, 8, 10));

TEST(TriangleRule, DegreeEightUsesTwentyFivePoints) { EXPECT_EQ(triangle_rule(8).size(), 25u); }

}  // namespace
}  // namespace chac
