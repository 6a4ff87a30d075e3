#include "chac/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chac/errors.hpp"

namespace chac {

LineRule gauss_legendre_unit(int n_points) {
    if (n_points < 1) {
        throw InvalidParameter("gauss_legendre_unit: need at least one point");
    }
    const int n = n_points;
    LineRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) {
        rule.points[n / 2] = 0.5;
    }
    return rule;
}

QuadRule triangle_rule(int degree) {
    if (degree < 1) {
        throw InvalidParameter("triangle_rule: degree must be positive (got " + std::to_string(degree) + ")");
    }
    // (x, y) = (u, v (1 - u)) with Jacobian (1 - u): the pulled-back integrand of a
    // degree-d polynomial has degree d+1 in u and d in v.
    const int n = (degree + 2 + 1) / 2;
    const LineRule line = gauss_legendre_unit(n);
    QuadRule rule;
    rule.degree = degree;
    for (int a = 0; a < n; ++a) {
        const double u = line.points[a];
        for (int b = 0; b < n; ++b) {
            const double v = line.points[b];
            const double x = u;
            const double y = v * (1.0 - u);
            rule.points.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(line.weights[a] * line.weights[b] * (1.0 - u));
        }
    }
    return rule;
}

}  // namespace chac
