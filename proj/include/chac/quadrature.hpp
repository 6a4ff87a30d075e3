#pragma once

#include <array>
#include <vector>

namespace chac {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

LineRule gauss_legendre_unit(int n_points);

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)}.
/// `points` holds barycentric coordinates (l0, l1, l2) where the Cartesian
/// reference point is (l1, l2).  Weights sum to 1/2.
struct QuadRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree
/// `degree`.  All weights are positive.
QuadRule triangle_rule(int degree);

}  // namespace chac
