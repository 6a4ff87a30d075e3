#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace chac {

using Vec2 = std::array<double, 2>;
/// Row-major 2x2 matrix: m[row][col].
using Mat2 = std::array<std::array<double, 2>, 2>;

/// One triangle of a periodic mesh.  `shift[c]` is the integer lattice offset that
/// must be added to the (wrapped) coordinates of corner `c` so that the three
/// corners form a geometrically valid triangle in the plane.
struct Triangle {
    std::array<std::size_t, 3> vertex;
    std::array<std::array<int, 2>, 3> shift;
};

struct AffineMap {
    Vec2 origin;
    Mat2 jacobian;  // columns are the two edge vectors leaving the origin corner

    [[nodiscard]] double det() const {
        return jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    }
    [[nodiscard]] Vec2 apply(const Vec2& ref) const {
        return {origin[0] + jacobian[0][0] * ref[0] + jacobian[0][1] * ref[1],
                origin[1] + jacobian[1][0] * ref[0] + jacobian[1][1] * ref[1]};
    }
};

/// Structured triangulation of the unit square with opposite sides identified.
///
/// Cell (i, j) covers [i/n, (i+1)/n] x [j/n, (j+1)/n] and is split along the
/// lower-left to upper-right diagonal into
///   lower triangle 2*(j*n+i):     (i,j), (i+1,j), (i+1,j+1)
///   upper triangle 2*(j*n+i)+1:   (i,j), (i+1,j+1), (i,j+1)
/// Vertex (i, j) has index j*n + i.  Every triangle is positively oriented.
class PeriodicMesh {
public:
    [[nodiscard]] std::size_t cells_per_side() const noexcept { return n_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double h() const noexcept { return 1.0 / static_cast<double>(n_); }

    [[nodiscard]] std::size_t n_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t n_triangles() const noexcept { return triangles_.size(); }
    [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] const Triangle& triangle(std::size_t elem) const;

    /// Unwrapped coordinates of corner `c` of `elem`.
    [[nodiscard]] Vec2 corner(std::size_t elem, int c) const;

    /// Map from the reference triangle {(0,0),(1,0),(0,1)} to element `elem`.
    [[nodiscard]] AffineMap element_affine_map(std::size_t elem) const;

    /// Element containing `point` (taken modulo 1) and the reference coordinates
    /// of the point in that element.  Points on shared edges resolve to one of the
    /// neighbours; callers evaluating continuous functions do not care which.
    [[nodiscard]] std::pair<std::size_t, Vec2> locate(const Vec2& point) const;

    /// Number of refinement steps between this mesh and `coarse`, or -1 when this
    /// mesh is not a uniform refinement of `coarse`.
    [[nodiscard]] int refinement_offset(const PeriodicMesh& coarse) const;

    friend PeriodicMesh build_periodic_mesh(std::size_t n);
    friend PeriodicMesh refine_uniform(const PeriodicMesh& mesh);

private:
    std::size_t n_ = 0;
    int level_ = 0;
    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
};

/// Throws InvalidParameter for n < 2.
PeriodicMesh build_periodic_mesh(std::size_t n);

/// Red refinement: every coarse triangle becomes the union of four fine ones.
PeriodicMesh refine_uniform(const PeriodicMesh& mesh);

}  // namespace chac
