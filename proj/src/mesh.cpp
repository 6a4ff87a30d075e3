#include "chac/mesh.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chac/errors.hpp"

namespace chac {

PeriodicMesh build_periodic_mesh(std::size_t n) {
    if (n < 2) {
        throw InvalidParameter("build_periodic_mesh: n must be >= 2 (got " + std::to_string(n) + ")");
    }
    PeriodicMesh mesh;
    mesh.n_ = n;
    mesh.level_ = 0;
    const auto dn = static_cast<double>(n);
    mesh.vertices_.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            mesh.vertices_[j * n + i] = {static_cast<double>(i) / dn, static_cast<double>(j) / dn};
        }
    }

    auto wrap = [n](std::size_t i, std::size_t j) -> std::pair<std::size_t, std::array<int, 2>> {
        const std::array<int, 2> s{i == n ? 1 : 0, j == n ? 1 : 0};
        return {(j % n) * n + (i % n), s};
    };

    mesh.triangles_.resize(2 * n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [v00, s00] = wrap(i, j);
            const auto [v10, s10] = wrap(i + 1, j);
            const auto [v11, s11] = wrap(i + 1, j + 1);
            const auto [v01, s01] = wrap(i, j + 1);
            const std::size_t cell = j * n + i;
            mesh.triangles_[2 * cell] = Triangle{{v00, v10, v11}, {s00, s10, s11}};
            mesh.triangles_[2 * cell + 1] = Triangle{{v00, v11, v01}, {s00, s11, s01}};
        }
    }
    return mesh;
}

PeriodicMesh refine_uniform(const PeriodicMesh& mesh) {
    if (mesh.n_ > std::numeric_limits<std::size_t>::max() / 4) {
        throw InvalidParameter("refine_uniform: cell count overflow");
    }
    PeriodicMesh fine = build_periodic_mesh(2 * mesh.n_);
    fine.level_ = mesh.level_ + 1;
    return fine;
}

const Triangle& PeriodicMesh::triangle(std::size_t elem) const {
    if (elem >= triangles_.size()) {
        throw IndexOutOfRange("element index " + std::to_string(elem) + " out of range (" +
                              std::to_string(triangles_.size()) + " triangles)");
    }
    return triangles_[elem];
}

Vec2 PeriodicMesh::corner(std::size_t elem, int c) const {
    const Triangle& t = triangle(elem);
    const Vec2& v = vertices_[t.vertex[c]];
    return {v[0] + t.shift[c][0], v[1] + t.shift[c][1]};
}

AffineMap PeriodicMesh::element_affine_map(std::size_t elem) const {
    const Vec2 p0 = corner(elem, 0);
    const Vec2 p1 = corner(elem, 1);
    const Vec2 p2 = corner(elem, 2);
    AffineMap map;
    map.origin = p0;
    map.jacobian = {{{p1[0] - p0[0], p2[0] - p0[0]}, {p1[1] - p0[1], p2[1] - p0[1]}}};
    return map;
}

std::pair<std::size_t, Vec2> PeriodicMesh::locate(const Vec2& point) const {
    const double dn = static_cast<double>(n_);
    double x = point[0] - std::floor(point[0]);
    double y = point[1] - std::floor(point[1]);
    auto cell_index = [&](double c) {
        auto k = static_cast<std::size_t>(std::floor(c * dn));
        return k >= n_ ? n_ - 1 : k;
    };
    const std::size_t i = cell_index(x);
    const std::size_t j = cell_index(y);
    // local coordinates in [0,1]^2 within the cell
    const double lx = x * dn - static_cast<double>(i);
    const double ly = y * dn - static_cast<double>(j);
    const std::size_t cell = j * n_ + i;
    if (ly <= lx) {
        // lower triangle: origin (0,0), edges (1,0) and (1,1)
        return {2 * cell, Vec2{lx - ly, ly}};
    }
    // upper triangle: origin (0,0), edges (1,1) and (0,1)
    return {2 * cell + 1, Vec2{lx, ly - lx}};
}

int PeriodicMesh::refinement_offset(const PeriodicMesh& coarse) const {
    std::size_t n = coarse.n_;
    for (int offset = 0; n <= n_; ++offset, n *= 2) {
        if (n == n_) {
            return offset;
        }
    }
    return -1;
}

}  // namespace chac
