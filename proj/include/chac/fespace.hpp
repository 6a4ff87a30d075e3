#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chac/mesh.hpp"
#include "chac/quadrature.hpp"
#include "chac/sparse.hpp"

namespace chac {

/// Coefficient vector of a discrete function in a particular FeSpace.
struct FieldVec {
    std::vector<double> coeffs;
    std::uint64_t space_id = 0;

    [[nodiscard]] std::size_t size() const noexcept { return coeffs.size(); }
    double& operator[](std::size_t i) { return coeffs[i]; }
    double operator[](std::size_t i) const { return coeffs[i]; }
};

using ScalarFn = std::function<double(const Vec2&)>;
using GradientFn = std::function<Vec2(const Vec2&)>;

enum class NormKind { L2, H1semi, H1 };

/// Continuous periodic piecewise-quadratic functions on a PeriodicMesh.
///
/// Local DOF order on each element: the three corners, then the midpoints of
/// edges (0,1), (1,2), (2,0).  Global order: vertices first (index j*n+i),
/// then edges sorted by their endpoint vertex pair (ties, which occur on the
/// coarsest periodic mesh, broken by owning cell and edge orientation).
class FeSpace {
public:
    static constexpr int kLocalDofs = 6;
    static constexpr int kMinQuadDegree = 8;

    [[nodiscard]] const PeriodicMesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const QuadRule& quad() const noexcept { return quad_; }
    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }
    [[nodiscard]] std::size_t n_dofs() const noexcept { return n_dofs_; }
    [[nodiscard]] std::size_t n_elements() const noexcept { return dofs_.size(); }
    [[nodiscard]] std::size_t n_quad() const noexcept { return quad_.size(); }

    [[nodiscard]] const std::array<std::size_t, kLocalDofs>& element_dofs(std::size_t elem) const;
    /// Location of a global DOF in [0,1)^2.
    [[nodiscard]] const Vec2& dof_point(std::size_t dof) const { return dof_points_.at(dof); }

    /// Reference basis values at quadrature point q.
    [[nodiscard]] const std::array<double, kLocalDofs>& basis(std::size_t q) const { return phi_[q]; }
    /// Physical basis gradients on element e at quadrature point q.
    [[nodiscard]] std::span<const Vec2, kLocalDofs> grad_basis(std::size_t e, std::size_t q) const {
        return std::span<const Vec2, kLocalDofs>(grads_.data() + (e * quad_.size() + q) * kLocalDofs, kLocalDofs);
    }
    /// Quadrature weight times |det J| for element e, point q.
    [[nodiscard]] double weight(std::size_t e, std::size_t q) const { return quad_.weights[q] * det_[e]; }
    /// Wrapped physical location of quadrature point q on element e.
    [[nodiscard]] Vec2 quad_point(std::size_t e, std::size_t q) const;

    [[nodiscard]] FieldVec zeros() const { return FieldVec{std::vector<double>(n_dofs_, 0.0), id_}; }
    [[nodiscard]] FieldVec constant(double value) const {
        return FieldVec{std::vector<double>(n_dofs_, value), id_};
    }
    /// Nodal interpolation at the DOF points.
    [[nodiscard]] FieldVec interpolate(const ScalarFn& fn) const;
    [[nodiscard]] FieldVec wrap(std::vector<double> coeffs) const;

    /// Throws LineageMismatch unless `v` belongs to this space.
    void check(const FieldVec& v) const;

    friend FeSpace build_space(const PeriodicMesh& mesh, int quad_degree);

private:
    PeriodicMesh mesh_;
    QuadRule quad_;
    std::uint64_t id_ = 0;
    std::size_t n_dofs_ = 0;
    std::vector<std::array<std::size_t, kLocalDofs>> dofs_;
    std::vector<Vec2> dof_points_;
    std::vector<double> det_;
    std::vector<std::array<double, kLocalDofs>> phi_;
    std::vector<Vec2> grads_;
};

/// Throws InvalidParameter for quad_degree < 8.
FeSpace build_space(const PeriodicMesh& mesh, int quad_degree = FeSpace::kMinQuadDegree);

/// P2 shape functions and their reference gradients at a reference point.
std::array<double, 6> p2_values(const Vec2& ref);
std::array<Vec2, 6> p2_gradients(const Vec2& ref);

/// Scalar sparsity pattern of the space plus, for every element, the position in
/// values() of each local (row a, column b) pair at index a*6+b.
struct ElementPattern {
    SparseMat matrix;
    std::vector<std::array<std::size_t, 36>> positions;
};

ElementPattern build_pattern(const FeSpace& space);

SparseMat assemble_mass(const FeSpace& space);
SparseMat assemble_stiffness(const FeSpace& space);

/// L2-orthogonal projection onto the space.
FieldVec l2_project(const FeSpace& space, const ScalarFn& fn);
/// H1-orthogonal projection onto the space.
FieldVec h1_project(const FeSpace& space, const ScalarFn& fn, const GradientFn& grad_fn);

struct PointValue {
    double value;
    Vec2 gradient;
};

PointValue evaluate(const FeSpace& space, const FieldVec& vec, std::size_t elem, const Vec2& ref_point);
/// Evaluate at a physical point (taken modulo 1).
PointValue evaluate_at(const FeSpace& space, const FieldVec& vec, const Vec2& point);

double norm(const FeSpace& space, const FieldVec& vec, NormKind kind);

/// Exact injection of a coarse function into the space built on the uniform
/// refinement of its mesh.  Equal meshes give a copy.
FieldVec prolong(const FeSpace& coarse, const FeSpace& fine, const FieldVec& vec);

/// Matrix form of prolong(): fine coefficients = P * coarse coefficients.
SparseMat prolongation_matrix(const FeSpace& coarse, const FeSpace& fine);

}  // namespace chac
