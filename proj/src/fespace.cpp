#include "chac/fespace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <tuple>

#include "chac/errors.hpp"

namespace chac {

namespace {

std::atomic<std::uint64_t> next_space_id{1};

enum EdgeKind : int { kHorizontal = 0, kDiagonal = 1, kVertical = 2 };

Vec2 wrap_point(const Vec2& p) { return {p[0] - std::floor(p[0]), p[1] - std::floor(p[1])}; }

}  // namespace

std::array<double, 6> p2_values(const Vec2& ref) {
    const double l1 = ref[0];
    const double l2 = ref[1];
    const double l0 = 1.0 - l1 - l2;
    return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
            4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
}

std::array<Vec2, 6> p2_gradients(const Vec2& ref) {
    const double l1 = ref[0];
    const double l2 = ref[1];
    const double l0 = 1.0 - l1 - l2;
    const double g0 = 4.0 * l0 - 1.0;
    return {Vec2{-g0, -g0},
            Vec2{4.0 * l1 - 1.0, 0.0},
            Vec2{0.0, 4.0 * l2 - 1.0},
            Vec2{4.0 * (l0 - l1), -4.0 * l1},
            Vec2{4.0 * l2, 4.0 * l1},
            Vec2{-4.0 * l2, 4.0 * (l0 - l2)}};
}

FeSpace build_space(const PeriodicMesh& mesh, int quad_degree) {
    if (quad_degree < FeSpace::kMinQuadDegree) {
        throw InvalidParameter("build_space: quad_degree must be >= " + std::to_string(FeSpace::kMinQuadDegree) +
                               " (got " + std::to_string(quad_degree) + ")");
    }
    FeSpace s;
    s.mesh_ = mesh;
    s.quad_ = triangle_rule(quad_degree);
    s.id_ = next_space_id.fetch_add(1);

    const std::size_t n = mesh.cells_per_side();
    const std::size_t nv = n * n;
    const auto dn = static_cast<double>(n);
    auto vid = [n](std::size_t i, std::size_t j) { return (j % n) * n + (i % n); };

    // Global edge numbering.
    struct EdgeKey {
        std::size_t lo, hi, cell;
        int kind;
    };
    std::vector<EdgeKey> keys;
    keys.reserve(3 * nv);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = vid(i, j);
            const std::size_t ends[3] = {vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)};
            for (int kind = 0; kind < 3; ++kind) {
                keys.push_back({std::min(a, ends[kind]), std::max(a, ends[kind]), j * n + i, kind});
            }
        }
    }
    std::vector<std::size_t> order(keys.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto& a = keys[x];
        const auto& b = keys[y];
        return std::tie(a.lo, a.hi, a.cell, a.kind) < std::tie(b.lo, b.hi, b.cell, b.kind);
    });
    // edge_dof[cell*3 + kind]
    std::vector<std::size_t> edge_dof(keys.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        edge_dof[order[rank]] = nv + rank;
    }
    auto edge = [&](std::size_t i, std::size_t j, int kind) { return edge_dof[vid(i, j) * 3 + kind]; };

    s.n_dofs_ = nv + keys.size();
    s.dof_points_.resize(s.n_dofs_);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) / dn;
            const double y = static_cast<double>(j) / dn;
            const double xm = (static_cast<double>(i) + 0.5) / dn;
            const double ym = (static_cast<double>(j) + 0.5) / dn;
            s.dof_points_[vid(i, j)] = {x, y};
            s.dof_points_[edge(i, j, kHorizontal)] = {xm, y};
            s.dof_points_[edge(i, j, kDiagonal)] = {xm, ym};
            s.dof_points_[edge(i, j, kVertical)] = {x, ym};
        }
    }

    s.dofs_.resize(mesh.n_triangles());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t cell = j * n + i;
            const auto& lower = mesh.triangle(2 * cell).vertex;
            const auto& upper = mesh.triangle(2 * cell + 1).vertex;
            s.dofs_[2 * cell] = {lower[0], lower[1], lower[2], edge(i, j, kHorizontal), edge(i + 1, j, kVertical),
                                 edge(i, j, kDiagonal)};
            s.dofs_[2 * cell + 1] = {upper[0], upper[1], upper[2], edge(i, j, kDiagonal), edge(i, j + 1, kHorizontal),
                                     edge(i, j, kVertical)};
        }
    }

    const std::size_t nq = s.quad_.size();
    s.phi_.resize(nq);
    std::vector<std::array<Vec2, 6>> ref_grads(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        const Vec2 ref{s.quad_.points[q][1], s.quad_.points[q][2]};
        s.phi_[q] = p2_values(ref);
        ref_grads[q] = p2_gradients(ref);
    }
    s.det_.resize(mesh.n_triangles());
    s.grads_.resize(mesh.n_triangles() * nq * FeSpace::kLocalDofs);
    for (std::size_t e = 0; e < mesh.n_triangles(); ++e) {
        const AffineMap map = mesh.element_affine_map(e);
        const double det = map.det();
        const auto& jac = map.jacobian;
        // inverse transpose of the Jacobian
        const Mat2 g{{{jac[1][1] / det, -jac[1][0] / det}, {-jac[0][1] / det, jac[0][0] / det}}};
        s.det_[e] = std::abs(det);
        for (std::size_t q = 0; q < nq; ++q) {
            for (int a = 0; a < FeSpace::kLocalDofs; ++a) {
                const Vec2& r = ref_grads[q][a];
                s.grads_[(e * nq + q) * FeSpace::kLocalDofs + a] = {g[0][0] * r[0] + g[0][1] * r[1],
                                                                    g[1][0] * r[0] + g[1][1] * r[1]};
            }
        }
    }
    return s;
}

const std::array<std::size_t, FeSpace::kLocalDofs>& FeSpace::element_dofs(std::size_t elem) const {
    if (elem >= dofs_.size()) {
        throw IndexOutOfRange("element index " + std::to_string(elem) + " out of range");
    }
    return dofs_[elem];
}

Vec2 FeSpace::quad_point(std::size_t e, std::size_t q) const {
    const AffineMap map = mesh_.element_affine_map(e);
    return wrap_point(map.apply({quad_.points[q][1], quad_.points[q][2]}));
}

FieldVec FeSpace::interpolate(const ScalarFn& fn) const {
    FieldVec v = zeros();
    for (std::size_t i = 0; i < n_dofs_; ++i) {
        v.coeffs[i] = fn(dof_points_[i]);
    }
    return v;
}

FieldVec FeSpace::wrap(std::vector<double> coeffs) const {
    if (coeffs.size() != n_dofs_) {
        throw LineageMismatch("coefficient vector of length " + std::to_string(coeffs.size()) +
                              " does not match space with " + std::to_string(n_dofs_) + " dofs");
    }
    return FieldVec{std::move(coeffs), id_};
}

void FeSpace::check(const FieldVec& v) const {
    if (v.space_id != id_ || v.coeffs.size() != n_dofs_) {
        throw LineageMismatch("field does not belong to this finite-element space");
    }
}

ElementPattern build_pattern(const FeSpace& space) {
    const std::size_t nd = space.n_dofs();
    std::vector<std::vector<std::size_t>> rows(nd);
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) {
                rows[d[a]].push_back(d[b]);
            }
        }
    }
    std::vector<std::size_t> offsets(nd + 1, 0);
    std::vector<std::size_t> cols;
    for (std::size_t r = 0; r < nd; ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        cols.insert(cols.end(), row.begin(), row.end());
        offsets[r + 1] = cols.size();
    }
    std::vector<double> vals(cols.size(), 0.0);
    ElementPattern p{SparseMat(nd, nd, std::move(offsets), std::move(cols), std::move(vals)), {}};
    p.positions.resize(space.n_elements());
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) {
                p.positions[e][a * 6 + b] = p.matrix.find(d[a], d[b]);
            }
        }
    }
    return p;
}

namespace {

template <typename Kernel>
SparseMat assemble_scalar(const FeSpace& space, Kernel&& kernel) {
    ElementPattern p = build_pattern(space);
    auto& vals = p.matrix.values();
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        std::array<double, 36> local{};
        for (std::size_t q = 0; q < space.n_quad(); ++q) {
            kernel(e, q, local);
        }
        for (int k = 0; k < 36; ++k) {
            vals[p.positions[e][k]] += local[k];
        }
    }
    return std::move(p.matrix);
}

FieldVec solve_projection(const FeSpace& space, const SparseMat& a, std::vector<double> rhs) {
    return space.wrap(solve_direct(a, rhs));
}

}  // namespace

SparseMat assemble_mass(const FeSpace& space) {
    return assemble_scalar(space, [&](std::size_t e, std::size_t q, std::array<double, 36>& local) {
        const double w = space.weight(e, q);
        const auto& phi = space.basis(q);
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) {
                local[a * 6 + b] += w * phi[a] * phi[b];
            }
        }
    });
}

SparseMat assemble_stiffness(const FeSpace& space) {
    return assemble_scalar(space, [&](std::size_t e, std::size_t q, std::array<double, 36>& local) {
        const double w = space.weight(e, q);
        const auto g = space.grad_basis(e, q);
        for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) {
                local[a * 6 + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    });
}

FieldVec l2_project(const FeSpace& space, const ScalarFn& fn) {
    std::vector<double> rhs(space.n_dofs(), 0.0);
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (std::size_t q = 0; q < space.n_quad(); ++q) {
            const double wf = space.weight(e, q) * fn(space.quad_point(e, q));
            const auto& phi = space.basis(q);
            for (int a = 0; a < 6; ++a) {
                rhs[d[a]] += wf * phi[a];
            }
        }
    }
    return solve_projection(space, assemble_mass(space), std::move(rhs));
}

FieldVec h1_project(const FeSpace& space, const ScalarFn& fn, const GradientFn& grad_fn) {
    std::vector<double> rhs(space.n_dofs(), 0.0);
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (std::size_t q = 0; q < space.n_quad(); ++q) {
            const Vec2 x = space.quad_point(e, q);
            const double w = space.weight(e, q);
            const double f = fn(x);
            const Vec2 gf = grad_fn(x);
            const auto& phi = space.basis(q);
            const auto g = space.grad_basis(e, q);
            for (int a = 0; a < 6; ++a) {
                rhs[d[a]] += w * (f * phi[a] + gf[0] * g[a][0] + gf[1] * g[a][1]);
            }
        }
    }
    SparseMat a = assemble_mass(space);
    const SparseMat k = assemble_stiffness(space);
    // identical patterns: add value arrays
    for (std::size_t i = 0; i < a.nnz(); ++i) {
        a.values()[i] += k.values()[i];
    }
    return solve_projection(space, a, std::move(rhs));
}

PointValue evaluate(const FeSpace& space, const FieldVec& vec, std::size_t elem, const Vec2& ref_point) {
    space.check(vec);
    const auto& d = space.element_dofs(elem);
    const AffineMap map = space.mesh().element_affine_map(elem);
    const double det = map.det();
    const auto& jac = map.jacobian;
    const auto phi = p2_values(ref_point);
    const auto dphi = p2_gradients(ref_point);
    PointValue out{0.0, {0.0, 0.0}};
    Vec2 ref_grad{0.0, 0.0};
    for (int a = 0; a < 6; ++a) {
        const double c = vec.coeffs[d[a]];
        out.value += c * phi[a];
        ref_grad[0] += c * dphi[a][0];
        ref_grad[1] += c * dphi[a][1];
    }
    out.gradient = {(jac[1][1] * ref_grad[0] - jac[1][0] * ref_grad[1]) / det,
                    (-jac[0][1] * ref_grad[0] + jac[0][0] * ref_grad[1]) / det};
    return out;
}

PointValue evaluate_at(const FeSpace& space, const FieldVec& vec, const Vec2& point) {
    const auto [elem, ref] = space.mesh().locate(point);
    return evaluate(space, vec, elem, ref);
}

double norm(const FeSpace& space, const FieldVec& vec, NormKind kind) {
    space.check(vec);
    double sum = 0.0;
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (std::size_t q = 0; q < space.n_quad(); ++q) {
            const auto& phi = space.basis(q);
            const auto g = space.grad_basis(e, q);
            double u = 0.0;
            Vec2 du{0.0, 0.0};
            for (int a = 0; a < 6; ++a) {
                const double c = vec.coeffs[d[a]];
                u += c * phi[a];
                du[0] += c * g[a][0];
                du[1] += c * g[a][1];
            }
            double integrand = 0.0;
            if (kind != NormKind::H1semi) integrand += u * u;
            if (kind != NormKind::L2) integrand += du[0] * du[0] + du[1] * du[1];
            sum += space.weight(e, q) * integrand;
        }
    }
    return std::sqrt(sum);
}

SparseMat prolongation_matrix(const FeSpace& coarse, const FeSpace& fine) {
    const int offset = fine.mesh().refinement_offset(coarse.mesh());
    if (offset != 0 && offset != 1) {
        throw LineageMismatch("prolong: fine mesh (n=" + std::to_string(fine.mesh().cells_per_side()) +
                              ") is not the uniform refinement of the coarse mesh (n=" +
                              std::to_string(coarse.mesh().cells_per_side()) + ")");
    }
    std::vector<Triplet> triplets;
    triplets.reserve(fine.n_dofs() * 6);
    for (std::size_t i = 0; i < fine.n_dofs(); ++i) {
        if (offset == 0) {
            triplets.push_back({i, i, 1.0});
            continue;
        }
        const auto [elem, ref] = coarse.mesh().locate(fine.dof_point(i));
        const auto& d = coarse.element_dofs(elem);
        const auto phi = p2_values(ref);
        for (int a = 0; a < 6; ++a) {
            if (phi[a] != 0.0) {
                triplets.push_back({i, d[a], phi[a]});
            }
        }
    }
    return from_triplets(fine.n_dofs(), coarse.n_dofs(), triplets);
}

FieldVec prolong(const FeSpace& coarse, const FeSpace& fine, const FieldVec& vec) {
    coarse.check(vec);
    return fine.wrap(matvec(prolongation_matrix(coarse, fine), vec.coeffs));
}

}  // namespace chac
