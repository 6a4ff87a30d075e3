#include "chac/scheme.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "chac/errors.hpp"

namespace chac {

namespace {

constexpr int kBlocks = 4;
constexpr int kLd = FeSpace::kLocalDofs;

// R3 does not see mu_eta and R4 does not see mu_rho.
constexpr bool block_coupled(int row_block, int col_block) {
    return !((row_block == 2 && col_block == 3) || (row_block == 3 && col_block == 2));
}

double l2norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::size_t jac_index(std::size_t e, int br, int bc, int a, int b) {
    return ((e * kBlocks + br) * kBlocks + bc) * 36 + static_cast<std::size_t>(a * kLd + b);
}

}  // namespace

Stepper::Stepper(const FeSpace& space, const ModelParams& params, int time_quad_points)
    : space_(&space), params_(params), scalar_(build_pattern(space)) {
    validate(params_);
    if (time_quad_points < 1) {
        throw InvalidParameter("time_quad_points must be >= 1");
    }
    time_rule_ = gauss_legendre_unit(time_quad_points);

    const std::size_t nd = space.n_dofs();
    const auto& soff = scalar_.matrix.row_offsets();
    const auto& scol = scalar_.matrix.col_indices();

    std::vector<std::size_t> offsets(kBlocks * nd + 1, 0);
    std::vector<std::size_t> cols;
    for (int br = 0; br < kBlocks; ++br) {
        for (std::size_t i = 0; i < nd; ++i) {
            for (int bc = 0; bc < kBlocks; ++bc) {
                if (!block_coupled(br, bc)) continue;
                for (std::size_t k = soff[i]; k < soff[i + 1]; ++k) {
                    cols.push_back(static_cast<std::size_t>(bc) * nd + scol[k]);
                }
            }
            offsets[static_cast<std::size_t>(br) * nd + i + 1] = cols.size();
        }
    }
    std::vector<double> vals(cols.size(), 0.0);
    jac_pattern_ = SparseMat(kBlocks * nd, kBlocks * nd, std::move(offsets), std::move(cols), std::move(vals));

    jac_positions_.assign(space.n_elements() * kBlocks * kBlocks * 36, SparseMat::npos);
    const auto& boff = jac_pattern_.row_offsets();
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (int br = 0; br < kBlocks; ++br) {
            for (int a = 0; a < kLd; ++a) {
                const std::size_t i = d[a];
                const std::size_t row_len = soff[i + 1] - soff[i];
                std::size_t block_start = boff[static_cast<std::size_t>(br) * nd + i];
                for (int bc = 0; bc < kBlocks; ++bc) {
                    if (!block_coupled(br, bc)) continue;
                    for (int b = 0; b < kLd; ++b) {
                        const std::size_t sp = scalar_.positions[e][a * kLd + b];
                        jac_positions_[jac_index(e, br, bc, a, b)] = block_start + (sp - soff[i]);
                    }
                    block_start += row_len;
                }
            }
        }
    }

    mass_ = assemble_mass(space);
    stiffness_ = assemble_stiffness(space);
    mass_lu_.factorize(mass_);
}

std::vector<double> Stepper::pack(const StepUnknowns& x) const {
    const std::size_t nd = space_->n_dofs();
    std::vector<double> v(4 * nd);
    std::copy(x.next.rho.coeffs.begin(), x.next.rho.coeffs.end(), v.begin());
    std::copy(x.next.eta.coeffs.begin(), x.next.eta.coeffs.end(), v.begin() + nd);
    std::copy(x.pots.mu_rho.coeffs.begin(), x.pots.mu_rho.coeffs.end(), v.begin() + 2 * nd);
    std::copy(x.pots.mu_eta.coeffs.begin(), x.pots.mu_eta.coeffs.end(), v.begin() + 3 * nd);
    return v;
}

StepUnknowns Stepper::unpack(std::span<const double> v, double time) const {
    const std::size_t nd = space_->n_dofs();
    if (v.size() != 4 * nd) {
        throw InvalidParameter("Stepper::unpack: vector has wrong length");
    }
    auto block = [&](int k) {
        const auto first = v.begin() + static_cast<std::ptrdiff_t>(k * nd);
        return space_->wrap(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(nd)));
    };
    return StepUnknowns{State{block(0), block(1), time}, IntervalPotentials{block(2), block(3)}};
}

template <bool WithJacobian>
void Stepper::assemble(const State& prev, const StepUnknowns& x, double tau, std::vector<double>* res,
                       std::vector<double>* jac_values) const {
    const FeSpace& sp = *space_;
    for (const FieldVec* f : {&prev.rho, &prev.eta, &x.next.rho, &x.next.eta, &x.pots.mu_rho, &x.pots.mu_eta}) {
        sp.check(*f);
    }
    if (!(tau > 0.0)) {
        throw InvalidParameter("time step must be positive");
    }
    const std::size_t nd = sp.n_dofs();
    const double g_rho = params_.gamma_rho;
    const double g_eta = params_.gamma_eta;
    const std::size_t nt = time_rule_.points.size();

    res->assign(4 * nd, 0.0);
    if constexpr (WithJacobian) {
        jac_values->assign(jac_pattern_.nnz(), 0.0);
    }

    for (std::size_t e = 0; e < sp.n_elements(); ++e) {
        const auto& d = sp.element_dofs(e);
        std::array<double, kLd> rp{}, rn{}, ep{}, en{}, mr{}, me{};
        for (int a = 0; a < kLd; ++a) {
            rp[a] = prev.rho.coeffs[d[a]];
            ep[a] = prev.eta.coeffs[d[a]];
            rn[a] = x.next.rho.coeffs[d[a]];
            en[a] = x.next.eta.coeffs[d[a]];
            mr[a] = x.pots.mu_rho.coeffs[d[a]];
            me[a] = x.pots.mu_eta.coeffs[d[a]];
        }
        std::array<std::array<double, kLd>, kBlocks> r_loc{};
        // j_loc[br][bc][a][b]
        std::array<std::array<std::array<std::array<double, kLd>, kLd>, kBlocks>, kBlocks> j_loc{};

        for (std::size_t q = 0; q < sp.n_quad(); ++q) {
            const auto& phi = sp.basis(q);
            const auto g = sp.grad_basis(e, q);
            const double w = sp.weight(e, q);

            double vrp = 0, vrn = 0, vep = 0, ven = 0, vmr = 0, vme = 0;
            Vec2 grp{0, 0}, grn{0, 0}, gep{0, 0}, gen{0, 0}, gmr{0, 0};
            for (int a = 0; a < kLd; ++a) {
                vrp += rp[a] * phi[a];
                vrn += rn[a] * phi[a];
                vep += ep[a] * phi[a];
                ven += en[a] * phi[a];
                vmr += mr[a] * phi[a];
                vme += me[a] * phi[a];
                for (int k = 0; k < 2; ++k) {
                    grp[k] += rp[a] * g[a][k];
                    grn[k] += rn[a] * g[a][k];
                    gep[k] += ep[a] * g[a][k];
                    gen[k] += en[a] * g[a][k];
                    gmr[k] += mr[a] * g[a][k];
                }
            }
            const Vec2 grb{0.5 * (grp[0] + grn[0]), 0.5 * (grp[1] + grn[1])};
            const Vec2 geb{0.5 * (gep[0] + gen[0]), 0.5 * (gep[1] + gen[1])};
            const Omega omega{0.5 * (vrp + vrn), 0.5 * (vep + ven), grb[0], grb[1], geb[0], geb[1]};
            const MobilityValue mob = mobility_eval(params_.mobility, omega);
            const Mat3& L = mob.L;
            const std::array<double, 3> xi{gmr[0], gmr[1], vme};
            std::array<double, 3> flux{};
            for (int i = 0; i < 3; ++i) {
                flux[i] = L[i][0] * xi[0] + L[i][1] * xi[1] + L[i][2] * xi[2];
            }

            // potential terms integrated along s -> (1-s) prev + s next
            double f_r = 0, f_e = 0, dfr_dr = 0, dfr_de = 0, dfe_dr = 0, dfe_de = 0;
            for (std::size_t t = 0; t < nt; ++t) {
                const double s = time_rule_.points[t];
                const double wt = time_rule_.weights[t];
                const PotentialValue pv =
                    potential_eval(params_.potential, (1.0 - s) * vrp + s * vrn, (1.0 - s) * vep + s * ven);
                f_r += wt * pv.f_rho;
                f_e += wt * pv.f_eta;
                if constexpr (WithJacobian) {
                    dfr_dr += wt * s * pv.f_rho_rho;
                    dfr_de += wt * s * pv.f_rho_eta;
                    dfe_dr += wt * s * pv.f_rho_eta;
                    dfe_de += wt * s * pv.f_eta_eta;
                }
            }

            const double tw = tau * w;
            for (int a = 0; a < kLd; ++a) {
                r_loc[0][a] += w * (vrn - vrp) * phi[a] + tw * (flux[0] * g[a][0] + flux[1] * g[a][1]);
                r_loc[1][a] += w * (ven - vep) * phi[a] + tw * flux[2] * phi[a];
                r_loc[2][a] += tw * (vmr * phi[a] - g_rho * (grb[0] * g[a][0] + grb[1] * g[a][1]) - f_r * phi[a]);
                r_loc[3][a] += tw * (vme * phi[a] - g_eta * (geb[0] * g[a][0] + geb[1] * g[a][1]) - f_e * phi[a]);
            }

            if constexpr (WithJacobian) {
                // derivative of the flux with respect to each omega component
                std::array<std::array<double, 3>, 6> dflux{};
                for (int c = 0; c < 6; ++c) {
                    const Mat3& dL = mob.dL[c];
                    for (int i = 0; i < 3; ++i) {
                        dflux[c][i] = dL[i][0] * xi[0] + dL[i][1] * xi[1] + dL[i][2] * xi[2];
                    }
                }
                for (int b = 0; b < kLd; ++b) {
                    // d flux / d rho^n_b and d flux / d eta^n_b (factor 1/2 from averaging)
                    std::array<double, 3> dfr{}, dfe{};
                    for (int i = 0; i < 3; ++i) {
                        dfr[i] = 0.5 * (dflux[0][i] * phi[b] + dflux[2][i] * g[b][0] + dflux[3][i] * g[b][1]);
                        dfe[i] = 0.5 * (dflux[1][i] * phi[b] + dflux[4][i] * g[b][0] + dflux[5][i] * g[b][1]);
                    }
                    // d flux / d mu_rho_b (grad phi_b in the first two slots), d flux / d mu_eta_b
                    std::array<double, 3> dfm{}, dfn{};
                    for (int i = 0; i < 3; ++i) {
                        dfm[i] = L[i][0] * g[b][0] + L[i][1] * g[b][1];
                        dfn[i] = L[i][2] * phi[b];
                    }
                    for (int a = 0; a < kLd; ++a) {
                        const double pp = phi[a] * phi[b];
                        const double gg = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                        auto gdot = [&](const std::array<double, 3>& v) { return v[0] * g[a][0] + v[1] * g[a][1]; };
                        j_loc[0][0][a][b] += w * pp + tw * gdot(dfr);
                        j_loc[0][1][a][b] += tw * gdot(dfe);
                        j_loc[0][2][a][b] += tw * gdot(dfm);
                        j_loc[0][3][a][b] += tw * gdot(dfn);
                        j_loc[1][0][a][b] += tw * dfr[2] * phi[a];
                        j_loc[1][1][a][b] += w * pp + tw * dfe[2] * phi[a];
                        j_loc[1][2][a][b] += tw * dfm[2] * phi[a];
                        j_loc[1][3][a][b] += tw * dfn[2] * phi[a];
                        j_loc[2][0][a][b] -= tw * (0.5 * g_rho * gg + dfr_dr * pp);
                        j_loc[2][1][a][b] -= tw * dfr_de * pp;
                        j_loc[2][2][a][b] += tw * pp;
                        j_loc[3][0][a][b] -= tw * dfe_dr * pp;
                        j_loc[3][1][a][b] -= tw * (0.5 * g_eta * gg + dfe_de * pp);
                        j_loc[3][3][a][b] += tw * pp;
                    }
                }
            }
        }

        for (int br = 0; br < kBlocks; ++br) {
            for (int a = 0; a < kLd; ++a) {
                (*res)[static_cast<std::size_t>(br) * nd + d[a]] += r_loc[br][a];
            }
        }
        if constexpr (WithJacobian) {
            auto& jv = *jac_values;
            for (int br = 0; br < kBlocks; ++br) {
                for (int bc = 0; bc < kBlocks; ++bc) {
                    if (!block_coupled(br, bc)) continue;
                    for (int a = 0; a < kLd; ++a) {
                        for (int b = 0; b < kLd; ++b) {
                            jv[jac_positions_[jac_index(e, br, bc, a, b)]] += j_loc[br][bc][a][b];
                        }
                    }
                }
            }
        }
    }
}

std::vector<double> Stepper::residual(const State& prev, const StepUnknowns& x, double tau) const {
    std::vector<double> r;
    assemble<false>(prev, x, tau, &r, nullptr);
    return r;
}

SparseMat Stepper::jacobian(const State& prev, const StepUnknowns& x, double tau) const {
    std::vector<double> r;
    SparseMat j = jac_pattern_;
    assemble<true>(prev, x, tau, &r, &j.values());
    return j;
}

StepUnknowns Stepper::initial_guess(const State& prev) const {
    const FeSpace& sp = *space_;
    sp.check(prev.rho);
    sp.check(prev.eta);
    const std::size_t nd = sp.n_dofs();
    // M mu = gamma K u + <f_u(prev), phi>
    std::vector<double> b_rho = matvec(stiffness_, prev.rho.coeffs);
    std::vector<double> b_eta = matvec(stiffness_, prev.eta.coeffs);
    for (std::size_t i = 0; i < nd; ++i) {
        b_rho[i] *= params_.gamma_rho;
        b_eta[i] *= params_.gamma_eta;
    }
    for (std::size_t e = 0; e < sp.n_elements(); ++e) {
        const auto& d = sp.element_dofs(e);
        for (std::size_t q = 0; q < sp.n_quad(); ++q) {
            const auto& phi = sp.basis(q);
            double vr = 0.0, ve = 0.0;
            for (int a = 0; a < kLd; ++a) {
                vr += prev.rho.coeffs[d[a]] * phi[a];
                ve += prev.eta.coeffs[d[a]] * phi[a];
            }
            const PotentialValue pv = potential_eval(params_.potential, vr, ve);
            const double w = sp.weight(e, q);
            for (int a = 0; a < kLd; ++a) {
                b_rho[d[a]] += w * pv.f_rho * phi[a];
                b_eta[d[a]] += w * pv.f_eta * phi[a];
            }
        }
    }
    return StepUnknowns{State{prev.rho, prev.eta, prev.time},
                        IntervalPotentials{sp.wrap(mass_lu_.solve(b_rho)), sp.wrap(mass_lu_.solve(b_eta))}};
}

StepResult Stepper::step(const State& prev, double tau, const NewtonOpts& opts) {
    return step_from(prev, initial_guess(prev), tau, opts);
}

StepResult Stepper::step_from(const State& prev, StepUnknowns guess, double tau, const NewtonOpts& opts) {
    if (!(opts.tol_residual > 0.0) || opts.max_iter < 1) {
        throw InvalidParameter("Newton options need tol_residual > 0 and max_iter >= 1");
    }
    const double t_next = prev.time + tau;
    std::vector<double> x = pack(guess);
    std::vector<double> r = residual(prev, guess, tau);
    double rnorm = l2norm(r);
    const double target = std::max(opts.tol_residual * rnorm, opts.abs_floor);

    StepStats stats;
    stats.history.push_back(rnorm);
    int increases = 0;
    while (rnorm > target) {
        if (stats.iterations >= opts.max_iter) {
            std::ostringstream os;
            os << "Newton did not converge in " << opts.max_iter << " iterations (residual " << rnorm
               << ", target " << target << ")";
            throw NonConvergence(stats.iterations, stats.history, os.str());
        }
        const StepUnknowns current = unpack(x, t_next);
        const SparseMat jac = jacobian(prev, current, tau);
        if (opts.fd_jacobian_check && stats.iterations == 0) {
            std::mt19937_64 rng(7);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            std::vector<double> v(x.size());
            for (double& vi : v) vi = u(rng);
            const double eps = 1e-6;
            std::vector<double> xp = x, xm = x;
            for (std::size_t i = 0; i < x.size(); ++i) {
                xp[i] += eps * v[i];
                xm[i] -= eps * v[i];
            }
            const auto rp = residual(prev, unpack(xp, t_next), tau);
            const auto rm = residual(prev, unpack(xm, t_next), tau);
            const auto jv = matvec(jac, v);
            double diff = 0.0, ref = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double fd = (rp[i] - rm[i]) / (2.0 * eps);
                diff += (fd - jv[i]) * (fd - jv[i]);
                ref += jv[i] * jv[i];
            }
            if (std::sqrt(diff) > 1e-6 * std::sqrt(ref)) {
                throw std::runtime_error("Jacobian does not match finite differences");
            }
        }
        jac_lu_.factorize(jac);
        for (double& ri : r) ri = -ri;
        const std::vector<double> dx = jac_lu_.solve(r);

        double lambda = 1.0;
        std::vector<double> trial(x.size());
        auto try_step = [&](double lam) {
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + lam * dx[i];
            std::vector<double> rt = residual(prev, unpack(trial, t_next), tau);
            return std::make_pair(l2norm(rt), std::move(rt));
        };
        auto [new_norm, new_r] = try_step(lambda);
        if (new_norm > rnorm) {
            ++increases;
            if (increases >= 2) {
                // step-halving fallback
                while (new_norm > rnorm && lambda > 1.0 / 1024.0) {
                    lambda *= 0.5;
                    std::tie(new_norm, new_r) = try_step(lambda);
                }
                increases = 0;
            }
        } else {
            increases = 0;
        }
        x = trial;
        r = std::move(new_r);
        rnorm = new_norm;
        ++stats.iterations;
        stats.history.push_back(rnorm);
    }
    stats.residual = rnorm;
    StepUnknowns sol = unpack(x, t_next);
    return StepResult{std::move(sol.next), std::move(sol.pots), std::move(stats)};
}

std::vector<double> assemble_step_residual(const FeSpace& space, const ModelParams& params, const State& prev,
                                           const State& next, const IntervalPotentials& pots, double tau) {
    const Stepper s(space, params);
    return s.residual(prev, StepUnknowns{next, pots}, tau);
}

SparseMat assemble_step_jacobian(const FeSpace& space, const ModelParams& params, const State& prev,
                                 const State& next, const IntervalPotentials& pots, double tau) {
    const Stepper s(space, params);
    return s.jacobian(prev, StepUnknowns{next, pots}, tau);
}

StepResult step(const FeSpace& space, const ModelParams& params, const State& prev, double tau,
                const NewtonOpts& opts) {
    Stepper s(space, params);
    return s.step(prev, tau, opts);
}

InitialData benchmark_initial_data() {
    constexpr double tp = 2.0 * std::numbers::pi;
    InitialData d;
    d.rho = [](const Vec2& p) { return 0.5 + 0.5 * std::sin(tp * p[0]) * std::sin(tp * p[1]); };
    d.grad_rho = [](const Vec2& p) {
        return Vec2{0.5 * tp * std::cos(tp * p[0]) * std::sin(tp * p[1]),
                    0.5 * tp * std::sin(tp * p[0]) * std::cos(tp * p[1])};
    };
    d.eta = [](const Vec2& p) { return 0.5 + 0.5 * std::sin(2.0 * tp * p[0]) * std::sin(tp * p[1]); };
    d.grad_eta = [](const Vec2& p) {
        return Vec2{tp * std::cos(2.0 * tp * p[0]) * std::sin(tp * p[1]),
                    0.5 * tp * std::sin(2.0 * tp * p[0]) * std::cos(tp * p[1])};
    };
    return d;
}

State project_initial(const FeSpace& space, const InitialData& data) {
    return State{h1_project(space, data.rho, data.grad_rho), h1_project(space, data.eta, data.grad_eta), 0.0};
}

namespace {

FieldVec average(const FeSpace& space, const FieldVec& a, const FieldVec& b) {
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (a.coeffs[i] + b.coeffs[i]);
    return space.wrap(std::move(c));
}

}  // namespace

State run(const FeSpace& space, const ModelParams& params, const TimeGrid& grid, const InitialData& initial,
          std::span<RunObserver* const> observers, const RunOptions& opts) {
    if (!(grid.T > 0.0)) {
        throw InvalidParameter("final time T must be positive");
    }
    Stepper stepper(space, params, opts.time_quad_points);
    State state = project_initial(space, initial);

    DiagnosticsRow row;
    row.step = 0;
    row.t = 0.0;
    row.mass_rho = mass(space, state.rho);
    row.energy = energy(space, params, state.rho, state.eta);
    for (RunObserver* o : observers) o->on_start(state, row);

    const double tau = grid.tau();
    for (std::size_t n = 1; n <= grid.N; ++n) {
        StepResult res;
        try {
            res = stepper.step(state, tau, opts.newton);
        } catch (const NonConvergence& ex) {
            throw StepFailure(n, "step " + std::to_string(n) + ": " + ex.what());
        } catch (const SingularMatrix& ex) {
            throw StepFailure(n, "step " + std::to_string(n) + ": " + ex.what());
        }
        res.next.time = grid.time(n);
        DiagnosticsRow next_row;
        next_row.step = n;
        next_row.t = res.next.time;
        next_row.mass_rho = mass(space, res.next.rho);
        next_row.energy = energy(space, params, res.next.rho, res.next.eta);
        const double d = dissipation(space, params, average(space, state.rho, res.next.rho),
                                     average(space, state.eta, res.next.eta), res.pots.mu_rho, res.pots.mu_eta);
        next_row.dissipation_interval = tau * d;
        next_row.energy_identity_residual = energy_identity_residual(row.energy, next_row.energy, tau, d);
        next_row.newton_iters = res.stats.iterations;
        next_row.newton_residual = res.stats.residual;
        const StepRecord rec{state, res.next, res.pots, next_row};
        for (RunObserver* o : observers) o->on_step(rec);
        state = std::move(res.next);
        row = next_row;
    }
    return state;
}

}  // namespace chac
