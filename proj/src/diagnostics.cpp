#include "chac/diagnostics.hpp"

#include <array>
#include <initializer_list>

namespace chac {

namespace {

struct Local {
    double value;
    Vec2 grad;
};

Local eval_local(const FeSpace& space, const FieldVec& v, std::size_t e, std::size_t q) {
    const auto& d = space.element_dofs(e);
    const auto& phi = space.basis(q);
    const auto g = space.grad_basis(e, q);
    Local out{0.0, {0.0, 0.0}};
    for (int a = 0; a < FeSpace::kLocalDofs; ++a) {
        const double c = v.coeffs[d[a]];
        out.value += c * phi[a];
        out.grad[0] += c * g[a][0];
        out.grad[1] += c * g[a][1];
    }
    return out;
}

double sq(const Vec2& g) { return g[0] * g[0] + g[1] * g[1]; }

template <typename Integrand>
double integrate(const FeSpace& space, Integrand&& integrand) {
    double sum = 0.0;
    for (std::size_t e = 0; e < space.n_elements(); ++e) {
        for (std::size_t q = 0; q < space.n_quad(); ++q) {
            sum += space.weight(e, q) * integrand(e, q);
        }
    }
    return sum;
}

void check_all(const FeSpace& space, std::initializer_list<const FieldVec*> fields) {
    for (const FieldVec* f : fields) space.check(*f);
}

}  // namespace

double mass(const FeSpace& space, const FieldVec& rho) {
    space.check(rho);
    return integrate(space, [&](std::size_t e, std::size_t q) { return eval_local(space, rho, e, q).value; });
}

double energy(const FeSpace& space, const ModelParams& params, const FieldVec& rho, const FieldVec& eta) {
    check_all(space, {&rho, &eta});
    return integrate(space, [&](std::size_t e, std::size_t q) {
        const Local r = eval_local(space, rho, e, q);
        const Local h = eval_local(space, eta, e, q);
        return 0.5 * params.gamma_rho * sq(r.grad) + 0.5 * params.gamma_eta * sq(h.grad) +
               potential_eval(params.potential, r.value, h.value).f;
    });
}

double dissipation(const FeSpace& space, const ModelParams& params, const FieldVec& rho_bar, const FieldVec& eta_bar,
                   const FieldVec& mu_rho, const FieldVec& mu_eta) {
    check_all(space, {&rho_bar, &eta_bar, &mu_rho, &mu_eta});
    return integrate(space, [&](std::size_t e, std::size_t q) {
        const Local r = eval_local(space, rho_bar, e, q);
        const Local h = eval_local(space, eta_bar, e, q);
        const Local mr = eval_local(space, mu_rho, e, q);
        const Local me = eval_local(space, mu_eta, e, q);
        const Omega w{r.value, h.value, r.grad[0], r.grad[1], h.grad[0], h.grad[1]};
        const Mat3 L = mobility_eval(params.mobility, w).L;
        const std::array<double, 3> xi{mr.grad[0], mr.grad[1], me.value};
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                s += xi[i] * L[i][j] * xi[j];
            }
        }
        return s;
    });
}

double relative_energy(const FeSpace& space, const ModelParams& params, const FieldVec& rho, const FieldVec& eta,
                       const FieldVec& rho_hat, const FieldVec& eta_hat, double alpha) {
    check_all(space, {&rho, &eta, &rho_hat, &eta_hat});
    return integrate(space, [&](std::size_t e, std::size_t q) {
        const Local r = eval_local(space, rho, e, q);
        const Local h = eval_local(space, eta, e, q);
        const Local rh = eval_local(space, rho_hat, e, q);
        const Local hh = eval_local(space, eta_hat, e, q);
        const double dr = r.value - rh.value;
        const double dh = h.value - hh.value;
        const Vec2 gdr{r.grad[0] - rh.grad[0], r.grad[1] - rh.grad[1]};
        const Vec2 gdh{h.grad[0] - hh.grad[0], h.grad[1] - hh.grad[1]};
        const PotentialValue f = potential_eval(params.potential, r.value, h.value);
        const PotentialValue fh = potential_eval(params.potential, rh.value, hh.value);
        return 0.5 * params.gamma_rho * sq(gdr) + 0.5 * params.gamma_eta * sq(gdh) +
               0.5 * alpha * (dr * dr + dh * dh) + f.f - fh.f - fh.f_rho * dr - fh.f_eta * dh;
    });
}

}  // namespace chac
