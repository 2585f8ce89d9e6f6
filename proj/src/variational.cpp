#include "qrm/variational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace qrm {

namespace {

void require_vm_params(const ModelParams& p) {
    p.validate();
    if (p.coupling != Coupling::Quadratic)
        throw InvalidParams("the polaron ansatz applies to the quadratic coupling");
    if (std::abs(p.chi - 1.0) > 1e-12)
        throw InvalidParams("the polaron ansatz energy is printed for chi = 1; "
                            "use exact diagonalization for chi < 1");
}

struct Gradient {
    double d_plus{};
    double d_minus{};
};

Gradient energy_gradient(double xp, double xm, const ModelParams& p) {
    const double gbar = p.g_bar();
    const auto t = ansatz_terms(xp, xm, p);
    const double root = std::hypot(t.e_minus, t.s_omega);
    const double detp = p.omega * (xp * xp - (1.0 + gbar)) / (4.0 * xp * xp);
    const double detm = p.omega * (xm * xm - (1.0 - gbar)) / (4.0 * xm * xm);
    const double dsp = t.s_omega * (1.0 / (4.0 * xp) - 1.0 / (2.0 * (xp + xm)));
    const double dsm = t.s_omega * (1.0 / (4.0 * xm) - 1.0 / (2.0 * (xp + xm)));

    Gradient g;
    if (root > 0.0) {
        g.d_plus = 0.5 * detp - (t.e_minus * 0.5 * detp + t.s_omega * dsp) / root;
        g.d_minus = 0.5 * detm - (-t.e_minus * 0.5 * detm + t.s_omega * dsm) / root;
    } else {
        g.d_plus = 0.5 * detp;
        g.d_minus = 0.5 * detm;
    }
    return g;
}

struct Simplex2DResult {
    double x{}, y{}, f{};
};

// Deterministic Nelder–Mead on f(x,y); no randomness, fixed coefficients.
template <typename F>
Simplex2DResult nelder_mead_2d(F&& f, double x0, double y0, double step,
                               double ftol_abs, int max_iter) {
    std::array<std::array<double, 2>, 3> pt{{{x0, y0}, {x0 + step, y0}, {x0, y0 + step}}};
    std::array<double, 3> fv{f(pt[0][0], pt[0][1]), f(pt[1][0], pt[1][1]),
                             f(pt[2][0], pt[2][1])};
    auto order = [&] {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::array<std::array<double, 2>, 3> p2;
        std::array<double, 3> f2;
        for (int i = 0; i < 3; ++i) {
            p2[i] = pt[idx[i]];
            f2[i] = fv[idx[i]];
        }
        pt = p2;
        fv = f2;
    };
    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::abs(fv[2] - fv[0]) < ftol_abs &&
            std::abs(pt[2][0] - pt[0][0]) + std::abs(pt[2][1] - pt[0][1]) < 1e-12)
            break;
        const double cx = 0.5 * (pt[0][0] + pt[1][0]);
        const double cy = 0.5 * (pt[0][1] + pt[1][1]);
        const double rx = cx + (cx - pt[2][0]);
        const double ry = cy + (cy - pt[2][1]);
        const double fr = f(rx, ry);
        if (fr < fv[0]) {
            const double ex = cx + 2.0 * (cx - pt[2][0]);
            const double ey = cy + 2.0 * (cy - pt[2][1]);
            const double fe = f(ex, ey);
            if (fe < fr) {
                pt[2] = {ex, ey};
                fv[2] = fe;
            } else {
                pt[2] = {rx, ry};
                fv[2] = fr;
            }
        } else if (fr < fv[1]) {
            pt[2] = {rx, ry};
            fv[2] = fr;
        } else {
            const double kx = cx + 0.5 * ((fr < fv[2] ? rx : pt[2][0]) - cx);
            const double ky = cy + 0.5 * ((fr < fv[2] ? ry : pt[2][1]) - cy);
            const double fk = f(kx, ky);
            if (fk < std::min(fr, fv[2])) {
                pt[2] = {kx, ky};
                fv[2] = fk;
            } else {
                for (int i = 1; i < 3; ++i) {
                    pt[i] = {pt[0][0] + 0.5 * (pt[i][0] - pt[0][0]),
                             pt[0][1] + 0.5 * (pt[i][1] - pt[0][1])};
                    fv[i] = f(pt[i][0], pt[i][1]);
                }
            }
        }
    }
    order();
    return {pt[0][0], pt[0][1], fv[0]};
}

VariationalSolution solution_at(double xp, double xm, const ModelParams& p) {
    const auto t = ansatz_terms(xp, xm, p);
    const double root = std::hypot(t.e_minus, t.s_omega);
    VariationalSolution sol;
    sol.xi_plus = xp;
    sol.xi_minus = xm;
    sol.e_plus = t.e_plus;
    sol.e_minus = t.e_minus;
    sol.s_omega = t.s_omega;
    sol.energy_minus = t.e_plus - root;
    sol.energy_plus = t.e_plus + root;
    const double cp = t.e_minus - root;   // η = − branch
    const double cm = t.s_omega;
    const double norm = std::hypot(cp, cm);
    if (norm > 0.0) {
        sol.c_plus = cp / norm;
        sol.c_minus = cm / norm;
    }
    return sol;
}

} // namespace

AnsatzTerms ansatz_terms(double xi_plus, double xi_minus, const ModelParams& params) {
    require_vm_params(params);
    if (!(xi_plus > 0.0) || !(xi_minus > 0.0))
        throw InvalidParams("squeezing factors xi_± must be positive");
    const double gbar = params.g_bar();
    AnsatzTerms t;
    t.eps_tilde_plus =
        (1.0 + gbar + xi_plus * xi_plus) * params.omega / (4.0 * xi_plus) - params.epsilon;
    t.eps_tilde_minus =
        (1.0 - gbar + xi_minus * xi_minus) * params.omega / (4.0 * xi_minus) + params.epsilon;
    t.e_plus = 0.5 * (t.eps_tilde_plus + t.eps_tilde_minus);
    t.e_minus = 0.5 * (t.eps_tilde_plus - t.eps_tilde_minus);
    t.s_omega = std::pow(xi_plus * xi_minus, 0.25) * params.Omega /
                std::sqrt(2.0 * (xi_plus + xi_minus));
    return t;
}

double ansatz_energy(double xi_plus, double xi_minus, const ModelParams& params,
                     int branch) {
    if (branch != 1 && branch != -1) throw InvalidParams("branch must be +1 or -1");
    const auto t = ansatz_terms(xi_plus, xi_minus, params);
    return t.e_plus + branch * std::hypot(t.e_minus, t.s_omega);
}

VariationalSolution minimize_ansatz(const ModelParams& params, const MinimizeOptions& opts) {
    require_vm_params(params);
    const double gbar = params.g_bar();
    if (gbar >= 1.0)
        throw CollapseRegion("polaron minimization requires g2_bar < 1");

    const double wp = std::sqrt(1.0 + gbar);
    const double wm = std::sqrt(1.0 - gbar);

    if (params.Omega == 0.0) {
        // decoupled sectors: each ε̃_σ minimized exactly at ξ_σ = ϖ_σ
        const auto t = ansatz_terms(wp, wm, params);
        VariationalSolution sol;
        sol.xi_plus = wp;
        sol.xi_minus = wm;
        sol.e_plus = t.e_plus;
        sol.e_minus = t.e_minus;
        sol.s_omega = 0.0;
        sol.energy_minus = std::min(t.eps_tilde_plus, t.eps_tilde_minus);
        sol.energy_plus = std::max(t.eps_tilde_plus, t.eps_tilde_minus);
        if (t.eps_tilde_minus <= t.eps_tilde_plus) {   // tie-break toward σz = −
            sol.c_plus = 0.0;
            sol.c_minus = 1.0;
        } else {
            sol.c_plus = 1.0;
            sol.c_minus = 0.0;
        }
        return sol;
    }

    const double unit = params.unit();
    const double ftol = opts.ftol_rel * unit;
    const double lo = std::log(opts.xi_min);
    const double hi = std::log(opts.xi_max);
    auto objective = [&](double u, double v) {
        const double cu = std::clamp(u, lo, hi);
        const double cv = std::clamp(v, lo, hi);
        double penalty = 0.0;
        if (u != cu) penalty += (u - cu) * (u - cu);
        if (v != cv) penalty += (v - cv) * (v - cv);
        return ansatz_energy(std::exp(cu), std::exp(cv), params, -1) + unit * penalty;
    };

    Simplex2DResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    const std::array<std::array<double, 2>, 2> starts{
        {{std::log(wp), std::log(std::max(wm, opts.xi_min))}, {0.0, 0.0}}};
    for (const auto& s : starts) {
        auto r = nelder_mead_2d(objective, s[0], s[1], 0.05, ftol, opts.max_iter);
        if (r.f < best.f) best = r;
    }

    // Newton polish on the analytic gradient for machine-precision minimizers
    double xp = std::exp(std::clamp(best.x, lo, hi));
    double xm = std::exp(std::clamp(best.y, lo, hi));
    double gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 80; ++it) {
        const auto g = energy_gradient(xp, xm, params);
        gnorm = std::abs(g.d_plus) * xp + std::abs(g.d_minus) * xm;
        if (gnorm < 1e-14 * unit) break;
        const double hp = 1e-6 * xp;
        const double hm = 1e-6 * xm;
        const auto gpp = energy_gradient(xp + hp, xm, params);
        const auto gpm = energy_gradient(xp - hp, xm, params);
        const auto gmp = energy_gradient(xp, xm + hm, params);
        const auto gmm = energy_gradient(xp, xm - hm, params);
        const double j11 = (gpp.d_plus - gpm.d_plus) / (2.0 * hp);
        const double j12 = (gmp.d_plus - gmm.d_plus) / (2.0 * hm);
        const double j21 = (gpp.d_minus - gpm.d_minus) / (2.0 * hp);
        const double j22 = (gmp.d_minus - gmm.d_minus) / (2.0 * hm);
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double sp = -(j22 * g.d_plus - j12 * g.d_minus) / det;
        double sm = -(-j21 * g.d_plus + j11 * g.d_minus) / det;
        // multiplicative safeguard keeps the iterates positive
        sp = std::clamp(sp, -0.5 * xp, 0.5 * xp);
        sm = std::clamp(sm, -0.5 * xm, 0.5 * xm);
        xp += sp;
        xm += sm;
    }
    {
        const auto g = energy_gradient(xp, xm, params);
        gnorm = std::abs(g.d_plus) * xp + std::abs(g.d_minus) * xm;
    }

    if (!(xp > opts.xi_min && xp < opts.xi_max && xm > opts.xi_min && xm < opts.xi_max))
        throw OptimizationFailed("polaron minimizer left the admissible xi range");
    if (!(gnorm < 1e-8 * unit))
        throw OptimizationFailed("polaron minimizer failed to reach a stationary point");

    return solution_at(xp, xm, params);
}

double variational_gap(const ModelParams& params, const MinimizeOptions& opts) {
    const auto sol = minimize_ansatz(params, opts);
    return sol.gap();
}

double gaussian_overlap(const VariationalSolution& sol) {
    return std::pow(sol.xi_plus * sol.xi_minus, 0.25) *
           std::sqrt(2.0 / (sol.xi_plus + sol.xi_minus));
}

double vm_sigma_x(const VariationalSolution& sol) {
    return 2.0 * sol.c_plus * sol.c_minus * gaussian_overlap(sol);
}

double vm_sigma_z(const VariationalSolution& sol) {
    return sol.c_plus * sol.c_plus - sol.c_minus * sol.c_minus;
}

double vm_x_squared(const VariationalSolution& sol) {
    return sol.c_plus * sol.c_plus / (2.0 * sol.xi_plus) +
           sol.c_minus * sol.c_minus / (2.0 * sol.xi_minus);
}

} // namespace qrm
