#include "qrm/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace qrm {

namespace {

double parameter_scale(const ModelParams& p, QfiParameter kind) {
    switch (kind) {
        case QfiParameter::G2:
        case QfiParameter::G2Bar:
            if (p.coupling != Coupling::Quadratic)
                throw InvalidParams("g2 differentiation requires the quadratic model");
            return p.g_T();
        case QfiParameter::G1:
            if (p.coupling != Coupling::Linear)
                throw InvalidParams("g1 differentiation requires the linear model");
            return p.coupling_scale();
    }
    throw InvalidParams("unknown QFI parameter");
}

// G2Bar results are the dimensionful-g2 ones rescaled by g_T² (chain rule).
double result_rescale(const ModelParams& p, QfiParameter kind) {
    if (kind == QfiParameter::G2Bar) {
        const double gt = p.g_T();
        return gt * gt;
    }
    return 1.0;
}

GroundState solve_conv(const ModelParams& p, const SolveOptions& base, int n_hint) {
    SolveOptions o = base;
    if (n_hint > 0) o.n_initial = std::max(o.n_initial, n_hint);
    return ground_state(p, o);
}

GroundState resolve_at(const ModelParams& p, const SolveOptions& base, int n_exact) {
    SolveOptions o = base;
    o.exact_truncation = true;
    o.n_initial = n_exact;
    return ground_state(p, o);
}

// Keep the whole stencil strictly below the collapse boundary.
double capped_initial_delta(const ModelParams& p, double delta0, double floor_delta,
                            const char* who) {
    if (p.coupling == Coupling::Quadratic) {
        const double room = 0.2 * (p.g_T() - p.g);
        if (room < floor_delta)
            throw StepTooCoarse(std::string(who) +
                                ": too close to the collapse point for a stable stencil");
        delta0 = std::min(delta0, room);
    }
    return delta0;
}

// States of the finite-difference stencil, all at one truncation, signs
// aligned with the base state.
struct Stencil {
    Eigen::VectorXd base;
    std::vector<Eigen::VectorXd> pts;   // stencil states in ascending g order
    bool centered{};
};

Stencil make_stencil(const ModelParams& p, double delta, const SolveOptions& sopts) {
    Stencil st;
    st.centered = p.g - delta >= 0.0;
    std::vector<ModelParams> ps;
    if (st.centered)
        ps = {p.with_g(p.g - delta), p.with_g(p.g + delta)};
    else
        ps = {p.with_g(p.g + delta), p.with_g(p.g + 2.0 * delta)};

    GroundState gs0 = solve_conv(p, sopts, 0);
    std::vector<GroundState> gss;
    gss.reserve(ps.size());
    int n_common = gs0.n_max;
    for (const auto& pp : ps) {
        gss.push_back(solve_conv(pp, sopts, gs0.n_max));
        n_common = std::max(n_common, gss.back().n_max);
    }
    if (gs0.n_max != n_common) gs0 = resolve_at(p, sopts, n_common);
    for (size_t i = 0; i < gss.size(); ++i)
        if (gss[i].n_max != n_common) gss[i] = resolve_at(ps[i], sopts, n_common);

    st.base = std::move(gs0.coefficients);
    for (auto& g : gss) {
        if (g.coefficients.dot(st.base) < 0.0) g.coefficients = -g.coefficients;
        st.pts.push_back(std::move(g.coefficients));
    }
    return st;
}

double qfi_eval_state_derivative(const ModelParams& p, double delta,
                                 const SolveOptions& sopts) {
    const auto st = make_stencil(p, delta, sopts);
    Eigen::VectorXd dpsi;
    if (st.centered)
        dpsi = (st.pts[1] - st.pts[0]) / (2.0 * delta);
    else
        dpsi = (-3.0 * st.base + 4.0 * st.pts[0] - st.pts[1]) / (2.0 * delta);
    const double overlap = dpsi.dot(st.base);
    return 4.0 * (dpsi.squaredNorm() - overlap * overlap);
}

// 1 − |⟨ψ(g)|ψ(g+δ)⟩| with both states at a common truncation.
double fidelity_drop(const ModelParams& p, double delta, const SolveOptions& sopts) {
    GroundState a = solve_conv(p, sopts, 0);
    GroundState b = solve_conv(p.with_g(p.g + delta), sopts, a.n_max);
    if (a.n_max != b.n_max) {
        const int n = std::max(a.n_max, b.n_max);
        if (a.n_max != n) a = resolve_at(p, sopts, n);
        if (b.n_max != n) b = resolve_at(p.with_g(p.g + delta), sopts, n);
    }
    const double ov = std::min(std::abs(a.coefficients.dot(b.coefficients)), 1.0);
    return 1.0 - ov;
}

// Shrink δ until consecutive evaluations agree to rtol; returns {F(δ), F(δ/2)}.
template <typename Eval>
std::pair<double, double> stabilize_step(Eval&& eval, double delta0, double floor_delta,
                                         double rtol, const char* who) {
    double delta = delta0;
    double f1 = eval(delta);
    while (true) {
        const double f2 = eval(0.5 * delta);
        const double scale = std::max(std::abs(f1), std::abs(f2));
        if (std::abs(f1 - f2) <= rtol * scale || scale < 1e-300) return {f1, f2};
        if (0.25 * delta < floor_delta)
            throw StepTooCoarse(std::string(who) +
                                ": finite-difference step hit the floor before stabilizing");
        delta *= 0.5;
        f1 = f2;
    }
}

} // namespace

double qfi_from_states(const Eigen::VectorXd& psi0, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, double delta) {
    Eigen::VectorXd l = lo, h = hi;
    if (l.dot(psi0) < 0.0) l = -l;
    if (h.dot(psi0) < 0.0) h = -h;
    const Eigen::VectorXd dpsi = (h - l) / (2.0 * delta);
    const double overlap = dpsi.dot(psi0);
    return 4.0 * (dpsi.squaredNorm() - overlap * overlap);
}

QfiResult qfi_state_derivative(const ModelParams& params, QfiParameter parameter,
                               const QfiOptions& opts) {
    params.validate();
    const double scale = parameter_scale(params, parameter);
    const double floor_delta = opts.delta_floor_rel * scale;
    const double delta0 = capped_initial_delta(params, opts.delta_rel * scale,
                                               floor_delta, "qfi_state_derivative");
    const auto [f1, f2] = stabilize_step(
        [&](double d) { return qfi_eval_state_derivative(params, d, opts.solve); },
        delta0, floor_delta, opts.richardson_rtol, "qfi_state_derivative");
    (void)f1;
    QfiResult r;
    r.total = f2 * result_rescale(params, parameter);
    r.method = QfiMethod::StateDerivative;
    r.parameter = parameter;
    return r;
}

QfiResult qfi_fidelity(const ModelParams& params, QfiParameter parameter,
                       const QfiOptions& opts) {
    params.validate();
    const double scale = parameter_scale(params, parameter);
    QfiResult r;
    r.method = QfiMethod::FidelitySusceptibility;
    r.parameter = parameter;

    // The overlap drop must clear the double-rounding floor near 1.0, so the
    // step first grows until 1−|⟨ψ|ψ'⟩| is resolvable, then shrinks only while
    // the Richardson pair disagrees and the drop stays above the noise floor.
    constexpr double kDropTarget = 1e-9;
    constexpr double kDropNoise = 1e-11;
    double delta = capped_initial_delta(params, opts.delta_rel * scale,
                                        opts.delta_floor_rel * scale, "qfi_fidelity");
    double delta_max = 0.01 * scale;
    if (params.coupling == Coupling::Quadratic)
        delta_max = std::min(delta_max, 0.45 * (params.g_T() - params.g));
    auto drop_at = [&](double d) { return fidelity_drop(params, d, opts.solve); };

    double drop1 = drop_at(delta);
    while (drop1 < kDropTarget && 2.0 * delta <= delta_max) {
        delta *= 2.0;
        drop1 = drop_at(delta);
    }
    if (drop1 < 1e-13) {   // parameter-insensitive state: finite limit, no blow-up
        r.total = 8.0 * drop1 / (delta * delta) * result_rescale(params, parameter);
        return r;
    }
    while (true) {
        const double drop2 = drop_at(0.5 * delta);
        const double f1 = 8.0 * drop1 / (delta * delta);
        const double f2 = 8.0 * drop2 / (0.25 * delta * delta);
        const bool stable = std::abs(f1 - f2) <= opts.richardson_rtol * std::max(f1, f2);
        if (stable || drop2 < kDropNoise) {
            if (!stable)
                throw StepTooCoarse("qfi_fidelity: overlap drop hit the rounding floor "
                                    "before the Richardson pair stabilized");
            r.total = ((4.0 * f2 - f1) / 3.0) * result_rescale(params, parameter);
            return r;
        }
        if (0.25 * delta < opts.delta_floor_rel * scale)
            throw StepTooCoarse("qfi_fidelity: step hit the floor before stabilizing");
        delta *= 0.5;
        drop1 = drop2;
    }
}

namespace {

struct VmStencil {
    VariationalSolution center;
    double dc_plus, dc_minus, dxi_plus, dxi_minus;
    double jump;   // largest relative ξ jump across the stencil
};

VmStencil vm_stencil(const ModelParams& p, double delta, const MinimizeOptions& mopts) {
    const auto c = minimize_ansatz(p, mopts);
    VariationalSolution lo, hi;
    double width;
    if (p.g - delta >= 0.0) {
        lo = minimize_ansatz(p.with_g(p.g - delta), mopts);
        hi = minimize_ansatz(p.with_g(p.g + delta), mopts);
        width = 2.0 * delta;
    } else {
        lo = c;
        hi = minimize_ansatz(p.with_g(p.g + delta), mopts);
        width = delta;
    }
    VmStencil st;
    st.center = c;
    st.dc_plus = (hi.c_plus - lo.c_plus) / width;
    st.dc_minus = (hi.c_minus - lo.c_minus) / width;
    st.dxi_plus = (hi.xi_plus - lo.xi_plus) / width;
    st.dxi_minus = (hi.xi_minus - lo.xi_minus) / width;
    st.jump = std::max(std::abs(hi.xi_plus - lo.xi_plus) / c.xi_plus,
                       std::abs(hi.xi_minus - lo.xi_minus) / c.xi_minus);
    return st;
}

} // namespace

QfiResult qfi_variational(const ModelParams& params, QfiParameter parameter,
                          const QfiOptions& opts) {
    params.validate();
    if (parameter == QfiParameter::G1)
        throw InvalidParams("the variational decomposition applies to the quadratic model");
    const double scale = parameter_scale(params, parameter);

    auto decompose = [&](double d) {
        const auto st = vm_stencil(params, d, opts.minimize);
        QfiResult r;
        r.rho_part = 4.0 * (st.dc_plus * st.dc_plus + st.dc_minus * st.dc_minus);
        const double cp2 = st.center.c_plus * st.center.c_plus;
        const double cm2 = st.center.c_minus * st.center.c_minus;
        r.xi_part = 4.0 * (cp2 / (8.0 * st.center.xi_plus * st.center.xi_plus) *
                               st.dxi_plus * st.dxi_plus +
                           cm2 / (8.0 * st.center.xi_minus * st.center.xi_minus) *
                               st.dxi_minus * st.dxi_minus);
        r.total = r.rho_part + r.xi_part;
        return r;
    };

    const double floor_delta = opts.delta_floor_rel * scale;
    double delta = capped_initial_delta(params, opts.delta_rel * scale, floor_delta,
                                        "qfi_variational");
    QfiResult r1 = decompose(delta);
    while (true) {
        QfiResult r2 = decompose(0.5 * delta);
        const double sc = std::max(std::abs(r1.total), std::abs(r2.total));
        if (std::abs(r1.total - r2.total) <= opts.richardson_rtol * sc || sc < 1e-300) {
            r2.method = QfiMethod::VariationalDecomposed;
            r2.parameter = parameter;
            const double f = result_rescale(params, parameter);
            r2.total *= f;
            r2.rho_part *= f;
            r2.xi_part *= f;
            return r2;
        }
        if (0.25 * delta < floor_delta) {
            const auto st = vm_stencil(params, 0.5 * delta, opts.minimize);
            if (st.jump > 0.1)
                throw BranchJump("qfi_variational: minimizer jumps across the stencil");
            throw StepTooCoarse("qfi_variational: step hit the floor before stabilizing");
        }
        delta *= 0.5;
        r1 = r2;
    }
}

double qfi_rho_max(double g2_bar, const ModelParams& params) {
    params.validate();
    if (params.coupling != Coupling::Quadratic)
        throw InvalidParams("qfi_rho_max applies to the quadratic model");
    if (!(g2_bar > 0.0 && g2_bar < 1.0))
        throw InvalidParams("qfi_rho_max requires g2_bar in (0,1)");
    if (!(params.Omega > 0.0)) throw InvalidParams("qfi_rho_max requires Omega > 0");
    const double wp = std::sqrt(1.0 + g2_bar);
    const double wm = std::sqrt(1.0 - g2_bar);
    const double w2 = wp * wm;
    const double g2 = g2_bar * g2_bar;
    const double num = g2 * g2 + 4.0 * (1.0 + w2) - g2 * (5.0 + 3.0 * w2);
    const double gt = params.g_T();
    return num * num * params.omega * params.omega /
           (2.0 * std::pow(w2, 4.5) * std::pow(wp + wm, 5.0) * (1.0 + w2) * (1.0 + w2) *
            params.Omega * params.Omega * gt * gt);
}

double qfi_xi_max(double g2_bar, const ModelParams& params) {
    params.validate();
    if (params.coupling != Coupling::Quadratic)
        throw InvalidParams("qfi_xi_max applies to the quadratic model");
    if (!(g2_bar > 0.0 && g2_bar < 1.0))
        throw InvalidParams("qfi_xi_max requires g2_bar in (0,1)");
    const double g2 = g2_bar * g2_bar;
    const double gt = params.g_T();
    return (1.0 + g2) / (8.0 * (1.0 - g2) * (1.0 - g2) * gt * gt);
}

// ------------------------------- quadrature ---------------------------------

namespace {

struct InvGap {
    const std::function<double(double)>& gap;
    double cap;

    double operator()(double x) const {
        const double d = gap(x);
        if (!(d > 0.0) || 1.0 / d > cap)
            throw IntegrandBlowup("1/gap exceeded the configured cap (gap nearly closes)");
        return 1.0 / d;
    }
};

double adaptive_simpson(const InvGap& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate_inverse_gap(const std::function<double(double)>& gap, double upper,
                             const QuadratureOptions& opts) {
    if (upper < 0.0) throw InvalidParams("integration upper limit must be non-negative");
    if (upper == 0.0) return 0.0;
    const InvGap f{gap, opts.integrand_cap};

    // coarse scan: rough total and candidate gap minima
    const int np = std::max(opts.scan_points, 9);
    std::vector<double> xs(static_cast<size_t>(np)), fs(static_cast<size_t>(np));
    for (int i = 0; i < np; ++i) {
        xs[static_cast<size_t>(i)] = upper * i / (np - 1);
        fs[static_cast<size_t>(i)] = f(xs[static_cast<size_t>(i)]);
    }
    double rough = 0.0;
    for (int i = 0; i + 1 < np; ++i)
        rough += 0.5 * (fs[static_cast<size_t>(i)] + fs[static_cast<size_t>(i + 1)]) *
                 (xs[static_cast<size_t>(i + 1)] - xs[static_cast<size_t>(i)]);

    std::set<double> cuts{0.0, upper};
    auto add_graded = [&](double center) {
        for (int k = 2; k <= 8; ++k) {
            const double off = upper * std::pow(10.0, -k);
            for (const double c : {center - off, center + off})
                if (c > 0.0 && c < upper) cuts.insert(c);
        }
        if (center > 0.0 && center < upper) cuts.insert(center);
    };
    for (int i = 1; i + 1 < np; ++i)
        if (fs[static_cast<size_t>(i)] > fs[static_cast<size_t>(i - 1)] &&
            fs[static_cast<size_t>(i)] > fs[static_cast<size_t>(i + 1)])
            add_graded(xs[static_cast<size_t>(i)]);
    add_graded(upper);   // the ramp often ends right at the gap minimum

    std::vector<double> edges(cuts.begin(), cuts.end());
    const double tol_total = opts.rel_tol * std::max(rough, 1e-300);
    double total = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i];
        const double b = edges[i + 1];
        const double fa = f(a);
        const double fb = f(b);
        const double fm = f(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double tol = tol_total * std::max((b - a) / upper, 1e-3);
        total += adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, opts.max_depth);
    }
    return total;
}

double preparation_time(const ModelParams& base, double g_bar_c,
                        const PrepTimeOptions& opts) {
    base.validate();
    if (!(g_bar_c > 0.0)) throw InvalidParams("g_bar_c must be positive");
    const bool quad = base.coupling == Coupling::Quadratic;
    if (quad && g_bar_c >= 1.0)
        throw CollapseRegion("quadratic ramp must end below the collapse point");
    if (!quad && opts.gap_source == GapSource::Variational)
        throw InvalidParams("the variational gap exists only for the quadratic model");
    const double scale = base.coupling_scale();

    std::function<double(double)> gap;
    if (opts.gap_source == GapSource::Variational) {
        gap = [&](double gbar) {
            return variational_gap(base.with_g(gbar * scale));
        };
    } else {
        SolveOptions so = opts.solve;
        if (quad) so.sector = PhotonSector::Even;
        gap = [&, so](double gbar) {
            const auto ev = low_spectrum(base.with_g(gbar * scale), 2, so);
            return ev[1] - ev[0];
        };
    }
    // dimensionless in the max(Ω,ω) = 1 unit system
    return integrate_inverse_gap(gap, g_bar_c, opts.quadrature) * base.unit();
}

} // namespace qrm
