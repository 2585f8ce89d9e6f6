#include "qrm/criticality.hpp"

#include <cmath>

namespace qrm {

namespace {

void require_quadratic(const ModelParams& p) {
    if (p.coupling != Coupling::Quadratic)
        throw InvalidParams("criticality formulas apply to the quadratic coupling");
}

void require_chi_one(const ModelParams& p, const char* what) {
    if (std::abs(p.chi - 1.0) > 1e-12)
        throw InvalidParams(std::string(what) + " is derived for chi = 1");
}

double level_split(const ModelParams& p, double gbar) {
    const double ct = (1.0 - p.chi) / (1.0 + p.chi);
    const double rp = 1.0 + (1.0 - ct) * gbar - ct * gbar * gbar;
    const double rm = 1.0 - (1.0 - ct) * gbar - ct * gbar * gbar;
    return 0.5 * p.omega * (std::sqrt(std::max(rp, 0.0)) - std::sqrt(std::max(rm, 0.0)));
}

} // namespace

std::pair<double, double> potentials(const ModelParams& params, double x) {
    params.validate();
    require_quadratic(params);
    const double gbar = params.g_bar();   // m± ϖ±² = 1 ± ḡ₂ for every χ
    const double vp = 0.5 * params.omega * (1.0 + gbar) * x * x - params.epsilon;
    const double vm = 0.5 * params.omega * (1.0 - gbar) * x * x + params.epsilon;
    return {vp, vm};
}

LevelPair single_particle_levels(const ModelParams& params, int n) {
    params.validate();
    require_quadratic(params);
    if (n < 0) throw InvalidParams("oscillator quantum number must be non-negative");
    const auto d = derived_scales(params);   // rejects ḡ₂ ≥ 1
    const double ct = d.chi_tilde;
    const double gbar = d.g2_bar;
    const double rad_p = 1.0 + (1.0 - ct) * gbar - ct * gbar * gbar;
    const double rad_m = 1.0 - (1.0 - ct) * gbar - ct * gbar * gbar;

    LevelPair lp;
    lp.n = n;
    lp.eps0_plus = params.omega * (n + 0.5) * std::sqrt(std::max(rad_p, 0.0));
    lp.eps0_minus = params.omega * (n + 0.5) * std::sqrt(std::max(rad_m, 0.0));
    lp.eps_plus = lp.eps0_plus - params.epsilon - 0.5 * params.omega;
    lp.eps_minus = lp.eps0_minus + params.epsilon - 0.5 * params.omega;
    return lp;
}

double transition_coupling(double epsilon, const ModelParams& params) {
    params.validate();
    require_quadratic(params);
    require_chi_one(params, "transition_coupling");
    const double r = epsilon / params.omega;
    const double radicand = r * r - 4.0 * r * r * r * r;
    if (radicand < 0.0)
        throw NegativeRadicand("transition_coupling: |epsilon|/omega exceeds 1/2");
    return 4.0 * std::sqrt(radicand) * params.g_T();
}

double transition_coupling_numeric(double epsilon, const ModelParams& params) {
    params.validate();
    require_quadratic(params);
    if (params.chi <= 0.0)
        throw InvalidParams("no coupling-driven level crossing at chi = 0 "
                            "(single-particle energies stay degenerate)");
    const double target = 2.0 * std::abs(epsilon);
    if (epsilon == 0.0) return 0.0;

    // level_split(ḡ) grows monotonically from 0; bisect split(ḡ) = 2ε
    double lo = 0.0, hi = 1.0 - 1e-14;
    if (level_split(params, hi) < target)
        throw InvalidParams("bias too large: eps_+ = eps_- has no solution below collapse");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (level_split(params, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi) * params.g_T();
}

double optimal_bias(double g2, const ModelParams& params) {
    params.validate();
    require_quadratic(params);
    const double gbar = g2 / params.g_T();
    if (gbar < 0.0 || gbar > 1.0)
        throw InvalidParams("optimal_bias requires g2_bar in [0,1]");
    return 0.25 * params.omega * (std::sqrt(1.0 + gbar) - std::sqrt(1.0 - gbar));
}

} // namespace qrm
