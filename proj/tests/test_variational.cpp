#include <doctest.h>

#include <cmath>
#include <vector>

#include "qrm/criticality.hpp"
#include "qrm/model.hpp"
#include "qrm/variational.hpp"

using namespace qrm;

namespace {

ModelParams quad(double Omega, double eps, double gbar) {
    ModelParams p = ModelParams::quadratic(1.0, Omega, eps, 1.0, 0.0);
    p.g = gbar * p.g_T();
    return p;
}

// Independent oracle: evaluate the two-Gaussian energy by trapezoidal
// quadrature of the position-space functional instead of the printed algebra.
double quadrature_ansatz_energy(double xp, double xm, const ModelParams& p) {
    const double gbar = p.g_bar();
    const int n = 40001;
    const double L = 14.0;
    const double h = 2.0 * L / (n - 1);
    double kin_p = 0.0, pot_p = 0.0, kin_m = 0.0, pot_m = 0.0, ovl = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -L + h * i;
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double pi = 3.14159265358979323846;
        const double fp = std::pow(xp, 0.25) * std::exp(-0.5 * xp * x * x) /
                          std::pow(pi, 0.25);
        const double fm = std::pow(xm, 0.25) * std::exp(-0.5 * xm * x * x) /
                          std::pow(pi, 0.25);
        const double dfp = -xp * x * fp;
        const double dfm = -xm * x * fm;
        kin_p += w * h * 0.5 * p.omega * dfp * dfp;
        kin_m += w * h * 0.5 * p.omega * dfm * dfm;
        pot_p += w * h * 0.5 * p.omega * (1.0 + gbar) * x * x * fp * fp;
        pot_m += w * h * 0.5 * p.omega * (1.0 - gbar) * x * x * fm * fm;
        ovl += w * h * fp * fm;
    }
    const double etp = kin_p + pot_p - p.epsilon;
    const double etm = kin_m + pot_m + p.epsilon;
    const double ep = 0.5 * (etp + etm);
    const double em = 0.5 * (etp - etm);
    const double s = 0.5 * p.Omega * ovl;
    return ep - std::sqrt(em * em + s * s);
}

} // namespace

TEST_CASE("ansatz energy: zero-coupling algebra and equal-xi overlap") {
    for (const double eps : {0.0, 0.2}) {
        const auto p = quad(0.3, eps, 0.0);
        const double e = ansatz_energy(1.0, 1.0, p, -1);
        CHECK(e == doctest::Approx(0.5 - std::sqrt(eps * eps + 0.09 / 4.0)).epsilon(1e-14));
    }
    for (const double xi : {0.3, 1.0, 2.5}) {
        const auto t = ansatz_terms(xi, xi, quad(0.17, 0.0, 0.4));
        CHECK(t.s_omega == doctest::Approx(0.17 / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("ansatz energy: quadrature oracle at a generic point") {
    const auto p = quad(0.01, 0.2, 0.8);
    const double direct = ansatz_energy(1.2, 0.5, p, -1);
    CHECK(direct == doctest::Approx(0.42454843315279606).epsilon(1e-13));
    CHECK(ansatz_energy(1.2, 0.5, p, +1) ==
          doctest::Approx(0.47545156684720397).epsilon(1e-13));
    const double oracle = quadrature_ansatz_energy(1.2, 0.5, p);
    CHECK(std::abs(direct - oracle) < 1e-8);
}

TEST_CASE("ansatz energy: rejections") {
    CHECK_THROWS_AS(ansatz_energy(-1.0, 0.5, quad(0.1, 0.0, 0.3), -1), InvalidParams);
    auto chi0 = ModelParams::quadratic(1.0, 0.1, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(ansatz_energy(1.0, 1.0, chi0, -1), InvalidParams);
    CHECK_THROWS_AS(minimize_ansatz(ModelParams::linear(1.0, 0.1, 0.0, 0.05)),
                    InvalidParams);
}

TEST_CASE("minimize: bare oscillator at zero coupling") {
    const auto sol = minimize_ansatz(quad(0.1, 0.0, 0.0));
    CHECK(std::abs(sol.xi_plus - 1.0) < 1e-7);
    CHECK(std::abs(sol.xi_minus - 1.0) < 1e-7);
    CHECK(sol.energy_minus == doctest::Approx(0.5 - 0.05).epsilon(1e-12));
    CHECK(std::abs(sol.c_plus + sol.c_minus * 1.0) < 1e-6);   // equal weights, c₊ = −c₋
}

TEST_CASE("minimize: Omega = 0 gives the exact squeezed sectors") {
    for (const double gbar : {0.0, 0.3, 0.8, 0.99}) {
        const auto sol = minimize_ansatz(quad(0.0, 0.0, gbar));
        CHECK(sol.xi_plus == std::sqrt(1.0 + gbar));
        CHECK(sol.xi_minus == std::sqrt(1.0 - gbar));
        CHECK(sol.c_minus * sol.c_minus == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("minimize: variational upper bound against exact diagonalization") {
    for (const double gbar : {0.5, 0.9, 0.99}) {
        const auto p = quad(0.01, 0.0, gbar);
        const auto sol = minimize_ansatz(p);
        const auto gs = ground_state(p);
        const double diff = (sol.energy_minus - 0.5) - gs.energy;
        CHECK(diff >= -1e-12);
        CHECK(diff <= 1e-3);
        CHECK(std::abs(sol.c_plus * sol.c_plus + sol.c_minus * sol.c_minus - 1.0) < 1e-12);
        CHECK(sol.energy_minus <= sol.energy_plus);
    }
}

TEST_CASE("variational gap: closed form at zero coupling") {
    const auto sol = minimize_ansatz(quad(0.3, 0.2, 0.0));
    CHECK(variational_gap(quad(0.3, 0.2, 0.0)) ==
          doctest::Approx(2.0 * std::sqrt(0.04 + 0.09 / 4.0)).epsilon(1e-10));
    CHECK(sol.gap() == doctest::Approx(sol.energy_plus - sol.energy_minus).epsilon(1e-15));
}

TEST_CASE("variational gap: ~2 S_Omega at the level crossing") {
    auto p = quad(1e-4, 0.0, 0.8);
    p.epsilon = optimal_bias(p.g, p);
    const auto sol = minimize_ansatz(p);
    const double ratio = sol.gap() / (2.0 * sol.s_omega);
    CHECK(ratio >= 1.0 - 1e-12);
    CHECK(ratio <= 1.01);
}

TEST_CASE("variational gap: matches the even-sector ED gap within 10%") {
    const auto p = quad(0.01, 0.0, 0.9);
    SolveOptions even;
    even.sector = PhotonSector::Even;
    const auto ev = low_spectrum(p, 2, even);
    const double ed_gap = ev[1] - ev[0];
    const double vm = variational_gap(p);
    CHECK(std::abs(vm - ed_gap) / ed_gap < 0.10);
}

TEST_CASE("minimize: smooth weight transfer through the transition") {
    const auto base = quad(0.005, 0.328, 0.0);
    const double gc = transition_coupling(0.328, base);
    std::vector<double> cp2s;
    for (int i = -3; i <= 3; ++i) {
        auto p = base;
        p.g = gc + i * 1e-4 * base.g_T();
        const auto sol = minimize_ansatz(p);
        cp2s.push_back(sol.c_plus * sol.c_plus);
    }
    for (size_t i = 1; i < cp2s.size(); ++i) {
        CHECK(cp2s[i] < cp2s[i - 1]);               // monotone transfer to spin-down
        CHECK(std::abs(cp2s[i] - cp2s[i - 1]) < 0.25);   // no branch jump
    }
    CHECK(cp2s.front() > 0.6);
    CHECK(cp2s.back() < 0.4);
}
