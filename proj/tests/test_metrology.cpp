#include <doctest.h>

#include <cmath>

#include "qrm/criticality.hpp"
#include "qrm/metrology.hpp"
#include "qrm/model.hpp"

using namespace qrm;

namespace {

ModelParams quad(double Omega, double eps, double gbar) {
    ModelParams p = ModelParams::quadratic(1.0, Omega, eps, 1.0, 0.0);
    p.g = gbar * p.g_T();
    return p;
}

} // namespace

TEST_CASE("qfi: finite and positive at zero coupling (one-sided stencil)") {
    const auto p = quad(0.1, 0.0, 0.0);
    const auto a = qfi_state_derivative(p, QfiParameter::G2);
    const auto b = qfi_fidelity(p, QfiParameter::G2);
    CHECK(a.total > 0.0);
    CHECK(std::isfinite(a.total));
    CHECK(std::abs(a.total - b.total) / a.total < 0.005);
}

TEST_CASE("qfi: method agreement across the coupling range") {
    for (const double gb : {0.3, 0.6, 0.9}) {
        const auto p = quad(0.01, 0.0, gb);
        const double a = qfi_state_derivative(p, QfiParameter::G2).total;
        const double b = qfi_fidelity(p, QfiParameter::G2).total;
        CHECK(std::abs(a - b) / a < 0.005);
        CHECK(a >= 0.0);
    }
}

TEST_CASE("qfi: gauge invariance under eigenvector sign flips") {
    const auto p = quad(0.05, 0.1, 0.5);
    const double delta = 1e-5 * p.g_T();
    SolveOptions o;
    o.exact_truncation = true;
    o.n_initial = 128;
    const auto psi = ground_state(p, o).coefficients;
    const auto lo = ground_state(p.with_g(p.g - delta), o).coefficients;
    const auto hi = ground_state(p.with_g(p.g + delta), o).coefficients;
    const double f = qfi_from_states(psi, lo, hi, delta);
    CHECK(qfi_from_states(psi, -lo, hi, delta) == f);
    CHECK(qfi_from_states(psi, lo, -hi, delta) == f);
    CHECK(qfi_from_states(psi, -lo, -hi, delta) == f);
    CHECK(f >= 0.0);
}

TEST_CASE("qfi: grows monotonically toward collapse at zero bias") {
    double prev = 0.0;
    for (const double gb : {0.9, 0.95, 0.99}) {
        const double f = qfi_state_derivative(quad(0.001, 0.0, gb), QfiParameter::G2).total;
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("qfi: parameter-scale covariance g2 vs g2_bar is exact") {
    const auto p = quad(0.05, 0.1, 0.6);
    const auto a = qfi_state_derivative(p, QfiParameter::G2);
    const auto b = qfi_state_derivative(p, QfiParameter::G2Bar);
    CHECK(b.total == a.total * p.g_T() * p.g_T());
}

TEST_CASE("qfi fidelity: stable in a flat region and guarded at delta -> 0") {
    const auto p = quad(0.3, 0.0, 0.0);
    QfiOptions big;
    big.delta_rel = 4e-5;
    QfiOptions small;
    small.delta_rel = 1e-5;
    const double f1 = qfi_fidelity(p, QfiParameter::G2, big).total;
    const double f2 = qfi_fidelity(p, QfiParameter::G2, small).total;
    CHECK(std::abs(f1 - f2) / f1 < 1e-3);   // extrapolation stable to 3 digits

    // identical-state guard: overlap rounding above 1 must not produce NaN
    Eigen::VectorXd v(4);
    v << 0.5, 0.5, 0.5, 0.5;
    CHECK(qfi_from_states(v, v, v, 1e-9) == 0.0);
}

TEST_CASE("qfi variational: squeezing dominates off-transition at zero bias") {
    const auto r = qfi_variational(quad(0.005, 0.0, 0.5));
    CHECK(r.total == r.rho_part + r.xi_part);   // sum rule, exact
    CHECK(r.rho_part < 0.01 * r.xi_part);
}

TEST_CASE("qfi variational: transition dominates at the optimal bias") {
    const auto base = quad(0.005, 0.328, 0.0);
    const double gc = transition_coupling(0.328, base);
    auto p = base;
    p.g = gc;
    const auto r = qfi_variational(p);
    CHECK(r.rho_part > 10.0 * r.xi_part);
    CHECK(r.total == r.rho_part + r.xi_part);
}

TEST_CASE("qfi variational: agrees with exact diagonalization at the peak") {
    const auto base = quad(0.005, 0.328, 0.0);
    const double gc = transition_coupling(0.328, base);
    auto p = base;
    p.g = gc;
    const double vm = qfi_variational(p).total;
    const double ed = qfi_state_derivative(p, QfiParameter::G2).total;
    CHECK(vm / ed > 0.8);
    CHECK(vm / ed < 1.25);
}

TEST_CASE("analytic maxima: small-coupling limits and rejections") {
    const auto p = ModelParams::quadratic(1.0, 0.01, 0.0, 1.0, 0.0);
    const double gt = p.g_T();
    CHECK(qfi_rho_max(1e-6, p) ==
          doctest::Approx(1.0 / (4.0 * p.Omega * p.Omega * gt * gt)).epsilon(1e-4));
    CHECK(qfi_xi_max(1e-6, p) == doctest::Approx(1.0 / (8.0 * gt * gt)).epsilon(1e-4));
    CHECK_THROWS_AS(qfi_rho_max(0.0, p), InvalidParams);
    CHECK_THROWS_AS(qfi_xi_max(1.0, p), InvalidParams);
    CHECK_THROWS_AS(qfi_rho_max(0.5, ModelParams::linear(1.0, 0.1, 0.0, 0.0)),
                    InvalidParams);
}

TEST_CASE("analytic maxima: crossover boundary in Omega/omega") {
    for (const double gb : {0.99, 0.9999}) {
        const double boundary = std::pow(0.5 * (1.0 - gb), 3.0 / 8.0);
        for (const double factor : {0.5, 2.0}) {
            const auto p = ModelParams::quadratic(1.0, factor * boundary, 0.0, 1.0, 0.0);
            const bool rho_wins = qfi_rho_max(gb, p) > qfi_xi_max(gb, p);
            CHECK(rho_wins == (factor < 1.0));
        }
    }
}

TEST_CASE("inverse-gap quadrature: constant and linear gap oracles") {
    QuadratureOptions q;
    const double t1 = integrate_inverse_gap([](double) { return 0.35; }, 0.8, q);
    CHECK(t1 == doctest::Approx(0.8 / 0.35).epsilon(1e-9));

    // gap(x) = a + b x  →  ∫ dx/gap = ln((a+b·u)/a)/b
    const double a = 0.05, b = 1.7, u = 0.9;
    const double t2 = integrate_inverse_gap([&](double x) { return a + b * x; }, u, q);
    CHECK(t2 == doctest::Approx(std::log((a + b * u) / a) / b).epsilon(2e-6));
    QuadratureOptions tight;
    tight.rel_tol = 1e-9;
    const double t3 = integrate_inverse_gap([&](double x) { return a + b * x; }, u, tight);
    CHECK(t3 == doctest::Approx(std::log((a + b * u) / a) / b).epsilon(1e-8));

    CHECK(integrate_inverse_gap([](double) { return 1.0; }, 0.0, q) == 0.0);
    CHECK_THROWS_AS(integrate_inverse_gap([](double) { return 1e-30; }, 1.0, q),
                    IntegrandBlowup);
}

TEST_CASE("preparation time: ED and variational gap sources agree") {
    auto base = ModelParams::quadratic(1.0, 0.1, 0.0, 1.0, 0.0);
    base.epsilon = optimal_bias(0.9 * base.g_T(), base);
    PrepTimeOptions ed;
    ed.quadrature.rel_tol = 1e-4;
    PrepTimeOptions vm;
    vm.gap_source = GapSource::Variational;
    vm.quadrature.rel_tol = 1e-4;
    const double t_ed = preparation_time(base, 0.9, ed);
    const double t_vm = preparation_time(base, 0.9, vm);
    CHECK(t_ed > 0.0);
    CHECK(t_vm / t_ed > 0.85);
    CHECK(t_vm / t_ed < 1.18);
    CHECK_THROWS_AS(preparation_time(base, 1.0, ed), CollapseRegion);
}
