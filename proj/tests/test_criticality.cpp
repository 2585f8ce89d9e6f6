#include <doctest.h>

#include <cmath>

#include "qrm/criticality.hpp"
#include "qrm/model.hpp"
#include "qrm/observables.hpp"

using namespace qrm;

namespace {

ModelParams quad(double Omega, double eps, double chi, double gbar) {
    ModelParams p = ModelParams::quadratic(1.0, Omega, eps, chi, 0.0);
    p.g = gbar * p.g_T();
    return p;
}

} // namespace

TEST_CASE("potentials: bias offset at the origin and collapse flatness") {
    const auto p = quad(0.1, 0.2, 1.0, 0.5);
    const auto [vp0, vm0] = potentials(p, 0.0);
    CHECK(vp0 == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(vm0 == doctest::Approx(+0.2).epsilon(1e-15));

    const auto pc = quad(0.0, 0.15, 1.0, 1.0);   // boundary ḡ₂ = 1 allowed here
    for (const double x : {0.0, 0.7, 3.0}) {
        const auto [vp, vm] = potentials(pc, x);
        CHECK(vm == doctest::Approx(0.15).epsilon(1e-14));
        CHECK(vp == doctest::Approx(x * x - 0.15).epsilon(1e-14));
    }

    const auto [vp1, vm1] = potentials(quad(0.0, 0.2, 1.0, 0.6), 1.0);
    CHECK(vp1 == doctest::Approx(0.6).epsilon(1e-14));   // 0.8 − 0.2
    CHECK(vm1 == doctest::Approx(0.4).epsilon(1e-14));   // 0.2 + 0.2
}

TEST_CASE("single-particle levels: closed forms") {
    // χ = 0: always degenerate at ε = 0
    for (const double gb : {0.0, 0.2, 0.5, 0.9, 0.99}) {
        const auto lp = single_particle_levels(quad(0.0, 0.0, 0.0, gb), 0);
        const double expect = 0.5 * std::sqrt(1.0 - gb * gb);
        CHECK(lp.eps0_plus == doctest::Approx(expect).epsilon(1e-14));
        CHECK(std::abs(lp.eps0_plus - lp.eps0_minus) < 1e-12);
    }
    // χ = 1: (ω/2)√(1±ḡ₂)
    const auto lp = single_particle_levels(quad(0.0, 0.0, 1.0, 0.6), 0);
    CHECK(lp.eps0_plus == doctest::Approx(0.5 * std::sqrt(1.6)).epsilon(1e-14));
    CHECK(lp.eps0_minus == doctest::Approx(0.5 * std::sqrt(0.4)).epsilon(1e-14));
    // shifted levels
    const auto lp2 = single_particle_levels(quad(0.0, 0.1, 1.0, 0.6), 2);
    CHECK(lp2.eps_plus ==
          doctest::Approx(lp2.eps0_plus - 0.1 - 0.5).epsilon(1e-14));
    CHECK(lp2.eps_minus ==
          doctest::Approx(lp2.eps0_minus + 0.1 - 0.5).epsilon(1e-14));
    CHECK(lp2.eps0_plus == doctest::Approx(5.0 * lp.eps0_plus).epsilon(1e-13));

    CHECK_THROWS_AS(single_particle_levels(quad(0.0, 0.0, 1.0, 1.0), 0), CollapseRegion);
}

TEST_CASE("transition coupling: closed form and rejections") {
    const auto p = ModelParams::quadratic(1.0, 0.0, 0.0, 1.0, 0.0);
    CHECK(transition_coupling(0.0, p) == 0.0);
    // ε = 0.328ω: g2c = 0.99025 g_T (direct evaluation of the formula)
    CHECK(transition_coupling(0.328, p) / p.g_T() ==
          doctest::Approx(0.9902462867468881).epsilon(1e-13));
    CHECK_THROWS_AS(transition_coupling(0.51, p), NegativeRadicand);
    const auto chi0 = ModelParams::quadratic(1.0, 0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(transition_coupling(0.2, chi0), InvalidParams);
}

TEST_CASE("round trip: transition_coupling(optimal_bias(g2)) = g2") {
    const auto p = ModelParams::quadratic(1.0, 0.0, 0.0, 1.0, 0.0);
    for (int i = 0; i < 50; ++i) {
        const double gbar = 0.1 + (0.999 - 0.1) * i / 49.0;
        const double g2 = gbar * p.g_T();
        const double eps = optimal_bias(g2, p);
        const double back = transition_coupling(eps, p);
        CHECK(std::abs(back - g2) <= 1e-12 * g2);
    }
}

TEST_CASE("optimal bias: endpoints and monotonicity") {
    const auto p = ModelParams::quadratic(1.0, 0.0, 0.0, 1.0, 0.0);
    CHECK(optimal_bias(0.0, p) == 0.0);
    CHECK(optimal_bias(p.g_T(), p) ==
          doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double e = optimal_bias(0.01 * i * p.g_T(), p);
        CHECK(e > prev);
        prev = e;
    }
    CHECK_THROWS_AS(optimal_bias(1.1 * p.g_T(), p), InvalidParams);
}

TEST_CASE("level crossing: eps_+ = eps_- exactly at the optimal bias") {
    for (const double gbar : {0.2, 0.5, 0.9, 0.99}) {
        auto p = quad(0.0, 0.0, 1.0, gbar);
        p.epsilon = optimal_bias(p.g, p);
        const auto lp = single_particle_levels(p, 0);
        CHECK(std::abs(lp.eps_plus - lp.eps_minus) < 1e-12);
    }
}

TEST_CASE("numeric transition locator agrees with the chi = 1 closed form") {
    const auto p = ModelParams::quadratic(1.0, 0.0, 0.0, 1.0, 0.0);
    for (const double eps : {0.1, 0.25, 0.33}) {
        CHECK(transition_coupling_numeric(eps, p) ==
              doctest::Approx(transition_coupling(eps, p)).epsilon(1e-10));
    }
    // χ between the endpoints: locate, then verify the crossing on the levels
    const auto ph = ModelParams::quadratic(1.0, 0.0, 0.1, 0.5, 0.0);
    const double g2c = transition_coupling_numeric(0.1, ph);
    auto at = ph;
    at.g = g2c;
    const auto lp = single_particle_levels(at, 0);
    CHECK(std::abs(lp.eps_plus - lp.eps_minus) < 1e-10);
    // χ = 0 has no coupling-driven crossing
    const auto chi0 = ModelParams::quadratic(1.0, 0.0, 0.1, 0.0, 0.0);
    CHECK_THROWS_AS(transition_coupling_numeric(0.1, chi0), InvalidParams);
}

TEST_CASE("degeneracy splitting: one crossing at chi = 1 with eps = 0.2") {
    const auto base = ModelParams::quadratic(1.0, 0.0, 0.2, 1.0, 0.0);
    int sign_changes = 0;
    double prev = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double gbar = 0.999 * i / 2000.0;
        auto p = base;
        p.g = gbar * base.g_T();
        const auto lp = single_particle_levels(p, 0);
        const double diff = lp.eps_plus - lp.eps_minus;
        if (i > 0 && diff * prev < 0.0) ++sign_changes;
        prev = diff;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("ED spin flip brackets the predicted transition") {
    // ε = 0.3ω: g2c = 0.96 g_T exactly
    const auto p = ModelParams::quadratic(1.0, 0.01, 0.3, 1.0, 0.0);
    const double g2c = transition_coupling(0.3, p);
    CHECK(g2c / p.g_T() == doctest::Approx(0.96).epsilon(1e-14));
    auto below = p;
    below.g = g2c - 0.01 * p.g_T();
    auto above = p;
    above.g = g2c + 0.01 * p.g_T();
    const double sz_below = spin_expectation(ground_state(below), SpinAxis::Z);
    const double sz_above = spin_expectation(ground_state(above), SpinAxis::Z);
    CHECK(sz_below > 0.0);
    CHECK(sz_above < 0.0);
}
