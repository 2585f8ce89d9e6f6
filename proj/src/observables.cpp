#include "qrm/observables.hpp"

#include <cmath>
#include <numbers>

namespace qrm {

namespace {

constexpr double kPiQuarterInv = 0.7511255444649425;   // π^{−1/4}

// Σₙ c[n] φₙ(x) with φₙ the normalized Hermite functions.  The pair (f, e2)
// represents f·2^{e2}; rescaling keeps the recurrence inside double range even
// where exp(−x²/2) alone underflows.
double hermite_series(const Eigen::Ref<const Eigen::VectorXd>& c, double x) {
    const int n = static_cast<int>(c.size());
    if (n == 0) return 0.0;
    const double log2_gauss = -0.5 * x * x * 1.4426950408889634;   // log2 e^{−x²/2}
    int e2 = static_cast<int>(std::floor(log2_gauss));
    double f_prev = 0.0;
    double f_cur = kPiQuarterInv * std::exp2(log2_gauss - e2);
    double sum = c[0] * std::ldexp(f_cur, e2);
    for (int k = 1; k < n; ++k) {
        const double f_next =
            x * std::sqrt(2.0 / k) * f_cur - std::sqrt((k - 1.0) / k) * f_prev;
        f_prev = f_cur;
        f_cur = f_next;
        sum += c[k] * std::ldexp(f_cur, e2);
        const double mag = std::max(std::abs(f_cur), std::abs(f_prev));
        if (mag > 0x1p500) {
            f_cur = std::ldexp(f_cur, -1000);
            f_prev = std::ldexp(f_prev, -1000);
            e2 += 1000;
        } else if (mag < 0x1p-500 && mag > 0.0) {
            f_cur = std::ldexp(f_cur, 1000);
            f_prev = std::ldexp(f_prev, 1000);
            e2 -= 1000;
        }
    }
    return sum;
}

} // namespace

double spin_expectation(const GroundState& gs, SpinAxis axis) {
    const int m = gs.n_max;
    const auto up = gs.coefficients.head(m);
    const auto dn = gs.coefficients.tail(m);
    switch (axis) {
        case SpinAxis::X: return 2.0 * up.dot(dn);
        case SpinAxis::Y: return 0.0;   // real ground state
        case SpinAxis::Z: return up.squaredNorm() - dn.squaredNorm();
    }
    return 0.0;
}

double x_squared(const GroundState& gs) {
    const int m = gs.n_max;
    double total = 0.0;
    for (int s = 0; s < 2; ++s) {
        const auto c = gs.coefficients.segment(s * m, m);
        for (int n = 0; n < m; ++n) {
            total += c[n] * c[n] * (2.0 * n + 1.0);
            if (n + 2 < m)
                total += 2.0 * c[n] * c[n + 2] * std::sqrt(double(n + 1) * double(n + 2));
        }
    }
    return 0.5 * total;
}

WavefunctionGrid wavefunction(const GroundState& gs, const Eigen::VectorXd& x_grid) {
    const int m = gs.n_max;
    WavefunctionGrid w;
    w.x = x_grid;
    w.psi_plus.resize(x_grid.size());
    w.psi_minus.resize(x_grid.size());
    const auto up = gs.coefficients.head(m);
    const auto dn = gs.coefficients.tail(m);
    for (int i = 0; i < x_grid.size(); ++i) {
        w.psi_plus[i] = hermite_series(up, x_grid[i]);
        w.psi_minus[i] = hermite_series(dn, x_grid[i]);
    }
    return w;
}

Eigen::VectorXd default_grid(const ModelParams& params, int points) {
    if (points < 512) throw InvalidParams("wavefunction grid needs at least 512 points");
    double span = 6.0;
    if (params.coupling == Coupling::Quadratic) {
        const auto d = derived_scales(params);
        span = std::max(span, 6.0 / std::sqrt(std::max(d.varpi_minus, 1e-12)));
    } else {
        span = 6.0 + 2.0 * std::numbers::sqrt2 * params.g / params.omega;
    }
    return Eigen::VectorXd::LinSpaced(points, -span, span);
}

} // namespace qrm
