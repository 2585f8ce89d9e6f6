// metrology.hpp — quantum Fisher information by three routes, the analytic
// peak values, and the probe-preparation-time integral.

#pragma once

#include <Eigen/Dense>

#include <functional>

#include "qrm/model.hpp"
#include "qrm/variational.hpp"

namespace qrm {

enum class QfiMethod {
    StateDerivative,
    FidelitySusceptibility,
    VariationalDecomposed,
    AnalyticMax,
};

// Differentiation parameter.  G2Bar rescales the dimensionful-g2 result by
// g_T² (chain rule, exact); G1 applies to the linear model.
enum class QfiParameter { G2, G2Bar, G1 };

struct QfiResult {
    double total{};
    double rho_part{};   // weight-transfer contribution (variational route)
    double xi_part{};    // squeezing contribution (variational route)
    QfiMethod method{};
    QfiParameter parameter{};
};

struct QfiOptions {
    double delta_rel{1e-5};        // initial finite-difference step / coupling scale
    double delta_floor_rel{1e-9};  // smallest step before giving up
    double richardson_rtol{0.01};  // required agreement between δ and δ/2
    SolveOptions solve{};
    MinimizeOptions minimize{};
};

/// F_Q = 4[⟨ψ′|ψ′⟩ − ⟨ψ′|ψ⟩²], ψ′ by sign-aligned central difference with all
/// states resolved at a common truncation.  The step shrinks until the δ vs
/// δ/2 values agree to richardson_rtol (StepTooCoarse at the floor).
QfiResult qfi_state_derivative(const ModelParams& params, QfiParameter parameter,
                               const QfiOptions& opts = {});

/// Fidelity-susceptibility route: F_Q = 8(1 − |⟨ψ(λ)|ψ(λ+δ)⟩|)/δ², Richardson
/// extrapolated over δ, δ/2.
QfiResult qfi_fidelity(const ModelParams& params, QfiParameter parameter,
                       const QfiOptions& opts = {});

/// Polaron-ansatz decomposition: F_Q^ρ = 4Σ(dc_σ/dg₂)²,
/// F_Q^ξ = 4Σ c_σ²(8ξ_σ²)⁻¹(dξ_σ/dg₂)², total = sum (the cross term vanishes).
QfiResult qfi_variational(const ModelParams& params,
                          QfiParameter parameter = QfiParameter::G2,
                          const QfiOptions& opts = {});

/// Leading-order peak contributions at the optimal bias, in units of g_T⁻².
double qfi_rho_max(double g2_bar, const ModelParams& params);
double qfi_xi_max(double g2_bar, const ModelParams& params);

/// Central-difference combiner on externally supplied unit vectors; exposed so
/// gauge-invariance properties can be tested directly.
double qfi_from_states(const Eigen::VectorXd& psi0, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, double delta);

// ------------------------- preparation time (PTPS) ---------------------------

enum class GapSource { ExactDiagonalization, Variational };

struct QuadratureOptions {
    double rel_tol{1e-6};
    int max_depth{36};
    int scan_points{65};
    double integrand_cap{1e12};   // 1/Δ beyond this raises IntegrandBlowup
};

struct PrepTimeOptions {
    GapSource gap_source{GapSource::ExactDiagonalization};
    QuadratureOptions quadrature{};
    SolveOptions solve{};
};

/// T = ∫₀^{ḡc} Δ(ḡ)⁻¹ dḡ along the coupling ramp of `base` (ḡ = g/g_T for the
/// quadratic model, g/g_c for the linear one).  The exact-diagonalization gap
/// is taken in the even photon-parity sector for the quadratic model — the
/// sector adiabatically connected to the ground state.
double preparation_time(const ModelParams& base, double g_bar_c,
                        const PrepTimeOptions& opts = {});

/// Adaptive quadrature of 1/gap(x) over [0, upper] with subdivision seeded at
/// the scanned gap minima.  Exposed for oracle tests.
double integrate_inverse_gap(const std::function<double(double)>& gap, double upper,
                             const QuadratureOptions& opts = {});

} // namespace qrm
