// variational.hpp — two-Gaussian polaron ansatz for the full quadratic model
// (χ = 1): spin-resolved Gaussians ψ±(x) = c± ξ±^{1/4} exp(−ξ± x²/2)/π^{1/4},
// energy functional E^η = e₊ + η√(e₋² + S_Ω²), and its 2D minimization.
//
// The energy retains the +ω/2 zero-point offset of the position-space form;
// comparisons with exact diagonalization subtract ω/2.

#pragma once

#include "qrm/model.hpp"

namespace qrm {

struct AnsatzTerms {
    double eps_tilde_plus{};   // (1+ḡ₂+ξ₊²)ω/(4ξ₊) − ε
    double eps_tilde_minus{};  // (1−ḡ₂+ξ₋²)ω/(4ξ₋) + ε
    double e_plus{};           // (ε̃₊ + ε̃₋)/2
    double e_minus{};          // (ε̃₊ − ε̃₋)/2
    double s_omega{};          // (ξ₊ξ₋)^{1/4} Ω / √(2(ξ₊+ξ₋))
};

AnsatzTerms ansatz_terms(double xi_plus, double xi_minus, const ModelParams& params);

/// E^η at the given squeezing factors; branch = −1 (ground) or +1.
double ansatz_energy(double xi_plus, double xi_minus, const ModelParams& params,
                     int branch);

struct VariationalSolution {
    double xi_plus{}, xi_minus{};
    double c_plus{}, c_minus{};          // c₊² + c₋² = 1
    double energy_minus{}, energy_plus{};
    double e_plus{}, e_minus{};
    double s_omega{};

    double gap() const { return energy_plus - energy_minus; }
};

struct MinimizeOptions {
    double xi_min{1e-6};
    double xi_max{1e2};
    double ftol_rel{1e-14};   // energy-improvement tolerance relative to max(Ω,ω)
    int max_iter{4000};
};

/// Minimize E⁻ over (ξ₊, ξ₋); throws OptimizationFailed when no interior
/// minimum is found within bounds.
VariationalSolution minimize_ansatz(const ModelParams& params,
                                    const MinimizeOptions& opts = {});

/// Δ = 2√(e₋² + S_Ω²) at the E⁻-minimizing (ξ₊, ξ₋).
double variational_gap(const ModelParams& params, const MinimizeOptions& opts = {});

// Observables of the normalized ansatz state.
double gaussian_overlap(const VariationalSolution& sol);     // ⟨φ₊|φ₋⟩
double vm_sigma_x(const VariationalSolution& sol);           // 2 c₊ c₋ ⟨φ₊|φ₋⟩
double vm_sigma_z(const VariationalSolution& sol);           // c₊² − c₋²
double vm_x_squared(const VariationalSolution& sol);         // Σ c_σ²/(2ξ_σ)

} // namespace qrm
