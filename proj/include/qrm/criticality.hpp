// criticality.hpp — closed-form criticality machinery: spin-dependent
// potentials, single-particle levels, transition coupling, optimal bias.

#pragma once

#include <utility>

#include "qrm/model.hpp"

namespace qrm {

struct LevelPair {
    double eps0_plus{};    // ω(n+1/2)√(1 + (1−χ̃)ḡ₂ − χ̃ḡ₂²)
    double eps0_minus{};   // ω(n+1/2)√(1 − (1−χ̃)ḡ₂ − χ̃ḡ₂²)
    double eps_plus{};     // eps0_plus − ε − ω/2
    double eps_minus{};    // eps0_minus + ε − ω/2
    int n{};
};

/// Spin-dependent harmonic potentials v±(x) = (ω/2)(1±ḡ₂)x² ∓ ε.
/// Valid through the collapse boundary ḡ₂ = 1 (v₋ flat there).
std::pair<double, double> potentials(const ModelParams& params, double x);

/// Single-particle energies of oscillator level n in both spin sectors.
LevelPair single_particle_levels(const ModelParams& params, int n);

/// Bias-dependent transition coupling g2c = 4√((ε/ω)² − 4(ε/ω)⁴)·g_T.
/// Closed form for χ = 1; throws NegativeRadicand for |ε|/ω > 1/2.
double transition_coupling(double epsilon, const ModelParams& params);

/// Numeric transition locator from the eps_± level crossing, valid for
/// χ ∈ (0,1].  Returns g2c; throws InvalidParams when no crossing exists.
double transition_coupling_numeric(double epsilon, const ModelParams& params);

/// Bias that places the transition (and the QFI peak) at coupling g2:
/// ε_max = (ω/4)(√(1+ḡ₂) − √(1−ḡ₂)).
double optimal_bias(double g2, const ModelParams& params);

} // namespace qrm
