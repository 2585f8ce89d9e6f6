// observables.hpp — ground-state expectation values and position-space
// wavefunction reconstruction.

#pragma once

#include <Eigen/Dense>

#include "qrm/model.hpp"

namespace qrm {

enum class SpinAxis { X, Y, Z };

/// ⟨σ_axis⟩ of a block-ordered ground state.
double spin_expectation(const GroundState& gs, SpinAxis axis);

/// ⟨(a†+a)²⟩/2 — the position variance in oscillator-length units.
double x_squared(const GroundState& gs);

struct WavefunctionGrid {
    Eigen::VectorXd x;
    Eigen::VectorXd psi_plus;    // σz = + amplitude
    Eigen::VectorXd psi_minus;   // σz = − amplitude
};

/// Spin-resolved ψ±(x) = Σₙ c_n^± φₙ(x) with normalized Hermite functions
/// evaluated by an exponent-tracked three-term recurrence (stable at large n
/// and far into the Gaussian tails).
WavefunctionGrid wavefunction(const GroundState& gs, const Eigen::VectorXd& x_grid);

/// Symmetric grid spanning ±max(6, 6/√ϖ₋) with `points` nodes; ϖ₋ widens the
/// span so the soft spin-down component stays resolved near collapse.
Eigen::VectorXd default_grid(const ModelParams& params, int points = 1025);

} // namespace qrm
