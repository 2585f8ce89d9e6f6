// model.hpp — truncated spin⊗Fock Hamiltonian of the (an)harmonic Rabi models
//
// Covers the quadratic family  H = ω a†a + (Ω/2)σx + g2 σz[(a†)²+a² + χ(2a†a+1)] − ε σz
// (χ=1 full quadratic, χ=0 two-photon) and the linear comparison model with
// coupling g1 σz(a†+a).  Eigenpairs come from a dense symmetric solve at small
// dimension and a banded shift-invert Lanczos above that, with adaptive
// truncation growth until the ground energy and occupation tail settle.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <vector>

#include "qrm/errors.hpp"

namespace qrm {

enum class Coupling { Quadratic, Linear };

struct ModelParams {
    double omega{1.0};            // boson frequency, sets the energy scale
    double Omega{0.0};            // qubit tunneling
    double epsilon{0.0};          // longitudinal bias (−ε σz)
    double chi{1.0};              // quadratic decomposition parameter in [0,1]
    Coupling coupling{Coupling::Quadratic};
    double g{0.0};                // g2 (quadratic) or g1 (linear)

    static ModelParams quadratic(double omega, double Omega, double epsilon,
                                 double chi, double g2);
    static ModelParams linear(double omega, double Omega, double epsilon, double g1);

    // max(Ω, ω): the internal unit of energy
    double unit() const { return Omega > omega ? Omega : omega; }

    // spectral-collapse coupling of the quadratic family
    double g_T() const { return omega / (2.0 * (1.0 + chi)); }
    // conventional critical coupling of the linear QRM
    double g_c() const;

    double coupling_scale() const;          // g_T or g_c by kind
    double g_bar() const { return g / coupling_scale(); }

    ModelParams with_g(double g_new) const;
    ModelParams with_epsilon(double eps_new) const;

    void validate() const;                   // InvalidParams / CollapseRegion
};

struct DerivedScales {
    double g_T{};
    double chi_tilde{};
    double g2_bar{};
    double m_plus{}, m_minus{};              // effective masses
    double varpi_plus{}, varpi_minus{};      // renormalized frequencies
    double w_plus{}, w_minus{};              // √(1±ḡ₂)
    double w2{};                             // w₊ w₋
};

/// Closed-form scales of the quadratic model.  Rejects ḡ₂ ≥ 1 (CollapseRegion)
/// and χ outside [0,1] (InvalidParams).
DerivedScales derived_scales(const ModelParams& params);

// Photon-parity sector restriction; Even/Odd is meaningful only for the
// quadratic coupling, which commutes with exp(iπ a†a).
enum class PhotonSector { Full, Even, Odd };

struct SolveOptions {
    int n_initial{64};             // starting Fock truncation
    int n_cap{16384};              // hard truncation cap
    int growth_factor{2};          // truncation growth per convergence round
    double energy_tol_rel{1e-10};  // convergence tolerance relative to max(Ω,ω)
    PhotonSector sector{PhotonSector::Full};
    bool allow_unconverged{false}; // return flagged result instead of throwing
    bool exact_truncation{false};  // solve once at n_initial, skip the doubling loop
    bool warm_start{true};         // raise n_initial from an occupation estimate
    int dense_dim_max{1024};       // dense symmetric solve at or below this dimension
};

struct GroundState {
    double energy{};
    double gap{};                    // E1 − E0 over the full spectrum
    Eigen::VectorXd coefficients;    // length 2·n_max: [σz=+ block | σz=− block]
    int n_max{};
    bool converged{};
    ModelParams params;

    double spin_up_weight() const { return coefficients.head(n_max).squaredNorm(); }
};

/// Assemble the truncated Hamiltonian (dimension 2·n_max for the Full sector,
/// basis index = spin block · n_max + n).  Symmetric by construction.
Eigen::SparseMatrix<double> build_hamiltonian(const ModelParams& params, int n_max,
                                              PhotonSector sector = PhotonSector::Full);

/// Lowest eigenpair with the gap to the first excited state.  Gauge fixed so
/// the coefficient of largest magnitude is positive.
GroundState ground_state(const ModelParams& params, const SolveOptions& opts = {});

/// First k eigenvalues in ascending order, converged under truncation doubling.
std::vector<double> low_spectrum(const ModelParams& params, int k,
                                 const SolveOptions& opts = {});

// Occupation statistics of a block-ordered coefficient vector.
struct OccupationStats {
    double mean{};
    double stddev{};
};
OccupationStats occupation_stats(const Eigen::VectorXd& coefficients, int n_max,
                                 PhotonSector sector = PhotonSector::Full);

} // namespace qrm
