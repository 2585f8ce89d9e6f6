#include "qrm/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "banded_eigs.hpp"

namespace qrm {

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_finite(const ModelParams& p) {
    if (!finite(p.omega) || !finite(p.Omega) || !finite(p.epsilon) || !finite(p.chi) ||
        !finite(p.g))
        throw InvalidParams("model parameters must be finite");
}

} // namespace

ModelParams ModelParams::quadratic(double omega, double Omega, double epsilon,
                                   double chi, double g2) {
    ModelParams p;
    p.omega = omega;
    p.Omega = Omega;
    p.epsilon = epsilon;
    p.chi = chi;
    p.coupling = Coupling::Quadratic;
    p.g = g2;
    return p;
}

ModelParams ModelParams::linear(double omega, double Omega, double epsilon, double g1) {
    ModelParams p;
    p.omega = omega;
    p.Omega = Omega;
    p.epsilon = epsilon;
    p.coupling = Coupling::Linear;
    p.g = g1;
    return p;
}

double ModelParams::g_c() const { return std::sqrt(omega * Omega) / 2.0; }

double ModelParams::coupling_scale() const {
    if (coupling == Coupling::Quadratic) return g_T();
    const double gc = g_c();
    if (!(gc > 0.0))
        throw InvalidParams("linear coupling scale g_c = sqrt(omega*Omega)/2 is zero; "
                            "Omega must be positive to normalize g1");
    return gc;
}

ModelParams ModelParams::with_g(double g_new) const {
    ModelParams p = *this;
    p.g = g_new;
    return p;
}

ModelParams ModelParams::with_epsilon(double eps_new) const {
    ModelParams p = *this;
    p.epsilon = eps_new;
    return p;
}

void ModelParams::validate() const {
    check_finite(*this);
    if (!(omega > 0.0)) throw InvalidParams("omega must be positive");
    if (Omega < 0.0) throw InvalidParams("Omega must be non-negative");
    if (g < 0.0) throw InvalidParams("coupling strength must be non-negative");
    if (coupling == Coupling::Quadratic) {
        if (chi < 0.0 || chi > 1.0) throw InvalidParams("chi must lie in [0,1]");
        if (g > g_T())
            throw CollapseRegion("g2 exceeds the spectral-collapse coupling g_T = omega/[2(1+chi)]");
    }
}

DerivedScales derived_scales(const ModelParams& params) {
    params.validate();
    if (params.coupling != Coupling::Quadratic)
        throw InvalidParams("derived_scales is defined for the quadratic coupling");
    const double gt = params.g_T();
    const double gbar = params.g / gt;
    if (gbar >= 1.0)
        throw CollapseRegion("g2_bar >= 1: at or beyond the spectral collapse point");

    DerivedScales d;
    d.g_T = gt;
    d.chi_tilde = (1.0 - params.chi) / (1.0 + params.chi);
    d.g2_bar = gbar;
    d.m_plus = 1.0 / (1.0 - d.chi_tilde * gbar);
    d.m_minus = 1.0 / (1.0 + d.chi_tilde * gbar);
    d.varpi_plus = std::sqrt((1.0 + gbar) * (1.0 - d.chi_tilde * gbar));
    d.varpi_minus = std::sqrt((1.0 - gbar) * (1.0 + d.chi_tilde * gbar));
    d.w_plus = std::sqrt(1.0 + gbar);
    d.w_minus = std::sqrt(1.0 - gbar);
    d.w2 = d.w_plus * d.w_minus;
    return d;
}

// --------------------------- assembly helpers -------------------------------

namespace {

std::vector<int> photon_list(int n_max, PhotonSector sector) {
    std::vector<int> ns;
    const int start = (sector == PhotonSector::Odd) ? 1 : 0;
    const int step = (sector == PhotonSector::Full) ? 1 : 2;
    for (int n = start; n < n_max; n += step) ns.push_back(n);
    return ns;
}

// Emit every stored entry once per unordered pair; spin s: 0 → σz=+1, 1 → σz=−1.
// emit(s, i, s2, j, value) uses photon-list indices.
template <typename Emit>
void for_each_entry(const ModelParams& p, const std::vector<int>& ns, bool both_spins,
                    int only_spin, Emit&& emit) {
    const bool quad = p.coupling == Coupling::Quadratic;
    const int m = static_cast<int>(ns.size());
    for (int s = 0; s < 2; ++s) {
        if (!both_spins && s != only_spin) continue;
        const double sgn = (s == 0) ? 1.0 : -1.0;
        for (int i = 0; i < m; ++i) {
            const int n = ns[static_cast<size_t>(i)];
            double diag = p.omega * n - sgn * p.epsilon;
            if (quad) diag += sgn * p.g * p.chi * (2.0 * n + 1.0);
            emit(s, i, s, i, diag);
            if (quad) {
                if (i + 1 < m && ns[static_cast<size_t>(i + 1)] == n + 2)
                    emit(s, i, s, i + 1,
                         sgn * p.g * std::sqrt(double(n + 1) * double(n + 2)));
                if (i + 2 < m && ns[static_cast<size_t>(i + 2)] == n + 2)
                    emit(s, i, s, i + 2,
                         sgn * p.g * std::sqrt(double(n + 1) * double(n + 2)));
            } else {
                if (i + 1 < m && ns[static_cast<size_t>(i + 1)] == n + 1)
                    emit(s, i, s, i + 1, sgn * p.g * std::sqrt(double(n + 1)));
            }
        }
    }
    if (both_spins && p.Omega != 0.0) {
        for (int i = 0; i < m; ++i) emit(0, i, 1, i, 0.5 * p.Omega);
    }
}

void validate_sector(const ModelParams& p, PhotonSector sector) {
    if (sector != PhotonSector::Full && p.coupling != Coupling::Quadratic)
        throw InvalidParams("photon-parity sectors exist only for the quadratic coupling");
}

// Strict lower bound on the full spectrum, used as the shift-invert floor.
double spectrum_floor(const ModelParams& p) {
    double floor_val;
    if (p.coupling == Coupling::Quadratic)
        floor_val = -0.5 * p.omega - std::abs(p.epsilon) - 0.5 * p.Omega;
    else
        floor_val = -p.g * p.g / p.omega - std::abs(p.epsilon) - 0.5 * p.Omega;
    return floor_val - 0.05 * p.unit();
}

struct SolveCore {
    std::vector<double> evals;
    Eigen::VectorXd ground;   // block order, present when requested
    int n_max{};
};

void gauge_fix(Eigen::VectorXd& v) {
    int best = 0;
    double mag = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > mag) {
            mag = a;
            best = i;
        }
    }
    if (v[best] < 0.0) v = -v;
}

// Single spin sector (Ω = 0 path): photon-only matrix over `ns`.
SolveCore solve_spin_block(const ModelParams& p, const std::vector<int>& ns, int spin,
                           int k, bool want_vector, int dense_dim_max) {
    const int m = static_cast<int>(ns.size());
    const int kk = std::min(k, m);
    SolveCore out;
    if (m <= dense_dim_max) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
        for_each_entry(p, ns, false, spin, [&](int, int i, int, int j, double v) {
            h(i, j) += v;
            if (i != j) h(j, i) += v;
        });
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            h, want_vector ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        out.evals.assign(es.eigenvalues().data(), es.eigenvalues().data() + kk);
        if (want_vector) out.ground = es.eigenvectors().col(0);
    } else {
        const int dphot = (p.coupling == Coupling::Quadratic)
                              ? ((ns.size() > 1 && ns[1] == ns[0] + 2) ? 1 : 2)
                              : 1;
        detail::BandedMatrix a(m, dphot);
        for_each_entry(p, ns, false, spin,
                       [&](int, int i, int, int j, double v) { a.add(i, j, v); });
        auto res = detail::lowest_eigs_banded(a, kk, 1e-10 * std::max(1.0, p.unit()),
                                              spectrum_floor(p));
        out.evals = res.evals;
        if (want_vector) out.ground = res.vectors.col(0);
    }
    return out;
}

// Fixed-truncation solve; ground vector comes back in block order [σ=+ | σ=−].
SolveCore solve_fixed(const ModelParams& p, int n_max, int k, PhotonSector sector,
                      bool want_vector, int dense_dim_max) {
    const auto ns = photon_list(n_max, sector);
    const int m = static_cast<int>(ns.size());
    SolveCore out;
    out.n_max = n_max;

    if (p.Omega == 0.0) {
        // decoupled spin sectors; tie-break toward σz = −
        auto up = solve_spin_block(p, ns, 0, k, want_vector, dense_dim_max);
        auto dn = solve_spin_block(p, ns, 1, k, want_vector, dense_dim_max);
        std::vector<double> merged;
        merged.reserve(up.evals.size() + dn.evals.size());
        merged.insert(merged.end(), up.evals.begin(), up.evals.end());
        merged.insert(merged.end(), dn.evals.begin(), dn.evals.end());
        std::sort(merged.begin(), merged.end());
        merged.resize(static_cast<size_t>(std::min<int>(k, static_cast<int>(merged.size()))));
        out.evals = merged;
        if (want_vector) {
            const bool take_down = dn.evals[0] <= up.evals[0];
            out.ground = Eigen::VectorXd::Zero(2 * m);
            if (take_down)
                out.ground.tail(m) = dn.ground;
            else
                out.ground.head(m) = up.ground;
            gauge_fix(out.ground);
        }
        return out;
    }

    const int dim = 2 * m;
    const int kk = std::min(k, dim);
    if (dim <= dense_dim_max) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for_each_entry(p, ns, true, -1, [&](int s1, int i, int s2, int j, double v) {
            const int r = s1 * m + i;
            const int c = s2 * m + j;
            h(r, c) += v;
            if (r != c) h(c, r) += v;
        });
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            h, want_vector ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        out.evals.assign(es.eigenvalues().data(), es.eigenvalues().data() + kk);
        if (want_vector) {
            out.ground = es.eigenvectors().col(0);
            gauge_fix(out.ground);
        }
        return out;
    }

    // banded path, interleaved ordering idx = 2i + s
    int dphot = 1;
    if (p.coupling == Coupling::Quadratic)
        dphot = (m > 1 && ns[1] == ns[0] + 2) ? 1 : 2;
    const int bw = 2 * dphot;
    detail::BandedMatrix a(dim, std::max(bw, 1));
    for_each_entry(p, ns, true, -1, [&](int s1, int i, int s2, int j, double v) {
        a.add(2 * i + s1, 2 * j + s2, v);
    });
    auto res = detail::lowest_eigs_banded(a, kk, 1e-10 * std::max(1.0, p.unit()),
                                          spectrum_floor(p));
    out.evals = res.evals;
    if (want_vector) {
        out.ground.resize(dim);
        for (int s = 0; s < 2; ++s)
            for (int i = 0; i < m; ++i) out.ground[s * m + i] = res.vectors(2 * i + s, 0);
        gauge_fix(out.ground);
    }
    return out;
}

int warm_estimate(const ModelParams& p) {
    double need = 32.0;
    double soft = 1.0;    // softest oscillator frequency relative to omega
    double nbar_extra = 0.0;
    if (p.coupling == Coupling::Quadratic) {
        const auto d = derived_scales(p);
        soft = std::clamp(std::min(d.varpi_minus, d.varpi_plus), 1e-6, 1.0);
    } else {
        nbar_extra = (p.g / p.omega) * (p.g / p.omega);
        if (p.Omega > p.omega) {
            const double gb = p.g / p.g_c();
            soft = std::clamp(std::sqrt(std::max(1.0 - gb * gb, 1e-6)), 1e-3, 1.0);
        }
    }
    const double nbar = (soft + 1.0 / soft - 2.0) / 4.0 + nbar_extra;
    const double sd = std::sqrt(2.0 * nbar * (nbar + 1.0) + 0.25);
    need = std::max(need, nbar + 6.0 * sd + 8.0);
    const double t = (1.0 - soft) / (1.0 + soft);
    if (t > 0.0 && t < 1.0) need = std::max(need, 30.0 / -std::log(t));
    return static_cast<int>(std::min(need, 1e7));
}

bool tail_ok(const Eigen::VectorXd& ground, const std::vector<int>& ns, int n_max) {
    const int m = static_cast<int>(ns.size());
    double mean = 0.0, sq = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < m; ++i) {
            const double w = ground[s * m + i] * ground[s * m + i];
            mean += w * ns[static_cast<size_t>(i)];
            sq += w * ns[static_cast<size_t>(i)] * double(ns[static_cast<size_t>(i)]);
        }
    const double var = std::max(sq - mean * mean, 0.0);
    return mean + 6.0 * std::sqrt(var) < double(n_max);
}

struct ConvergedSolve {
    SolveCore core;
    bool converged{};
};

ConvergedSolve converged_solve(const ModelParams& p, int k, const SolveOptions& opts) {
    p.validate();
    validate_sector(p, opts.sector);
    if (p.coupling == Coupling::Quadratic && p.g >= p.g_T())
        throw CollapseRegion("g2_bar >= 1: spectrum unbounded below, solver refuses");
    if (opts.n_initial < 4) throw InvalidParams("initial truncation must be at least 4");
    if (opts.growth_factor < 2) throw InvalidParams("truncation growth factor must be >= 2");

    if (opts.exact_truncation) {
        auto core = solve_fixed(p, opts.n_initial, k, opts.sector, true, opts.dense_dim_max);
        const bool conv = tail_ok(core.ground, photon_list(core.n_max, opts.sector), core.n_max);
        return {std::move(core), conv};
    }

    int n = opts.n_initial;
    if (opts.warm_start) n = std::max(n, warm_estimate(p));
    int n0 = 8;
    while (n0 < n) n0 *= 2;
    n = std::min(n0, opts.n_cap);

    const double tol = opts.energy_tol_rel * p.unit();
    const int grow = opts.growth_factor;
    auto cur = solve_fixed(p, n, k, opts.sector, true, opts.dense_dim_max);
    while (true) {
        if (grow * n > opts.n_cap) {
            if (!opts.allow_unconverged)
                throw NotConverged("truncation cap " + std::to_string(opts.n_cap) +
                                   " reached before energy convergence");
            return {std::move(cur), false};
        }
        auto probe = solve_fixed(p, grow * n, k, opts.sector, false, opts.dense_dim_max);
        double dmax = 0.0;
        for (size_t i = 0; i < cur.evals.size() && i < probe.evals.size(); ++i)
            dmax = std::max(dmax, std::abs(cur.evals[i] - probe.evals[i]));
        if (dmax < tol && tail_ok(cur.ground, photon_list(n, opts.sector), n))
            return {std::move(cur), true};
        n *= grow;
        cur = solve_fixed(p, n, k, opts.sector, true, opts.dense_dim_max);
    }
}

} // namespace

// ------------------------------ public surface ------------------------------

Eigen::SparseMatrix<double> build_hamiltonian(const ModelParams& params, int n_max,
                                              PhotonSector sector) {
    params.validate();
    validate_sector(params, sector);
    if (n_max < 4) throw InvalidParams("n_max must be at least 4");
    const auto ns = photon_list(n_max, sector);
    const int m = static_cast<int>(ns.size());
    std::vector<Eigen::Triplet<double>> trip;
    for_each_entry(params, ns, true, -1, [&](int s1, int i, int s2, int j, double v) {
        const int r = s1 * m + i;
        const int c = s2 * m + j;
        trip.emplace_back(r, c, v);
        if (r != c) trip.emplace_back(c, r, v);
    });
    Eigen::SparseMatrix<double> h(2 * m, 2 * m);
    h.setFromTriplets(trip.begin(), trip.end());
    h.makeCompressed();
    return h;
}

GroundState ground_state(const ModelParams& params, const SolveOptions& opts) {
    const double u = params.unit();
    ModelParams pn = params;
    pn.omega /= u;
    pn.Omega /= u;
    pn.epsilon /= u;
    pn.g /= u;

    auto res = converged_solve(pn, 2, opts);
    GroundState gs;
    gs.energy = res.core.evals[0] * u;
    gs.gap = (res.core.evals.size() > 1) ? (res.core.evals[1] - res.core.evals[0]) * u : 0.0;
    gs.coefficients = std::move(res.core.ground);
    gs.n_max = res.core.n_max;
    gs.converged = res.converged;
    gs.params = params;
    return gs;
}

std::vector<double> low_spectrum(const ModelParams& params, int k, const SolveOptions& opts) {
    if (k < 2) throw InvalidParams("low_spectrum requires k >= 2");
    const double u = params.unit();
    ModelParams pn = params;
    pn.omega /= u;
    pn.Omega /= u;
    pn.epsilon /= u;
    pn.g /= u;

    auto res = converged_solve(pn, k, opts);
    std::vector<double> evals = res.core.evals;
    for (auto& e : evals) e *= u;
    return evals;
}

OccupationStats occupation_stats(const Eigen::VectorXd& coefficients, int n_max,
                                 PhotonSector sector) {
    const auto ns = photon_list(n_max, sector);
    const int m = static_cast<int>(ns.size());
    if (coefficients.size() != 2 * m)
        throw InvalidParams("coefficient vector length does not match the truncation");
    double mean = 0.0, sq = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < m; ++i) {
            const double w = coefficients[s * m + i] * coefficients[s * m + i];
            mean += w * ns[static_cast<size_t>(i)];
            sq += w * ns[static_cast<size_t>(i)] * double(ns[static_cast<size_t>(i)]);
        }
    OccupationStats st;
    st.mean = mean;
    st.stddev = std::sqrt(std::max(sq - mean * mean, 0.0));
    return st;
}

} // namespace qrm
