// banded_eigs.hpp — symmetric banded storage, banded Cholesky, and a
// shift-invert Lanczos for the lowest eigenpairs.  Internal to the library.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qrm/errors.hpp"

namespace qrm::detail {

// Lower-band storage: diag(d)[j] = A(j+d, j), d = 0..bw.
struct BandedMatrix {
    int n{0};
    int bw{0};
    std::vector<std::vector<double>> diag;

    BandedMatrix(int n_, int bw_) : n(n_), bw(bw_), diag(static_cast<size_t>(bw_) + 1) {
        for (auto& d : diag) d.assign(static_cast<size_t>(n), 0.0);
    }

    void add(int i, int j, double v) {
        if (i < j) std::swap(i, j);
        diag[static_cast<size_t>(i - j)][static_cast<size_t>(j)] += v;
    }

    void matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        y.setZero(n);
        for (int j = 0; j < n; ++j) y[j] += diag[0][static_cast<size_t>(j)] * x[j];
        for (int d = 1; d <= bw; ++d) {
            const auto& a = diag[static_cast<size_t>(d)];
            for (int j = 0; j + d < n; ++j) {
                const double v = a[static_cast<size_t>(j)];
                y[j + d] += v * x[j];
                y[j] += v * x[j + d];
            }
        }
    }
};

// Cholesky of (A − σI) kept in band form.  factor() returns false when the
// shifted matrix is not positive definite.
struct BandedCholesky {
    int n{0};
    int bw{0};
    std::vector<std::vector<double>> low;

    bool factor(const BandedMatrix& a, double sigma) {
        n = a.n;
        bw = a.bw;
        low.assign(static_cast<size_t>(bw) + 1, {});
        for (auto& d : low) d.assign(static_cast<size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) {
            double s = a.diag[0][static_cast<size_t>(j)] - sigma;
            for (int k = std::max(0, j - bw); k < j; ++k) {
                const double l = low[static_cast<size_t>(j - k)][static_cast<size_t>(k)];
                s -= l * l;
            }
            if (!(s > 0.0)) return false;
            const double dj = std::sqrt(s);
            low[0][static_cast<size_t>(j)] = dj;
            for (int d = 1; d <= std::min(bw, n - 1 - j); ++d) {
                const int i = j + d;
                double v = a.diag[static_cast<size_t>(d)][static_cast<size_t>(j)];
                for (int k = std::max(0, i - bw); k < j; ++k)
                    v -= low[static_cast<size_t>(i - k)][static_cast<size_t>(k)] *
                         low[static_cast<size_t>(j - k)][static_cast<size_t>(k)];
                low[static_cast<size_t>(d)][static_cast<size_t>(j)] = v / dj;
            }
        }
        return true;
    }

    void solve(Eigen::VectorXd& x) const {
        for (int i = 0; i < n; ++i) {
            double s = x[i];
            for (int k = std::max(0, i - bw); k < i; ++k)
                s -= low[static_cast<size_t>(i - k)][static_cast<size_t>(k)] * x[k];
            x[i] = s / low[0][static_cast<size_t>(i)];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[i];
            for (int k = i + 1; k <= std::min(n - 1, i + bw); ++k)
                s -= low[static_cast<size_t>(k - i)][static_cast<size_t>(i)] * x[k];
            x[i] = s / low[0][static_cast<size_t>(i)];
        }
    }
};

// Deterministic start vector (xorshift64, fixed seed) with full support.
inline Eigen::VectorXd lanczos_start(int n) {
    Eigen::VectorXd v(n);
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < n; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        const double u = static_cast<double>(s >> 11) * 0x1.0p-53;
        v[i] = 1.0 + 0.25 * (2.0 * u - 1.0);
    }
    v.normalize();
    return v;
}

struct LanczosOutcome {
    std::vector<double> evals;   // ascending, size k
    Eigen::MatrixXd vectors;     // columns matching evals
    bool converged{false};
};

namespace si_impl {

// One shift-invert Lanczos sweep at a fixed factorization.  On success fills
// `out`; otherwise leaves the best Ritz estimates of the low end in `ritz`.
inline bool sweep(const BandedMatrix& a, const BandedCholesky& chol, int k,
                  double res_tol, int m_max, LanczosOutcome& out,
                  std::vector<double>& ritz) {
    const int n = a.n;
    m_max = std::min(m_max, n);
    Eigen::MatrixXd basis(n, m_max);
    std::vector<double> alpha, beta;
    basis.col(0) = lanczos_start(n);
    Eigen::VectorXd w(n), x(n), ax(n);

    for (int it = 0; it < m_max; ++it) {
        w = basis.col(it);
        chol.solve(w);
        alpha.push_back(w.dot(basis.col(it)));
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = basis.leftCols(it + 1).transpose() * w;
            w -= basis.leftCols(it + 1) * proj;
        }
        const double be = w.norm();
        const int m = it + 1;
        const bool exhausted = be < 1e-13;
        const bool check = exhausted || m == m_max || (m >= k + 2 && m % 5 == 0);

        if (check && m >= k) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[static_cast<size_t>(i)];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

            bool ok = true;
            std::vector<double> evals(static_cast<size_t>(k));
            Eigen::MatrixXd vecs(n, k);
            for (int j = 0; j < k && ok; ++j) {
                const int col = m - 1 - j;       // largest inverted Ritz ↔ lowest of A
                if (es.eigenvalues()(col) <= 0.0) {
                    ok = false;
                    break;
                }
                x = basis.leftCols(m) * es.eigenvectors().col(col);
                x.normalize();
                a.matvec(x, ax);
                const double lam = x.dot(ax);
                if ((ax - lam * x).norm() > res_tol) ok = false;
                evals[static_cast<size_t>(j)] = lam;
                vecs.col(j) = x;
            }
            ritz = evals;
            std::sort(ritz.begin(), ritz.end());
            if (ok) {
                std::vector<int> order(static_cast<size_t>(k));
                for (int j = 0; j < k; ++j) order[static_cast<size_t>(j)] = j;
                std::sort(order.begin(), order.end(), [&](int p, int q) {
                    return evals[static_cast<size_t>(p)] < evals[static_cast<size_t>(q)];
                });
                out.evals.resize(static_cast<size_t>(k));
                out.vectors.resize(n, k);
                for (int j = 0; j < k; ++j) {
                    const int src = order[static_cast<size_t>(j)];
                    out.evals[static_cast<size_t>(j)] = evals[static_cast<size_t>(src)];
                    out.vectors.col(j) = vecs.col(src);
                }
                out.converged = true;
                return true;
            }
        }
        if (exhausted) break;
        beta.push_back(be);
        if (it + 1 < m_max) basis.col(it + 1) = w / be;
    }
    return false;
}

} // namespace si_impl

// Lowest k eigenpairs of a symmetric banded matrix by shift-invert Lanczos
// with full reorthogonalization.  sigma_floor must be a strict lower bound on
// the spectrum; res_tol bounds ‖A x − λ x‖ for each returned unit pair.
inline LanczosOutcome lowest_eigs_banded(const BandedMatrix& a, int k, double res_tol,
                                         double sigma_floor) {
    LanczosOutcome out;
    BandedCholesky chol;
    double sigma = sigma_floor;
    {
        double push = std::max(1e-6, 1e-3 * std::abs(sigma_floor));
        int attempt = 0;
        while (!chol.factor(a, sigma)) {
            sigma -= push;
            push *= 4.0;
            if (++attempt > 30)
                throw NotConverged("banded eigensolver: shift factorization failed");
        }
    }

    std::vector<double> ritz;
    if (si_impl::sweep(a, chol, k, res_tol, 42, out, ritz)) return out;

    // Re-shift just below the current ground estimate and run a longer sweep.
    if (static_cast<int>(ritz.size()) >= 2) {
        const double spacing = std::max(ritz[1] - ritz[0], 1e-8);
        const double sigma2 = ritz[0] - 0.25 * spacing;
        if (sigma2 > sigma && chol.factor(a, sigma2)) {
            if (si_impl::sweep(a, chol, k, res_tol, 280, out, ritz)) return out;
            throw NotConverged("banded eigensolver: Lanczos stagnated");
        }
        chol.factor(a, sigma);   // restore the safe factorization
    }
    if (si_impl::sweep(a, chol, k, res_tol, 280, out, ritz)) return out;
    throw NotConverged("banded eigensolver: Lanczos stagnated");
}

} // namespace qrm::detail
