#include "qrm/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qrm/criticality.hpp"
#include "qrm/metrology.hpp"
#include "qrm/observables.hpp"
#include "qrm/sweep.hpp"
#include "qrm/variational.hpp"

namespace qrm::figures {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using sweep::format_double;
using sweep::parallel_for;

// compact value labels for file and column names
std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct RowData {
    std::vector<double> values;
    bool converged{true};
    int n_max{0};
};

std::string write_table(const std::string& out_dir, const std::string& file,
                        const std::vector<std::string>& columns,
                        const std::vector<RowData>& rows) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/" + file;
    std::ofstream os(path);
    if (!os) throw Error("cannot open output file " + path);
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << ",converged,n_max\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.values.size(); ++i)
            os << (i ? "," : "") << format_double(r.values[i]);
        os << ',' << (r.converged ? 1 : 0) << ',' << r.n_max << '\n';
    }
    return path;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

// grid refinement around a sharp feature: center ± 10^{−j/2}
std::vector<double> zoom_grid(double center, double lo, double hi) {
    std::set<double> pts{center};
    for (int j = 4; j <= 10; ++j) {
        const double off = std::pow(10.0, -0.5 * j);
        for (const double x : {center - off, center + off})
            if (x > lo && x < hi) pts.insert(x);
    }
    return {pts.begin(), pts.end()};
}

std::vector<double> merge_sorted(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

double eps_max_of(double gbar) {
    return 0.25 * (std::sqrt(1.0 + gbar) - std::sqrt(1.0 - gbar));
}

// ED QFI wrt ḡ₂ plus solve provenance; NaN row on failure.
RowData qfi_row(const ModelParams& p, const QfiOptions& qopts) {
    RowData r;
    double fq = kNaN;
    try {
        fq = qfi_state_derivative(p, p.coupling == Coupling::Quadratic
                                         ? QfiParameter::G2Bar
                                         : QfiParameter::G1,
                                  qopts)
                 .total;
    } catch (const Error&) {
        r.converged = false;
    }
    try {
        SolveOptions so = qopts.solve;
        so.allow_unconverged = true;
        const auto gs = ground_state(p, so);
        r.n_max = gs.n_max;
        r.converged = r.converged && gs.converged;
    } catch (const Error&) {
        r.converged = false;
    }
    r.values = {p.g_bar(), fq, fq > 0.0 ? std::log(fq) : kNaN};
    return r;
}

int pool_size(const FigureOptions& o) {
    return o.workers > 0 ? o.workers : sweep::default_workers();
}

// ---------------------------------- fig1a -----------------------------------

std::vector<std::string> fig1a(const FigureOptions& opts) {
    const double ratio = opts.Omega_ratio.value_or(0.001);
    const int nbase = opts.count.value_or(48);
    const auto base = ModelParams::quadratic(1.0, ratio, 0.0, 1.0, 0.0);
    QfiOptions qopts;

    std::vector<std::string> files;
    auto run_curve = [&](const std::string& file, const std::vector<double>& gbars,
                         auto&& eps_of_g) {
        std::vector<RowData> rows(gbars.size());
        parallel_for(static_cast<int>(gbars.size()), pool_size(opts), [&](int i) {
            const double gb = gbars[static_cast<size_t>(i)];
            const auto p = base.with_epsilon(eps_of_g(gb)).with_g(gb * base.g_T());
            rows[static_cast<size_t>(i)] = qfi_row(p, qopts);
        });
        files.push_back(write_table(opts.out_dir, file, {"g2_bar", "fq_bar", "ln_fq_bar"}, rows));
    };

    // ε = 0 baseline, dense toward collapse
    auto baseline = merge_sorted(linspace(0.80, 0.995, nbase),
                                 {0.996, 0.997, 0.998, 0.999, 0.9995, 0.9999});
    run_curve("fig1a_eps_0.csv", baseline, [](double) { return 0.0; });

    // eight finite-bias curves with zooms on their transition peaks
    for (int k = 0; k <= 7; ++k) {
        const double eps = 0.27 + 0.01 * k;
        const double gc = transition_coupling(eps, base) / base.g_T();
        auto grid = merge_sorted(linspace(0.80, std::min(0.999, gc + 0.02), nbase / 2),
                                 zoom_grid(gc, 0.0, 0.9995));
        std::ostringstream name;
        name << "fig1a_eps_" << label(eps) << ".csv";
        run_curve(name.str(), grid, [eps](double) { return eps; });
    }

    // ε_max envelope
    auto env = merge_sorted(linspace(0.85, 0.995, nbase / 2),
                            {0.996, 0.997, 0.998, 0.999, 0.9995, 0.9999});
    run_curve("fig1a_envelope.csv", env, [](double gb) { return eps_max_of(gb); });
    return files;
}

// ---------------------------------- fig1b -----------------------------------

std::vector<std::string> fig1b(const FigureOptions& opts) {
    std::vector<double> ratios{0.001, 0.01, 0.1};
    if (opts.Omega_ratio) ratios = {*opts.Omega_ratio};
    const int n = opts.count.value_or(22);
    QfiOptions qopts;

    std::vector<std::string> files;
    for (const double ratio : ratios) {
        const auto base = ModelParams::quadratic(1.0, ratio, 0.0, 1.0, 0.0);
        auto grid = merge_sorted(linspace(0.5, 0.99, n), {0.995});
        std::vector<RowData> rows(grid.size());
        parallel_for(static_cast<int>(grid.size()), pool_size(opts), [&](int i) {
            const double gb = grid[static_cast<size_t>(i)];
            const double g2 = gb * base.g_T();
            RowData r;
            double f_max = kNaN, f0 = kNaN;
            try {
                f_max = qfi_state_derivative(base.with_epsilon(eps_max_of(gb)).with_g(g2),
                                             QfiParameter::G2Bar, qopts)
                            .total;
                f0 = qfi_state_derivative(base.with_g(g2), QfiParameter::G2Bar, qopts).total;
            } catch (const Error&) {
                r.converged = false;
            }
            r.values = {gb, f_max, f0, f_max / f0};
            rows[static_cast<size_t>(i)] = r;
        });
        std::ostringstream name;
        name << "fig1b_Omega_" << label(ratio) << ".csv";
        files.push_back(write_table(opts.out_dir, name.str(),
                                    {"g2_bar", "fq_max_bar", "fq0_bar", "gain_ratio"}, rows));
    }
    return files;
}

// ---------------------------------- fig1c -----------------------------------

std::vector<std::string> fig1c(const FigureOptions& opts) {
    std::vector<double> ratios{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
    if (opts.Omega_ratio) ratios = {*opts.Omega_ratio};
    const double gbar_c = 0.999;
    QfiOptions qopts;
    PrepTimeOptions topts;
    topts.quadrature.rel_tol = 1e-5;

    std::vector<RowData> rows(ratios.size());
    parallel_for(static_cast<int>(ratios.size()), pool_size(opts), [&](int i) {
        const double r = ratios[static_cast<size_t>(i)];
        RowData row;
        double t_nl = kNaN, t_lin = kNaN, fq_nl = kNaN, fq_lin = kNaN, ana = kNaN;
        // non-linear: ω = 1, Ω = r, ramp ends at the transition tuned by ε_max
        const auto nl =
            ModelParams::quadratic(1.0, r, eps_max_of(gbar_c), 1.0, gbar_c * 0.25);
        try {
            t_nl = preparation_time(nl.with_g(0.0).with_epsilon(eps_max_of(gbar_c)),
                                    gbar_c, topts);
            fq_nl = qfi_state_derivative(nl, QfiParameter::G2Bar, qopts).total;
            ana = (qfi_rho_max(gbar_c, nl) + qfi_xi_max(gbar_c, nl)) * nl.g_T() * nl.g_T();
        } catch (const Error&) {
            row.converged = false;
        }
        // linear comparison: Ω = 1, ω = r, ε = 0
        const auto lin = ModelParams::linear(r, 1.0, 0.0, 0.0);
        try {
            t_lin = preparation_time(lin, gbar_c, topts);
            const auto at_c = lin.with_g(gbar_c * lin.g_c());
            fq_lin = qfi_state_derivative(at_c, QfiParameter::G1, qopts).total *
                     lin.g_c() * lin.g_c();
        } catch (const Error&) {
            row.converged = false;
        }
        row.values = {r, t_nl, t_lin, fq_nl, fq_lin, ana};
        rows[static_cast<size_t>(i)] = row;
    });
    return {write_table(opts.out_dir, "fig1c.csv",
                        {"ratio", "T_nonlinear", "T_linear", "fqmax_nonlinear_bar",
                         "fqmax_linear_bar", "analytic_sum_bar"},
                        rows)};
}

// ---------------------------------- fig2ab ----------------------------------

std::vector<std::string> fig2ab(const FigureOptions& opts) {
    const double ratio = opts.Omega_ratio.value_or(0.01);
    const int n = opts.count.value_or(140);
    const auto base = ModelParams::quadratic(1.0, ratio, 0.0, 1.0, 0.0);

    std::vector<std::string> files;
    for (const double eps : {0.0, 0.33}) {
        auto grid = linspace(0.0, 0.9999, n);
        if (eps > 0.0) {
            const double gc = transition_coupling(eps, base) / base.g_T();
            grid = merge_sorted(grid, zoom_grid(gc, 0.0, 0.9999));
        }
        std::vector<RowData> rows(grid.size());
        parallel_for(static_cast<int>(grid.size()), pool_size(opts), [&](int i) {
            const double gb = grid[static_cast<size_t>(i)];
            const auto p = base.with_epsilon(eps).with_g(gb * base.g_T());
            RowData r;
            double sx = kNaN, sz = kNaN, x2 = kNaN;
            double sxv = kNaN, szv = kNaN, x2v = kNaN;
            try {
                SolveOptions so;
                so.allow_unconverged = true;
                const auto gs = ground_state(p, so);
                r.n_max = gs.n_max;
                r.converged = gs.converged;
                sx = spin_expectation(gs, SpinAxis::X);
                sz = spin_expectation(gs, SpinAxis::Z);
                x2 = x_squared(gs);
            } catch (const Error&) {
                r.converged = false;
            }
            try {
                const auto vm = minimize_ansatz(p);
                sxv = vm_sigma_x(vm);
                szv = vm_sigma_z(vm);
                x2v = vm_x_squared(vm);
            } catch (const Error&) {
                r.converged = false;
            }
            r.values = {gb, sx, sz, x2, sxv, szv, x2v};
            rows[static_cast<size_t>(i)] = r;
        });
        std::ostringstream name;
        name << "fig2ab_eps_" << label(eps) << ".csv";
        files.push_back(write_table(opts.out_dir, name.str(),
                                    {"g2_bar", "sigma_x_ed", "sigma_z_ed", "x2_ed",
                                     "sigma_x_vm", "sigma_z_vm", "x2_vm"},
                                    rows));
    }
    return files;
}

// ---------------------------------- fig3 ------------------------------------

std::vector<std::string> fig3(const FigureOptions& opts) {
    const int n = opts.count.value_or(250);
    struct Case {
        double chi;
        double eps;
        const char* file;
    };
    const Case cases[] = {{0.0, 0.0, "fig3_chi0_eps0.csv"},
                          {1.0, 0.0, "fig3_chi1_eps0.csv"},
                          {1.0, 0.2, "fig3_chi1_eps0.2.csv"}};
    std::vector<std::string> files;
    for (const auto& c : cases) {
        const auto base = ModelParams::quadratic(1.0, 0.0, c.eps, c.chi, 0.0);
        auto grid = linspace(0.0, 0.999, n);
        std::vector<RowData> rows(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) {
            const double gb = grid[i];
            const auto lp = single_particle_levels(base.with_g(gb * base.g_T()), 0);
            rows[i].values = {gb, lp.eps0_plus, lp.eps0_minus, lp.eps_plus, lp.eps_minus};
        }
        files.push_back(write_table(opts.out_dir, c.file,
                                    {"g2_bar", "eps0_plus", "eps0_minus", "eps_plus",
                                     "eps_minus"},
                                    rows));
    }
    return files;
}

// ---------------------------------- fig4 ------------------------------------

std::vector<std::string> fig4(const FigureOptions& opts) {
    const double ratio = opts.Omega_ratio.value_or(0.005);
    const int n = opts.count.value_or(56);
    const auto base = ModelParams::quadratic(1.0, ratio, 0.0, 1.0, 0.0);
    QfiOptions qopts;

    std::vector<std::string> files;
    for (const double eps : {0.0, 0.328}) {
        auto grid = linspace(0.3, 0.999, n);
        if (eps > 0.0) {
            const double gc = transition_coupling(eps, base) / base.g_T();
            grid = merge_sorted(grid, zoom_grid(gc, 0.0, 0.9995));
        }
        std::vector<RowData> rows(grid.size());
        parallel_for(static_cast<int>(grid.size()), pool_size(opts), [&](int i) {
            const double gb = grid[static_cast<size_t>(i)];
            const auto p = base.with_epsilon(eps).with_g(gb * base.g_T());
            RowData r;
            double frho = kNaN, fxi = kNaN;
            double xp = kNaN, xm = kNaN, rp = kNaN, rm = kNaN, cp = kNaN, cm = kNaN;
            try {
                const auto q = qfi_variational(p, QfiParameter::G2Bar, qopts);
                frho = q.rho_part;
                fxi = q.xi_part;
                const auto vm = minimize_ansatz(p);
                const auto d = derived_scales(p);
                xp = vm.xi_plus;
                xm = vm.xi_minus;
                rp = vm.xi_plus / d.varpi_plus;
                rm = vm.xi_minus / d.varpi_minus;
                cp = vm.c_plus;
                cm = vm.c_minus;
            } catch (const Error&) {
                r.converged = false;
            }
            r.values = {gb, frho, fxi, xp, xm, rp, rm, cp, cm};
            rows[static_cast<size_t>(i)] = r;
        });
        std::ostringstream name;
        name << "fig4_eps_" << label(eps) << ".csv";
        files.push_back(write_table(
            opts.out_dir, name.str(),
            {"g2_bar", "fq_rho_bar", "fq_xi_bar", "xi_plus", "xi_minus",
             "xi_plus_over_varpi", "xi_minus_over_varpi", "c_plus", "c_minus"},
            rows));
    }

    // panel (d): ρ/ξ decomposition at the optimal bias for several Ω/ω
    {
        const std::vector<double> ratios{0.002, 0.005, 0.01, 0.02};
        auto grid = linspace(0.5, 0.9995, opts.count.value_or(40));
        std::vector<std::string> cols{"g2_bar"};
        for (const double r : ratios) {
            cols.push_back("fq_rho_bar_Omega_" + label(r));
            cols.push_back("fq_xi_bar_Omega_" + label(r));
        }
        std::vector<RowData> rows(grid.size());
        parallel_for(static_cast<int>(grid.size()), pool_size(opts), [&](int i) {
            const double gb = grid[static_cast<size_t>(i)];
            RowData row;
            row.values = {gb};
            for (const double r : ratios) {
                const auto p = ModelParams::quadratic(1.0, r, eps_max_of(gb), 1.0, gb * 0.25);
                try {
                    const auto q = qfi_variational(p, QfiParameter::G2Bar, qopts);
                    row.values.push_back(q.rho_part);
                    row.values.push_back(q.xi_part);
                } catch (const Error&) {
                    row.values.push_back(kNaN);
                    row.values.push_back(kNaN);
                    row.converged = false;
                }
            }
            rows[static_cast<size_t>(i)] = row;
        });
        files.push_back(write_table(opts.out_dir, "fig4d.csv", cols, rows));
    }
    return files;
}

} // namespace

std::vector<std::string> figure_names() {
    return {"fig1a", "fig1b", "fig1c", "fig2ab", "fig3", "fig4"};
}

std::vector<std::string> run_figure(const std::string& name, const FigureOptions& opts) {
    if (name == "fig1a") return fig1a(opts);
    if (name == "fig1b") return fig1b(opts);
    if (name == "fig1c") return fig1c(opts);
    if (name == "fig2ab") return fig2ab(opts);
    if (name == "fig3") return fig3(opts);
    if (name == "fig4") return fig4(opts);
    std::string valid;
    for (const auto& n : figure_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidParams("unknown figure '" + name + "' (valid: " + valid + ")");
}

} // namespace qrm::figures
