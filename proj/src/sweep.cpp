#include "qrm/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "qrm/observables.hpp"
#include "qrm/variational.hpp"

namespace qrm::sweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct OutputInfo {
    Output id;
    const char* name;
};

constexpr OutputInfo kOutputs[] = {
    {Output::Energy, "energy"},   {Output::Gap, "gap"},
    {Output::SigmaX, "sigma_x"},  {Output::SigmaZ, "sigma_z"},
    {Output::X2, "x2"},           {Output::FqEd, "fq_ed"},
    {Output::FqFid, "fq_fid"},    {Output::FqRho, "fq_rho"},
    {Output::FqXi, "fq_xi"},      {Output::XiPlus, "xi_plus"},
    {Output::XiMinus, "xi_minus"},{Output::CPlusSq, "c_plus_sq"},
};

bool needs_ground_state(Output o) {
    switch (o) {
        case Output::Energy:
        case Output::Gap:
        case Output::SigmaX:
        case Output::SigmaZ:
        case Output::X2:
            return true;
        default:
            return false;
    }
}

bool needs_variational(Output o) {
    switch (o) {
        case Output::XiPlus:
        case Output::XiMinus:
        case Output::CPlusSq:
            return true;
        default:
            return false;
    }
}

bool is_variational_output(Output o) {
    return needs_variational(o) || o == Output::FqRho || o == Output::FqXi;
}

} // namespace

const char* output_name(Output o) {
    for (const auto& info : kOutputs)
        if (info.id == o) return info.name;
    return "?";
}

std::optional<Output> output_from_name(const std::string& name) {
    for (const auto& info : kOutputs)
        if (name == info.name) return info.id;
    return std::nullopt;
}

double SweepSpec::swept_value(int i) const {
    if (count < 2) return start;
    const double t = double(i) / double(count - 1);
    if (log_spacing) return start * std::pow(stop / start, t);
    return start + (stop - start) * t;
}

ModelParams SweepSpec::params_at(double value) const {
    ModelParams p = base;
    if (param == "g2" || param == "g1")
        p.g = value;
    else if (param == "g2_bar")
        p.g = value * p.g_T();
    else if (param == "g1_bar")
        p.g = value * p.g_c();
    else if (param == "epsilon")
        p.epsilon = value;
    else if (param == "Omega")
        p.Omega = value;
    else if (param == "omega")
        p.omega = value;
    else if (param == "chi")
        p.chi = value;
    else
        throw InvalidParams("sweep.param: unknown parameter '" + param + "'");
    return p;
}

void SweepSpec::validate() const {
    if (count < 2) throw InvalidParams("sweep.count must be at least 2");
    if (log_spacing && !(start > 0.0 && stop > 0.0))
        throw InvalidParams("sweep.spacing: log spacing requires positive start/stop");
    if ((param == "g2" || param == "g2_bar") && base.coupling != Coupling::Quadratic)
        throw InvalidParams("sweep.param: '" + param + "' requires model = quadratic");
    if ((param == "g1" || param == "g1_bar") && base.coupling != Coupling::Linear)
        throw InvalidParams("sweep.param: '" + param + "' requires model = linear");
    if (outputs.empty()) throw InvalidParams("outputs: at least one output is required");
    validate_outputs(base, outputs);
    // endpoint parameter validity (collapse bound, positivity, ...)
    for (const int i : {0, count - 1}) {
        const auto p = params_at(swept_value(i));
        p.validate();
        if (p.coupling == Coupling::Quadratic && p.g >= p.g_T())
            throw InvalidParams("sweep range: g2_bar must stay strictly below the "
                                "collapse point (g2_bar < 1)");
    }
}

void validate_outputs(const ModelParams& base, const std::vector<Output>& outputs) {
    for (const auto o : outputs) {
        if (is_variational_output(o)) {
            if (base.coupling != Coupling::Quadratic || std::abs(base.chi - 1.0) > 1e-12)
                throw InvalidParams(std::string("outputs: '") + output_name(o) +
                                    "' requires the quadratic model with chi = 1");
        }
    }
}

SweepRow evaluate_outputs(const ModelParams& params, const std::vector<Output>& outputs,
                          const SolveOptions& solve, const QfiOptions& qfi) {
    SweepRow row;
    row.outputs.assign(outputs.size(), kNaN);

    bool want_gs = false, want_vm = false;
    for (const auto o : outputs) {
        want_gs |= needs_ground_state(o);
        want_vm |= needs_variational(o);
    }

    std::optional<GroundState> gs;
    if (want_gs) {
        try {
            SolveOptions so = solve;
            so.allow_unconverged = true;
            gs = ground_state(params, so);
            row.n_max = gs->n_max;
            row.converged = row.converged && gs->converged;
        } catch (const Error&) {
            row.converged = false;
        }
    }
    std::optional<VariationalSolution> vm;
    if (want_vm) {
        try {
            vm = minimize_ansatz(params, qfi.minimize);
        } catch (const Error&) {
            row.converged = false;
        }
    }
    std::optional<QfiResult> vm_qfi;
    auto vm_decomposed = [&]() -> const std::optional<QfiResult>& {
        if (!vm_qfi) {
            try {
                vm_qfi = qfi_variational(params, QfiParameter::G2, qfi);
            } catch (const Error&) {
                row.converged = false;
                vm_qfi = std::nullopt;
            }
        }
        return vm_qfi;
    };
    const QfiParameter fd_param =
        params.coupling == Coupling::Quadratic ? QfiParameter::G2 : QfiParameter::G1;

    for (size_t i = 0; i < outputs.size(); ++i) {
        double v = kNaN;
        try {
            switch (outputs[i]) {
                case Output::Energy: if (gs) v = gs->energy; break;
                case Output::Gap: if (gs) v = gs->gap; break;
                case Output::SigmaX: if (gs) v = spin_expectation(*gs, SpinAxis::X); break;
                case Output::SigmaZ: if (gs) v = spin_expectation(*gs, SpinAxis::Z); break;
                case Output::X2: if (gs) v = x_squared(*gs); break;
                case Output::FqEd:
                    v = qfi_state_derivative(params, fd_param, qfi).total;
                    break;
                case Output::FqFid:
                    v = qfi_fidelity(params, fd_param, qfi).total;
                    break;
                case Output::FqRho:
                    if (const auto& r = vm_decomposed()) v = r->rho_part;
                    break;
                case Output::FqXi:
                    if (const auto& r = vm_decomposed()) v = r->xi_part;
                    break;
                case Output::XiPlus: if (vm) v = vm->xi_plus; break;
                case Output::XiMinus: if (vm) v = vm->xi_minus; break;
                case Output::CPlusSq: if (vm) v = vm->c_plus * vm->c_plus; break;
            }
        } catch (const Error&) {
            row.converged = false;
        }
        row.outputs[i] = v;
    }
    for (const double v : row.outputs)
        if (std::isnan(v)) row.converged = false;
    return row;
}

int default_workers() {
    if (const char* env = std::getenv("QRM_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto body = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<SweepRow> run(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepRow> rows(static_cast<size_t>(spec.count));
    const int workers = spec.workers > 0 ? spec.workers : default_workers();
    parallel_for(spec.count, workers, [&](int i) {
        const double v = spec.swept_value(i);
        rows[static_cast<size_t>(i)] =
            evaluate_outputs(spec.params_at(v), spec.outputs, spec.solve, spec.qfi);
        rows[static_cast<size_t>(i)].value = v;
    });
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    os << spec.param;
    for (const auto o : spec.outputs) os << ',' << output_name(o);
    os << ",converged,n_max\n";
    for (const auto& row : rows) {
        os << format_double(row.value);
        for (const double v : row.outputs) os << ',' << format_double(v);
        os << ',' << (row.converged ? 1 : 0) << ',' << row.n_max << '\n';
    }
}

void write_jsonl(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    for (const auto& row : rows) {
        nlohmann::json j;
        j[spec.param] = row.value;
        for (size_t i = 0; i < spec.outputs.size(); ++i)
            j[output_name(spec.outputs[i])] = row.outputs[i];
        j["converged"] = row.converged;
        j["n_max"] = row.n_max;
        os << j.dump() << '\n';
    }
}

// ------------------------------ JSON parsing --------------------------------

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw InvalidParams(field + ": " + why);
}

double get_num(const nlohmann::json& j, const std::string& field, double fallback,
               bool* seen = nullptr) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_number()) bad_field(field, "expected a number");
    if (seen) *seen = true;
    return j.at(field).get<double>();
}

} // namespace

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "model", "omega", "Omega", "epsilon", "chi", "g2", "g1",
        "sweep", "outputs", "solver", "qfi", "workers"};
    for (const auto& [key, val] : j.items())
        if (!known.count(key)) bad_field(key, "unknown configuration key");

    SweepSpec spec;
    std::string model = "quadratic";
    if (j.contains("model")) {
        if (!j.at("model").is_string()) bad_field("model", "expected a string");
        model = j.at("model").get<std::string>();
    }
    if (model == "quadratic")
        spec.base.coupling = Coupling::Quadratic;
    else if (model == "linear")
        spec.base.coupling = Coupling::Linear;
    else
        bad_field("model", "must be 'quadratic' or 'linear'");

    spec.base.omega = get_num(j, "omega", 1.0);
    spec.base.Omega = get_num(j, "Omega", 0.0);
    spec.base.epsilon = get_num(j, "epsilon", 0.0);
    spec.base.chi = get_num(j, "chi", 1.0);
    bool has_g2 = false, has_g1 = false;
    const double g2 = get_num(j, "g2", 0.0, &has_g2);
    const double g1 = get_num(j, "g1", 0.0, &has_g1);
    if (has_g2 && spec.base.coupling != Coupling::Quadratic)
        bad_field("g2", "only valid for model = quadratic");
    if (has_g1 && spec.base.coupling != Coupling::Linear)
        bad_field("g1", "only valid for model = linear");
    spec.base.g = spec.base.coupling == Coupling::Quadratic ? g2 : g1;

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (!s.is_object()) bad_field("sweep", "expected an object");
        static const std::set<std::string> sk{"param", "start", "stop", "count", "spacing"};
        for (const auto& [key, val] : s.items())
            if (!sk.count(key)) bad_field("sweep." + key, "unknown key");
        if (!s.contains("param") || !s.at("param").is_string())
            bad_field("sweep.param", "required string");
        spec.param = s.at("param").get<std::string>();
        spec.start = get_num(s, "start", 0.0);
        spec.stop = get_num(s, "stop", 0.0);
        if (s.contains("count")) {
            if (!s.at("count").is_number_integer()) bad_field("sweep.count", "expected an integer");
            spec.count = s.at("count").get<int>();
        }
        if (s.contains("spacing")) {
            const auto sp = s.at("spacing").get<std::string>();
            if (sp == "log")
                spec.log_spacing = true;
            else if (sp != "linear")
                bad_field("sweep.spacing", "must be 'linear' or 'log'");
        }
    }

    if (j.contains("outputs")) {
        if (!j.at("outputs").is_array()) bad_field("outputs", "expected an array");
        for (const auto& o : j.at("outputs")) {
            if (!o.is_string()) bad_field("outputs", "entries must be strings");
            const auto id = output_from_name(o.get<std::string>());
            if (!id) bad_field("outputs", "unknown output '" + o.get<std::string>() + "'");
            spec.outputs.push_back(*id);
        }
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        if (!s.is_object()) bad_field("solver", "expected an object");
        static const std::set<std::string> sk{"n_initial", "n_cap", "growth", "tol_rel"};
        for (const auto& [key, val] : s.items())
            if (!sk.count(key)) bad_field("solver." + key, "unknown key");
        spec.solve.n_initial = static_cast<int>(get_num(s, "n_initial", spec.solve.n_initial));
        spec.solve.n_cap = static_cast<int>(get_num(s, "n_cap", spec.solve.n_cap));
        spec.solve.growth_factor =
            static_cast<int>(get_num(s, "growth", spec.solve.growth_factor));
        spec.solve.energy_tol_rel = get_num(s, "tol_rel", spec.solve.energy_tol_rel);
    }
    if (j.contains("qfi")) {
        const auto& s = j.at("qfi");
        if (!s.is_object()) bad_field("qfi", "expected an object");
        static const std::set<std::string> sk{"delta_rel", "richardson_rtol"};
        for (const auto& [key, val] : s.items())
            if (!sk.count(key)) bad_field("qfi." + key, "unknown key");
        spec.qfi.delta_rel = get_num(s, "delta_rel", spec.qfi.delta_rel);
        spec.qfi.richardson_rtol = get_num(s, "richardson_rtol", spec.qfi.richardson_rtol);
        spec.qfi.solve = spec.solve;
    } else {
        spec.qfi.solve = spec.solve;
    }

    if (j.contains("workers")) {
        if (!j.at("workers").is_number_integer()) bad_field("workers", "expected an integer");
        spec.workers = j.at("workers").get<int>();
    }
    return spec;
}

} // namespace qrm::sweep
