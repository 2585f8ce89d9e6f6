// qrm_cli.cpp — command-line surface: single-point evaluation, parameter
// sweeps, and figure-data reproduction.
//
// Exit codes: 0 success, 1 invalid input, 2 completed with unconverged rows.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qrm/figures.hpp"
#include "qrm/sweep.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json j = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw qrm::InvalidParams("config: cannot open '" + path + "'");
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw qrm::InvalidParams("config: " + std::string(e.what()));
        }
        if (!j.is_object()) throw qrm::InvalidParams("config: top level must be an object");
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw qrm::InvalidParams("--param: expected key=value, got '" + ov + "'");
        const std::string key = ov.substr(0, eq);
        const std::string val = ov.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(val);
        } catch (const json::parse_error&) {
            parsed = val;   // bare strings stay strings
        }
        json* node = &j;
        std::stringstream ss(key);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) parts.push_back(part);
        if (parts.empty()) throw qrm::InvalidParams("--param: empty key");
        for (size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
        (*node)[parts.back()] = parsed;
    }
    return j;
}

std::vector<qrm::sweep::Output> parse_output_list(const std::string& csv) {
    std::vector<qrm::sweep::Output> out;
    std::stringstream ss(csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
        const auto o = qrm::sweep::output_from_name(name);
        if (!o) throw qrm::InvalidParams("outputs: unknown output '" + name + "'");
        out.push_back(*o);
    }
    return out;
}

int cmd_point(const std::string& config, const std::vector<std::string>& params,
              const std::string& outputs_csv) {
    auto j = load_config(config, params);
    auto spec = qrm::sweep::SweepSpec::from_json(j);
    if (!outputs_csv.empty()) spec.outputs = parse_output_list(outputs_csv);
    if (spec.outputs.empty())
        throw qrm::InvalidParams("outputs: at least one output is required");
    qrm::sweep::validate_outputs(spec.base, spec.outputs);
    spec.base.validate();

    const auto row = qrm::sweep::evaluate_outputs(spec.base, spec.outputs, spec.solve, spec.qfi);
    json out;
    out["model"] = spec.base.coupling == qrm::Coupling::Quadratic ? "quadratic" : "linear";
    out["omega"] = spec.base.omega;
    out["Omega"] = spec.base.Omega;
    out["epsilon"] = spec.base.epsilon;
    if (spec.base.coupling == qrm::Coupling::Quadratic) {
        out["chi"] = spec.base.chi;
        out["g2"] = spec.base.g;
    } else {
        out["g1"] = spec.base.g;
    }
    json vals;
    for (size_t i = 0; i < spec.outputs.size(); ++i)
        vals[qrm::sweep::output_name(spec.outputs[i])] = row.outputs[i];
    out["outputs"] = vals;
    out["converged"] = row.converged;
    out["n_max"] = row.n_max;
    std::cout << out.dump() << "\n";
    return row.converged ? 0 : 2;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& params,
              const std::string& out_path, const std::string& format, int workers) {
    auto j = load_config(config, params);
    auto spec = qrm::sweep::SweepSpec::from_json(j);
    if (workers > 0) spec.workers = workers;
    spec.validate();

    const auto rows = qrm::sweep::run(spec);
    std::ostringstream body;
    if (format == "csv")
        qrm::sweep::write_csv(body, spec, rows);
    else if (format == "jsonl")
        qrm::sweep::write_jsonl(body, spec, rows);
    else
        throw qrm::InvalidParams("--format: must be 'csv' or 'jsonl'");

    if (out_path.empty() || out_path == "-") {
        std::cout << body.str();
    } else {
        std::ofstream os(out_path);
        if (!os) throw qrm::InvalidParams("--out: cannot open '" + out_path + "'");
        os << body.str();
    }
    for (const auto& r : rows)
        if (!r.converged) return 2;
    return 0;
}

int cmd_figure(const std::string& name, const std::string& out_dir,
               const std::vector<std::string>& params, int workers) {
    auto j = load_config("", params);
    qrm::figures::FigureOptions opts;
    opts.out_dir = out_dir;
    opts.workers = workers;
    if (j.contains("Omega_ratio")) opts.Omega_ratio = j.at("Omega_ratio").get<double>();
    if (j.contains("count")) opts.count = j.at("count").get<int>();
    const auto files = qrm::figures::run_figure(name, opts);
    for (const auto& f : files) std::cout << f << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymmetric non-linear quantum Rabi model: ground state, criticality, QFI"};
    app.require_subcommand(1);

    std::string config, outputs_csv, out_path, format = "csv", figure_name;
    std::vector<std::string> params;
    int workers = 0;

    auto* point = app.add_subcommand("point", "evaluate outputs at fixed parameters (JSON)");
    point->add_option("--config", config, "JSON config file");
    point->add_option("--param", params, "override config values (key=value, dotted paths)");
    point->add_option("--outputs", outputs_csv, "comma-separated output list");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep (CSV/JSONL)");
    sweep->add_option("--config", config, "JSON config file with a sweep block");
    sweep->add_option("--param", params, "override config values (key=value, dotted paths)");
    sweep->add_option("--out", out_path, "output file ('-' for stdout)");
    sweep->add_option("--format", format, "csv or jsonl")->capture_default_str();
    sweep->add_option("--workers", workers, "worker threads (QRM_WORKERS env by default)");

    auto* figure = app.add_subcommand("figure", "emit figure-reproduction CSV bundles");
    figure->add_option("name", figure_name, "fig1a, fig1b, fig1c, fig2ab, fig3, fig4")
        ->required();
    figure->add_option("--out", out_path, "output directory")->capture_default_str();
    figure->add_option("--param", params, "preset overrides (Omega_ratio=..., count=...)");
    figure->add_option("--workers", workers, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        if (point->parsed()) return cmd_point(config, params, outputs_csv);
        if (sweep->parsed()) return cmd_sweep(config, params, out_path, format, workers);
        if (figure->parsed())
            return cmd_figure(figure_name, out_path.empty() ? "." : out_path, params, workers);
    } catch (const qrm::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
