// sweep.hpp — declarative parameter sweeps with deterministic CSV/JSONL
// output.  Rows are evaluated by a worker pool and written in sweep order;
// fixed spec + fixed options give byte-identical files for any worker count.

#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrm/metrology.hpp"
#include "qrm/model.hpp"

namespace qrm::sweep {

enum class Output {
    Energy,
    Gap,
    SigmaX,
    SigmaZ,
    X2,
    FqEd,
    FqFid,
    FqRho,
    FqXi,
    XiPlus,
    XiMinus,
    CPlusSq,
};

const char* output_name(Output o);
std::optional<Output> output_from_name(const std::string& name);

struct SweepSpec {
    ModelParams base;
    std::string param{"g2_bar"};          // swept parameter name
    double start{0.0};
    double stop{0.0};
    int count{2};
    bool log_spacing{false};
    std::vector<Output> outputs;
    SolveOptions solve{};
    QfiOptions qfi{};
    int workers{0};                       // 0 → QRM_WORKERS env / hardware

    double swept_value(int i) const;
    ModelParams params_at(double value) const;
    void validate() const;                // InvalidParams names the offending field

    static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepRow {
    double value{};
    std::vector<double> outputs;          // one entry per requested output
    bool converged{true};
    int n_max{0};
};

/// Evaluate the requested outputs at fixed parameters.  Failures surface as
/// NaN entries with converged = false; nothing throws for per-point trouble.
SweepRow evaluate_outputs(const ModelParams& params, const std::vector<Output>& outputs,
                          const SolveOptions& solve, const QfiOptions& qfi);

/// Reject outputs the model kind cannot deliver (variational quantities need
/// the quadratic model at chi = 1).
void validate_outputs(const ModelParams& base, const std::vector<Output>& outputs);

std::vector<SweepRow> run(const SweepSpec& spec);

void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);
void write_jsonl(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// 17-significant-digit, locale-independent float formatting (round-trip exact).
std::string format_double(double v);

int default_workers();

/// Ordered parallel map: fn(i) for i in [0, n), results kept in index order.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

} // namespace qrm::sweep
