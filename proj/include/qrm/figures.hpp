// figures.hpp — CSV reproduction of the paper-style figure data sets.  Each
// figure writes one CSV per curve/panel into an output directory; presets can
// be overridden per call.

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qrm::figures {

struct FigureOptions {
    std::string out_dir{"."};
    int workers{0};                        // 0 → default pool size
    std::optional<double> Omega_ratio;     // override the preset Ω/ω (or ω/Ω for fig1c linear)
    std::optional<int> count;              // override the base grid density
};

/// Valid names: fig1a, fig1b, fig1c, fig2ab, fig3, fig4.
/// Returns the paths written; throws InvalidParams for unknown names.
std::vector<std::string> run_figure(const std::string& name, const FigureOptions& opts = {});

std::vector<std::string> figure_names();

} // namespace qrm::figures
