#pragma once

#include <filesystem>
#include <string>

#include "flowrep/report.hpp"

namespace flowrep {

/// Renders a chart to a self-contained SVG document, reading the spec's CSV
/// data source relative to base_dir. An empty data source yields a
/// placeholder chart carrying a "no data" annotation rather than an error.
std::string render_chart_svg(const ChartSpec& spec, const std::filesystem::path& base_dir);

/// Companion gnuplot script plotting the same CSV (line and boxplot kinds).
std::string gnuplot_script(const ChartSpec& spec);

}  // namespace flowrep
