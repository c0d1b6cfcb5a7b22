#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace flowrep {

// Report model: sections of tables, figures and text, rendered to markdown,
// LaTeX source or plain text, with charts as standalone SVG files and every
// figure backed by an exported CSV in the output tree. Output is
// deterministic apart from the single metadata header line.

enum class ChartKind { timeseries_line, boxplot, pie, survival_distribution, topology_graph };

struct ShadedSpan {
    double x0 = 0.0;
    double x1 = 0.0;
};

struct ChartSpec {
    ChartKind kind = ChartKind::timeseries_line;
    std::string name;         // file stem: charts/<name>.svg
    std::string data_source;  // output-relative CSV path, e.g. "tables/bps.csv"
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ShadedSpan> highlight_intervals;  // burst shading on line charts
};

struct TableCell {
    std::string text;
    std::optional<std::string> color;  // named style: red / amber / green
};

struct TableItem {
    std::string title;
    std::vector<std::string> headers;
    std::vector<std::vector<TableCell>> rows;
};

struct FigureItem {
    ChartSpec spec;
};

struct TextItem {
    std::string paragraph;
};

using ContentItem = std::variant<TableItem, FigureItem, TextItem>;

struct ReportSection {
    std::string name;
    std::vector<ContentItem> items;
};

/// A CSV written under the output tree; chart data sources point at these.
struct ExportedTable {
    std::string rel_path;  // e.g. "tables/tcp_rag.csv"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

enum class ReportFormat { markdown, latex, text };

const char* report_format_name(ReportFormat f);

struct RenderOptions {
    std::string metadata;         // goes into the single header line
    bool gnuplot_scripts = false; // also emit charts/<name>.gp
};

struct RenderResult {
    std::filesystem::path report_file;
    std::vector<std::string> files;  // every path written, output-relative, sorted
};

/// Writes report.{md|tex|txt}, tables/*.csv and charts/*.svg under out_dir.
/// Throws if a figure references a data source that was not exported.
RenderResult render(const std::vector<ReportSection>& sections,
                    const std::vector<ExportedTable>& exports, ReportFormat format,
                    const std::filesystem::path& out_dir, const RenderOptions& opts = {});

std::string latex_escape(const std::string& s);
std::string csv_escape(const std::string& s);

}  // namespace flowrep
