#include "flowrep/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flowrep/svg.hpp"

namespace flowrep {

namespace fs = std::filesystem;

const char* report_format_name(ReportFormat f) {
    switch (f) {
        case ReportFormat::markdown: return "markdown";
        case ReportFormat::latex: return "latex";
        case ReportFormat::text: return "text";
    }
    return "?";
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string latex_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': case '%': case '$': case '#': case '_': case '{': case '}':
                out += '\\';
                out += c;
                break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '\\': out += "\\textbackslash{}"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string markdown_report(const std::vector<ReportSection>& sections,
                            const RenderOptions& opts) {
    std::ostringstream out;
    out << "<!-- generated: " << opts.metadata << " -->\n";
    out << "# Traffic report\n";
    for (const auto& section : sections) {
        out << "\n## " << section.name << "\n";
        for (const auto& item : section.items) {
            if (const auto* text = std::get_if<TextItem>(&item)) {
                out << '\n' << text->paragraph << '\n';
            } else if (const auto* table = std::get_if<TableItem>(&item)) {
                out << "\n### " << table->title << "\n\n";
                out << '|';
                for (const auto& h : table->headers) out << ' ' << h << " |";
                out << "\n|";
                for (size_t i = 0; i < table->headers.size(); ++i) out << " --- |";
                out << '\n';
                for (const auto& row : table->rows) {
                    out << '|';
                    for (const auto& cell : row) out << ' ' << cell.text << " |";
                    out << '\n';
                }
            } else if (const auto* fig = std::get_if<FigureItem>(&item)) {
                out << "\n### " << fig->spec.title << "\n\n"
                    << "![" << fig->spec.title << "](charts/" << fig->spec.name << ".svg)\n";
            }
        }
    }
    return out.str();
}

std::string latex_report(const std::vector<ReportSection>& sections,
                         const RenderOptions& opts) {
    std::ostringstream out;
    out << "% generated: " << opts.metadata << "\n";
    out << "\\documentclass[11pt]{article}\n"
           "\\usepackage[margin=2cm]{geometry}\n"
           "\\usepackage[table]{xcolor}\n"
           "\\usepackage{longtable}\n"
           "\\usepackage{svg}\n"
           "\\definecolor{ragred}{RGB}{231,76,60}\n"
           "\\definecolor{ragamber}{RGB}{243,156,18}\n"
           "\\definecolor{raggreen}{RGB}{39,174,96}\n"
           "\\begin{document}\n"
           "\\title{Traffic report}\n"
           "\\date{}\n"
           "\\maketitle\n";
    for (const auto& section : sections) {
        out << "\n\\section{" << latex_escape(section.name) << "}\n";
        for (const auto& item : section.items) {
            if (const auto* text = std::get_if<TextItem>(&item)) {
                out << '\n' << latex_escape(text->paragraph) << "\n";
            } else if (const auto* table = std::get_if<TableItem>(&item)) {
                out << "\n\\subsection*{" << latex_escape(table->title) << "}\n";
                out << "\\begin{longtable}{";
                for (size_t i = 0; i < table->headers.size(); ++i) out << 'l';
                out << "}\n";
                for (size_t i = 0; i < table->headers.size(); ++i) {
                    if (i) out << " & ";
                    out << "\\textbf{" << latex_escape(table->headers[i]) << "}";
                }
                out << " \\\\\n\\hline\n";
                for (const auto& row : table->rows) {
                    for (size_t i = 0; i < row.size(); ++i) {
                        if (i) out << " & ";
                        if (row[i].color)
                            out << "\\cellcolor{rag" << *row[i].color << "} ";
                        out << latex_escape(row[i].text);
                    }
                    out << " \\\\\n";
                }
                out << "\\end{longtable}\n";
            } else if (const auto* fig = std::get_if<FigureItem>(&item)) {
                out << "\n\\subsection*{" << latex_escape(fig->spec.title) << "}\n"
                    << "\\includesvg[width=\\textwidth]{charts/" << fig->spec.name << "}\n";
            }
        }
    }
    out << "\n\\end{document}\n";
    return out.str();
}

std::string text_report(const std::vector<ReportSection>& sections, const RenderOptions& opts) {
    std::ostringstream out;
    out << "# generated: " << opts.metadata << "\n";
    out << "TRAFFIC REPORT\n";
    for (const auto& section : sections) {
        out << '\n' << std::string(70, '=') << '\n'
            << "SECTION: " << section.name << '\n'
            << std::string(70, '=') << '\n';
        for (const auto& item : section.items) {
            if (const auto* text = std::get_if<TextItem>(&item)) {
                out << '\n' << text->paragraph << '\n';
            } else if (const auto* table = std::get_if<TableItem>(&item)) {
                out << "\n-- " << table->title << " --\n";
                std::vector<size_t> widths(table->headers.size(), 0);
                for (size_t i = 0; i < table->headers.size(); ++i)
                    widths[i] = table->headers[i].size();
                for (const auto& row : table->rows)
                    for (size_t i = 0; i < row.size() && i < widths.size(); ++i)
                        widths[i] = std::max(widths[i], row[i].text.size());
                auto pad = [&](const std::string& s, size_t w) {
                    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
                };
                for (size_t i = 0; i < table->headers.size(); ++i)
                    out << pad(table->headers[i], widths[i]) << "  ";
                out << '\n';
                for (const auto& row : table->rows) {
                    for (size_t i = 0; i < row.size() && i < widths.size(); ++i)
                        out << pad(row[i].text, widths[i]) << "  ";
                    out << '\n';
                }
            } else if (const auto* fig = std::get_if<FigureItem>(&item)) {
                out << "\n[figure: " << fig->spec.title << " -> charts/" << fig->spec.name
                    << ".svg]\n";
            }
        }
    }
    return out.str();
}

}  // namespace

RenderResult render(const std::vector<ReportSection>& sections,
                    const std::vector<ExportedTable>& exports, ReportFormat format,
                    const fs::path& out_dir, const RenderOptions& opts) {
    RenderResult result;
    fs::create_directories(out_dir / "tables");
    fs::create_directories(out_dir / "charts");

    std::set<std::string> exported;
    for (const auto& table : exports) {
        std::ostringstream csv;
        for (size_t i = 0; i < table.header.size(); ++i) {
            if (i) csv << ',';
            csv << csv_escape(table.header[i]);
        }
        csv << '\n';
        for (const auto& row : table.rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) csv << ',';
                csv << csv_escape(row[i]);
            }
            csv << '\n';
        }
        write_file(out_dir / table.rel_path, csv.str());
        exported.insert(table.rel_path);
        result.files.push_back(table.rel_path);
    }

    // Charts read their exported data sources; a dangling reference is an error.
    for (const auto& section : sections) {
        for (const auto& item : section.items) {
            const auto* fig = std::get_if<FigureItem>(&item);
            if (!fig) continue;
            if (!exported.count(fig->spec.data_source))
                throw std::runtime_error("figure '" + fig->spec.name +
                                         "' references missing data source '" +
                                         fig->spec.data_source + "'");
            std::string svg = render_chart_svg(fig->spec, out_dir);
            std::string rel = "charts/" + fig->spec.name + ".svg";
            write_file(out_dir / rel, svg);
            result.files.push_back(rel);
            if (opts.gnuplot_scripts) {
                std::string gp_rel = "charts/" + fig->spec.name + ".gp";
                write_file(out_dir / gp_rel, gnuplot_script(fig->spec));
                result.files.push_back(gp_rel);
            }
        }
    }

    std::string body;
    std::string filename;
    switch (format) {
        case ReportFormat::markdown:
            body = markdown_report(sections, opts);
            filename = "report.md";
            break;
        case ReportFormat::latex:
            body = latex_report(sections, opts);
            filename = "report.tex";
            break;
        case ReportFormat::text:
            body = text_report(sections, opts);
            filename = "report.txt";
            break;
    }
    write_file(out_dir / filename, body);
    result.files.push_back(filename);
    result.report_file = out_dir / filename;
    std::sort(result.files.begin(), result.files.end());
    return result;
}

}  // namespace flowrep
