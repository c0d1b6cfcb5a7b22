#include "flowrep/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "flowrep/text.hpp"

namespace flowrep {

namespace {

constexpr double kWidth = 800, kHeight = 360;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    if (!std::isfinite(v)) v = 0;
    return format_fixed(v, 2);
}

/// Minimal CSV: comma separated, double quotes wrap fields containing commas.
std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else cur += c;
    }
    out.push_back(cur);
    return out;
}

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("chart data source missing: " + path.string());
    CsvData data;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = parse_csv_line(line);
        if (first) { data.header = fields; first = false; }
        else data.rows.push_back(fields);
    }
    return data;
}

/// Round tick step: 1/2/5 * 10^k covering the range with ~5 ticks.
double tick_step(double span) {
    if (span <= 0) return 1.0;
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double norm = raw / mag;
    double step = norm < 1.5 ? 1.0 : (norm < 3.5 ? 2.0 : (norm < 7.5 ? 5.0 : 10.0));
    return step * mag;
}

std::string tick_label(double v) {
    double a = std::abs(v);
    if (a >= 1e9) return format_fixed(v / 1e9, a >= 1e10 ? 0 : 1) + "G";
    if (a >= 1e6) return format_fixed(v / 1e6, a >= 1e7 ? 0 : 1) + "M";
    if (a >= 1e3) return format_fixed(v / 1e3, a >= 1e4 ? 0 : 1) + "k";
    if (a >= 1 || a == 0) return format_fixed(v, a >= 10 ? 0 : (a == 0 ? 0 : 2));
    return format_f64(v);
}

class SvgDoc {
public:
    SvgDoc() {
        body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
              << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
              << "\">\n"
              << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
              << "\" fill=\"white\"/>\n";
    }

    void title(const std::string& t) {
        body_ << "<text x=\"" << kWidth / 2
              << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                 "font-size=\"15\" font-weight=\"bold\">"
              << xml_escape(t) << "</text>\n";
    }

    void axis_labels(const std::string& x, const std::string& y) {
        if (!x.empty())
            body_ << "<text x=\"" << (kLeft + plot_w() / 2) << "\" y=\"" << (kHeight - 10)
                  << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
                  << xml_escape(x) << "</text>\n";
        if (!y.empty())
            body_ << "<text x=\"16\" y=\"" << (kTop + plot_h() / 2)
                  << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
                     "transform=\"rotate(-90 16 "
                  << (kTop + plot_h() / 2) << ")\">" << xml_escape(y) << "</text>\n";
    }

    void frame() {
        body_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w()
              << "\" height=\"" << plot_h()
              << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    }

    void no_data() {
        body_ << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
              << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" "
                 "fill=\"#888\">no data</text>\n";
    }

    static double plot_w() { return kWidth - kLeft - kRight; }
    static double plot_h() { return kHeight - kTop - kBottom; }

    void y_ticks(double lo, double hi) {
        double step = tick_step(hi - lo);
        for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
            double y = map_y(v, lo, hi);
            body_ << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\""
                  << kLeft + plot_w() << "\" y2=\"" << num(y)
                  << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n"
                  << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
                  << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
                  << tick_label(v) << "</text>\n";
        }
    }

    void x_ticks(double lo, double hi) {
        double step = tick_step(hi - lo);
        for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
            double x = map_x(v, lo, hi);
            body_ << "<text x=\"" << num(x) << "\" y=\"" << kTop + plot_h() + 16
                  << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                  << tick_label(v) << "</text>\n";
        }
    }

    static double map_x(double v, double lo, double hi) {
        double span = hi - lo;
        if (span <= 0) span = 1;
        return kLeft + (v - lo) / span * plot_w();
    }
    static double map_y(double v, double lo, double hi) {
        double span = hi - lo;
        if (span <= 0) span = 1;
        return kTop + plot_h() - (v - lo) / span * plot_h();
    }

    std::ostringstream& raw() { return body_; }

    std::string finish() {
        body_ << "</svg>\n";
        return body_.str();
    }

private:
    std::ostringstream body_;
};

std::string render_timeseries(const ChartSpec& spec, const CsvData& data) {
    SvgDoc doc;
    doc.title(spec.title);
    if (data.rows.empty()) {
        doc.no_data();
        return doc.finish();
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : data.rows) {
        if (row.size() < 2) continue;
        auto x = parse_f64(row[0]);
        auto y = parse_f64(row[1]);
        if (x && y) pts.emplace_back(*x, *y);
    }
    if (pts.empty()) {
        doc.no_data();
        return doc.finish();
    }
    double xlo = pts.front().first, xhi = pts.back().first;
    double yhi = 0;
    for (auto& [x, y] : pts) yhi = std::max(yhi, y);
    if (yhi <= 0) yhi = 1;
    yhi *= 1.05;

    // Shaded burst intervals first so the line draws on top.
    for (const auto& span : spec.highlight_intervals) {
        double x0 = SvgDoc::map_x(std::max(span.x0, xlo), xlo, xhi);
        double x1 = SvgDoc::map_x(std::min(span.x1, xhi), xlo, xhi);
        if (x1 <= x0) continue;
        doc.raw() << "<rect class=\"burst\" x=\"" << num(x0) << "\" y=\"" << kTop
                  << "\" width=\"" << num(x1 - x0) << "\" height=\"" << SvgDoc::plot_h()
                  << "\" fill=\"#f1c40f\" fill-opacity=\"0.35\"/>\n";
    }
    doc.y_ticks(0, yhi);
    doc.x_ticks(xlo, xhi);
    doc.raw() << "<polyline fill=\"none\" stroke=\"#2980b9\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
        if (i) doc.raw() << ' ';
        doc.raw() << num(SvgDoc::map_x(pts[i].first, xlo, xhi)) << ','
                  << num(SvgDoc::map_y(pts[i].second, 0, yhi));
    }
    doc.raw() << "\"/>\n";
    doc.frame();
    doc.axis_labels(spec.x_label, spec.y_label);
    return doc.finish();
}

std::string render_boxplot(const ChartSpec& spec, const CsvData& data) {
    SvgDoc doc;
    doc.title(spec.title);
    std::map<std::string, std::vector<double>> groups;
    std::vector<std::string> order;
    for (const auto& row : data.rows) {
        if (row.size() < 2) continue;
        auto v = parse_f64(row[1]);
        if (!v) continue;
        if (!groups.count(row[0])) order.push_back(row[0]);
        groups[row[0]].push_back(*v);
    }
    if (order.empty()) {
        doc.no_data();
        return doc.finish();
    }
    double yhi = 0;
    for (auto& [k, vs] : groups) {
        std::sort(vs.begin(), vs.end());
        yhi = std::max(yhi, vs.back());
    }
    if (yhi <= 0) yhi = 1;
    yhi *= 1.05;
    doc.y_ticks(0, yhi);

    auto quantile = [](const std::vector<double>& sorted, double q) {
        if (sorted.size() == 1) return sorted[0];
        double pos = q * static_cast<double>(sorted.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= sorted.size()) return sorted.back();
        return sorted[lo] * (1 - frac) + sorted[lo + 1] * frac;
    };

    double slot = SvgDoc::plot_w() / static_cast<double>(order.size());
    double box_w = std::min(60.0, slot * 0.5);
    for (size_t i = 0; i < order.size(); ++i) {
        const auto& vs = groups[order[i]];
        double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
        double q1 = quantile(vs, 0.25), q2 = quantile(vs, 0.5), q3 = quantile(vs, 0.75);
        double ymin = SvgDoc::map_y(vs.front(), 0, yhi), ymax = SvgDoc::map_y(vs.back(), 0, yhi);
        double yq1 = SvgDoc::map_y(q1, 0, yhi), yq2 = SvgDoc::map_y(q2, 0, yhi),
               yq3 = SvgDoc::map_y(q3, 0, yhi);
        doc.raw() << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ymin) << "\" x2=\"" << num(cx)
                  << "\" y2=\"" << num(ymax) << "\" stroke=\"#555\"/>\n"
                  << "<rect class=\"box\" x=\"" << num(cx - box_w / 2) << "\" y=\"" << num(yq3)
                  << "\" width=\"" << num(box_w) << "\" height=\"" << num(yq1 - yq3)
                  << "\" fill=\"#85c1e9\" stroke=\"#2471a3\"/>\n"
                  << "<line x1=\"" << num(cx - box_w / 2) << "\" y1=\"" << num(yq2) << "\" x2=\""
                  << num(cx + box_w / 2) << "\" y2=\"" << num(yq2)
                  << "\" stroke=\"#1a5276\" stroke-width=\"2\"/>\n"
                  << "<text x=\"" << num(cx) << "\" y=\"" << kTop + SvgDoc::plot_h() + 16
                  << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                  << xml_escape(order[i]) << "</text>\n";
    }
    doc.frame();
    doc.axis_labels(spec.x_label, spec.y_label);
    return doc.finish();
}

std::string render_pie(const ChartSpec& spec, const CsvData& data) {
    SvgDoc doc;
    doc.title(spec.title);
    std::vector<std::pair<std::string, double>> slices;
    double total = 0;
    for (const auto& row : data.rows) {
        if (row.size() < 2) continue;
        auto v = parse_f64(row[1]);
        if (!v || *v <= 0) continue;
        slices.emplace_back(row[0], *v);
        total += *v;
    }
    if (slices.empty() || total <= 0) {
        doc.no_data();
        return doc.finish();
    }
    double cx = kWidth * 0.38, cy = kTop + SvgDoc::plot_h() / 2 + 10, r = 120;
    const char* palette[] = {"#2980b9", "#e67e22", "#27ae60", "#8e44ad", "#c0392b",
                             "#16a085", "#f1c40f", "#7f8c8d", "#2c3e50", "#d35400"};
    if (slices.size() == 1) {
        // Single category: a full-circle wedge.
        doc.raw() << "<circle class=\"wedge\" cx=\"" << num(cx) << "\" cy=\"" << num(cy)
                  << "\" r=\"" << num(r) << "\" fill=\"" << palette[0]
                  << "\" stroke=\"white\"/>\n";
    } else {
        double angle = -M_PI / 2;
        for (size_t i = 0; i < slices.size(); ++i) {
            double frac = slices[i].second / total;
            double next = angle + frac * 2 * M_PI;
            double x1 = cx + r * std::cos(angle), y1 = cy + r * std::sin(angle);
            double x2 = cx + r * std::cos(next), y2 = cy + r * std::sin(next);
            int large = frac > 0.5 ? 1 : 0;
            doc.raw() << "<path class=\"wedge\" d=\"M " << num(cx) << ' ' << num(cy) << " L "
                      << num(x1) << ' ' << num(y1) << " A " << num(r) << ' ' << num(r)
                      << " 0 " << large << " 1 " << num(x2) << ' ' << num(y2)
                      << " Z\" fill=\"" << palette[i % 10] << "\" stroke=\"white\"/>\n";
            angle = next;
        }
    }
    double ly = kTop + 10;
    for (size_t i = 0; i < slices.size() && i < 12; ++i) {
        doc.raw() << "<rect x=\"" << kWidth * 0.66 << "\" y=\"" << num(ly - 9)
                  << "\" width=\"10\" height=\"10\" fill=\"" << palette[i % 10] << "\"/>\n"
                  << "<text x=\"" << kWidth * 0.66 + 16 << "\" y=\"" << num(ly)
                  << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(slices[i].first)
                  << " (" << format_fixed(100.0 * slices[i].second / total, 1) << "%)</text>\n";
        ly += 16;
    }
    return doc.finish();
}

std::string render_survival(const ChartSpec& spec, const CsvData& data) {
    SvgDoc doc;
    doc.title(spec.title);
    std::vector<double> xs;
    for (const auto& row : data.rows) {
        if (row.empty()) continue;
        auto v = parse_f64(row.back());
        if (v) xs.push_back(*v);
    }
    if (xs.empty()) {
        doc.no_data();
        return doc.finish();
    }
    std::sort(xs.begin(), xs.end());
    double xlo = std::min(0.0, xs.front()), xhi = xs.back();
    if (xhi <= xlo) xhi = xlo + 1;
    doc.y_ticks(0, 1.0);
    doc.x_ticks(xlo, xhi);
    // Empirical complementary CDF as a step polyline.
    size_t n = xs.size();
    doc.raw() << "<polyline fill=\"none\" stroke=\"#8e44ad\" stroke-width=\"1.5\" points=\"";
    doc.raw() << num(SvgDoc::map_x(xlo, xlo, xhi)) << ',' << num(SvgDoc::map_y(1.0, 0, 1));
    for (size_t i = 0; i < n; ++i) {
        double surv_before = 1.0 - static_cast<double>(i) / static_cast<double>(n);
        double surv_after = 1.0 - static_cast<double>(i + 1) / static_cast<double>(n);
        double x = SvgDoc::map_x(xs[i], xlo, xhi);
        doc.raw() << ' ' << num(x) << ',' << num(SvgDoc::map_y(surv_before, 0, 1));
        doc.raw() << ' ' << num(x) << ',' << num(SvgDoc::map_y(surv_after, 0, 1));
    }
    doc.raw() << "\"/>\n";
    doc.frame();
    doc.axis_labels(spec.x_label, spec.y_label.empty() ? "P(X >= x)" : spec.y_label);
    return doc.finish();
}

std::string render_topology(const ChartSpec& spec, const CsvData& data) {
    SvgDoc doc;
    doc.title(spec.title);
    struct Edge { std::string a, b; double w; };
    std::vector<Edge> edges;
    std::vector<std::string> nodes;
    auto node_index = [&](const std::string& name) {
        for (size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == name) return i;
        nodes.push_back(name);
        return nodes.size() - 1;
    };
    double wmax = 0;
    for (const auto& row : data.rows) {
        if (row.size() < 3) continue;
        auto w = parse_f64(row[2]);
        if (!w) continue;
        node_index(row[0]);
        node_index(row[1]);
        edges.push_back({row[0], row[1], *w});
        wmax = std::max(wmax, *w);
    }
    if (edges.empty()) {
        doc.no_data();
        return doc.finish();
    }
    double cx = kWidth / 2, cy = kTop + SvgDoc::plot_h() / 2 + 10;
    double r = std::min(SvgDoc::plot_w(), SvgDoc::plot_h()) / 2 - 10;
    auto pos = [&](size_t i) {
        double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(nodes.size()) -
                   M_PI / 2;
        return std::pair<double, double>{cx + r * std::cos(a), cy + r * std::sin(a)};
    };
    for (const auto& e : edges) {
        auto [x1, y1] = pos(node_index(e.a));
        auto [x2, y2] = pos(node_index(e.b));
        double width = 0.8 + 3.2 * (wmax > 0 ? e.w / wmax : 0);
        doc.raw() << "<line class=\"edge\" x1=\"" << num(x1) << "\" y1=\"" << num(y1)
                  << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
                  << "\" stroke=\"#7fb3d5\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    for (size_t i = 0; i < nodes.size(); ++i) {
        auto [x, y] = pos(i);
        doc.raw() << "<circle class=\"node\" cx=\"" << num(x) << "\" cy=\"" << num(y)
                  << "\" r=\"5\" fill=\"#2c3e50\"/>\n"
                  << "<text x=\"" << num(x) << "\" y=\"" << num(y - 8)
                  << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
                  << xml_escape(nodes[i]) << "</text>\n";
    }
    return doc.finish();
}

}  // namespace

std::string render_chart_svg(const ChartSpec& spec, const std::filesystem::path& base_dir) {
    CsvData data = read_csv(base_dir / spec.data_source);
    switch (spec.kind) {
        case ChartKind::timeseries_line: return render_timeseries(spec, data);
        case ChartKind::boxplot: return render_boxplot(spec, data);
        case ChartKind::pie: return render_pie(spec, data);
        case ChartKind::survival_distribution: return render_survival(spec, data);
        case ChartKind::topology_graph: return render_topology(spec, data);
    }
    throw std::runtime_error("unknown chart kind");
}

std::string gnuplot_script(const ChartSpec& spec) {
    std::ostringstream out;
    out << "# gnuplot script for " << spec.name << "\n"
        << "set datafile separator ','\n"
        << "set title '" << spec.title << "'\n"
        << "set xlabel '" << spec.x_label << "'\n"
        << "set ylabel '" << spec.y_label << "'\n"
        << "set term svg size 800,360\n"
        << "set output '" << spec.name << ".svg'\n";
    switch (spec.kind) {
        case ChartKind::timeseries_line:
            for (const auto& s : spec.highlight_intervals)
                out << "set object rect from " << format_f64(s.x0) << ", graph 0 to "
                    << format_f64(s.x1) << ", graph 1 fc rgb '#f1c40f' fs transparent solid "
                       "0.35 noborder\n";
            out << "plot '" << spec.data_source << "' using 1:2 skip 1 with lines title ''\n";
            break;
        case ChartKind::boxplot:
            out << "set style data boxplot\n"
                << "plot '" << spec.data_source << "' using (1):2 skip 1 title ''\n";
            break;
        default:
            out << "plot '" << spec.data_source << "' using 1:2 skip 1 with points title ''\n";
            break;
    }
    return out.str();
}

}  // namespace flowrep
