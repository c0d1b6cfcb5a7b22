#include <regex>

#include "doctest.h"
#include "flowrep/report.hpp"
#include "flowrep/svg.hpp"
#include "helpers.hpp"

using namespace flowrep;
using testutil::TempDir;
using testutil::read_text;
using testutil::write_text;

namespace {

size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

ExportedTable tiny_series_export(const std::string& rel) {
    ExportedTable t;
    t.rel_path = rel;
    t.header = {"timestamp", "value"};
    t.rows = {{"0", "10"}, {"1", "30"}, {"2", "20"}};
    return t;
}

}  // namespace

TEST_CASE("markdown render produces a pipe table") {
    TempDir dir("md");
    ReportSection section;
    section.name = "demo";
    TableItem table;
    table.title = "pair table";
    table.headers = {"a", "b"};
    table.rows = {{{"1", std::nullopt}, {"2", std::nullopt}},
                  {{"3", std::nullopt}, {"4", std::nullopt}}};
    section.items.push_back(table);

    RenderResult result = render({section}, {}, ReportFormat::markdown, dir.path());
    std::string md = read_text(result.report_file);
    CHECK(md.find("| a | b |") != std::string::npos);
    CHECK(md.find("| --- | --- |") != std::string::npos);
    CHECK(md.find("| 1 | 2 |") != std::string::npos);
    CHECK(md.find("| 3 | 4 |") != std::string::npos);
    CHECK(md.find("## demo") != std::string::npos);
}

TEST_CASE("latex render emits the red cell style once per red row") {
    TempDir dir("tex");
    ReportSection section;
    section.name = "rag";
    TableItem table;
    table.title = "health";
    table.headers = {"server", "severity"};
    table.rows = {
        {{"a", std::nullopt}, {"red", "red"}},
        {{"b", std::nullopt}, {"green", "green"}},
        {{"c", std::nullopt}, {"red", "red"}},
        {{"d", std::nullopt}, {"amber", "amber"}},
    };
    section.items.push_back(table);

    RenderResult result = render({section}, {}, ReportFormat::latex, dir.path());
    std::string tex = read_text(result.report_file);
    CHECK(count_occurrences(tex, "\\cellcolor{ragred}") == 2);
    CHECK(count_occurrences(tex, "\\cellcolor{ragamber}") == 1);
    CHECK(count_occurrences(tex, "\\cellcolor{raggreen}") == 1);
    CHECK(tex.find("\\begin{document}") != std::string::npos);
}

TEST_CASE("latex special characters are escaped") {
    CHECK(latex_escape("a_b&c%d#e") == "a\\_b\\&c\\%d\\#e");
    CHECK(latex_escape("10%~done") == "10\\%\\textasciitilde{}done");
}

TEST_CASE("re-rendering identical inputs is byte-identical") {
    ReportSection section;
    section.name = "demo";
    section.items.push_back(TextItem{"hello"});
    FigureItem fig;
    fig.spec.kind = ChartKind::timeseries_line;
    fig.spec.name = "demo_series";
    fig.spec.data_source = "tables/demo.csv";
    fig.spec.title = "demo";
    section.items.push_back(fig);
    std::vector<ExportedTable> exports = {tiny_series_export("tables/demo.csv")};

    RenderOptions opts;
    opts.metadata = "fixed";
    TempDir a("render_a"), b("render_b");
    RenderResult ra = render({section}, exports, ReportFormat::markdown, a.path(), opts);
    RenderResult rb = render({section}, exports, ReportFormat::markdown, b.path(), opts);
    REQUIRE(ra.files == rb.files);
    for (const auto& rel : ra.files)
        CHECK(read_text(a.path() / rel) == read_text(b.path() / rel));
}

TEST_CASE("figures referencing unexported data sources are an error") {
    TempDir dir("dangling");
    ReportSection section;
    section.name = "demo";
    FigureItem fig;
    fig.spec.kind = ChartKind::timeseries_line;
    fig.spec.name = "nope";
    fig.spec.data_source = "tables/never_exported.csv";
    section.items.push_back(fig);
    CHECK_THROWS_WITH_AS(render({section}, {}, ReportFormat::markdown, dir.path()),
                         doctest::Contains("missing data source"), std::runtime_error);
}

TEST_CASE("timeseries svg has one polyline vertex per point") {
    TempDir dir("svg_line");
    std::filesystem::create_directories(dir.path() / "tables");
    write_text(dir.path() / "tables" / "s.csv", "timestamp,value\n0,10\n1,30\n2,20\n");
    ChartSpec spec;
    spec.kind = ChartKind::timeseries_line;
    spec.name = "s";
    spec.data_source = "tables/s.csv";
    std::string svg = render_chart_svg(spec, dir.path());

    std::smatch m;
    REQUIRE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
    std::string points = m[1];
    CHECK(count_occurrences(points, ",") == 3);  // one x,y pair per input point
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("burst shading draws exactly one rect per highlight interval") {
    TempDir dir("svg_shade");
    std::filesystem::create_directories(dir.path() / "tables");
    std::string csv = "timestamp,value\n";
    for (int i = 0; i < 100; ++i)
        csv += std::to_string(i) + "," + std::to_string(100 + i % 7) + "\n";
    write_text(dir.path() / "tables" / "s.csv", csv);
    ChartSpec spec;
    spec.kind = ChartKind::timeseries_line;
    spec.name = "s";
    spec.data_source = "tables/s.csv";
    spec.highlight_intervals.push_back({20.0, 35.0});
    std::string svg = render_chart_svg(spec, dir.path());
    CHECK(count_occurrences(svg, "class=\"burst\"") == 1);

    spec.highlight_intervals.push_back({60.0, 70.0});
    svg = render_chart_svg(spec, dir.path());
    CHECK(count_occurrences(svg, "class=\"burst\"") == 2);
}

TEST_CASE("single-category pie renders a full-circle wedge") {
    TempDir dir("svg_pie");
    std::filesystem::create_directories(dir.path() / "tables");
    write_text(dir.path() / "tables" / "p.csv", "label,value\nonly,42\n");
    ChartSpec spec;
    spec.kind = ChartKind::pie;
    spec.name = "p";
    spec.data_source = "tables/p.csv";
    std::string svg = render_chart_svg(spec, dir.path());
    CHECK(svg.find("<circle class=\"wedge\"") != std::string::npos);
    CHECK(count_occurrences(svg, "<path class=\"wedge\"") == 0);

    // Two categories use arc wedges instead.
    write_text(dir.path() / "tables" / "p.csv", "label,value\na,30\nb,70\n");
    svg = render_chart_svg(spec, dir.path());
    CHECK(count_occurrences(svg, "<path class=\"wedge\"") == 2);
}

TEST_CASE("empty data sources render a no-data placeholder, not an error") {
    TempDir dir("svg_empty");
    std::filesystem::create_directories(dir.path() / "tables");
    write_text(dir.path() / "tables" / "e.csv", "timestamp,value\n");
    for (ChartKind kind : {ChartKind::timeseries_line, ChartKind::boxplot, ChartKind::pie,
                           ChartKind::survival_distribution, ChartKind::topology_graph}) {
        ChartSpec spec;
        spec.kind = kind;
        spec.name = "e";
        spec.data_source = "tables/e.csv";
        std::string svg = render_chart_svg(spec, dir.path());
        CHECK(svg.find("no data") != std::string::npos);
    }
}

TEST_CASE("boxplot, survival and topology render structurally") {
    TempDir dir("svg_more");
    std::filesystem::create_directories(dir.path() / "tables");
    write_text(dir.path() / "tables" / "box.csv",
               "label,value\nsrv1,1\nsrv1,2\nsrv1,3\nsrv1,4\nsrv2,10\nsrv2,12\n");
    ChartSpec box;
    box.kind = ChartKind::boxplot;
    box.name = "box";
    box.data_source = "tables/box.csv";
    std::string svg = render_chart_svg(box, dir.path());
    CHECK(count_occurrences(svg, "class=\"box\"") == 2);

    write_text(dir.path() / "tables" / "surv.csv", "v\n1\n2\n3\n4\n5\n");
    ChartSpec surv;
    surv.kind = ChartKind::survival_distribution;
    surv.name = "surv";
    surv.data_source = "tables/surv.csv";
    svg = render_chart_svg(surv, dir.path());
    CHECK(svg.find("polyline") != std::string::npos);

    write_text(dir.path() / "tables" / "topo.csv", "a,b,w\nh1,h2,100\nh2,h3,50\n");
    ChartSpec topo;
    topo.kind = ChartKind::topology_graph;
    topo.name = "topo";
    topo.data_source = "tables/topo.csv";
    svg = render_chart_svg(topo, dir.path());
    CHECK(count_occurrences(svg, "class=\"node\"") == 3);
    CHECK(count_occurrences(svg, "class=\"edge\"") == 2);
}

TEST_CASE("gnuplot companion scripts plot the same data source") {
    ChartSpec spec;
    spec.kind = ChartKind::timeseries_line;
    spec.name = "bps";
    spec.data_source = "tables/bps.csv";
    spec.title = "traffic";
    spec.highlight_intervals.push_back({10.0, 20.0});
    std::string gp = gnuplot_script(spec);
    CHECK(gp.find("tables/bps.csv") != std::string::npos);
    CHECK(gp.find("set object rect") != std::string::npos);

    // And render() writes them when asked.
    TempDir dir("gp");
    ReportSection section;
    section.name = "demo";
    FigureItem fig;
    fig.spec = spec;
    section.items.push_back(fig);
    RenderOptions opts;
    opts.gnuplot_scripts = true;
    RenderResult result =
        render({section}, {tiny_series_export("tables/bps.csv")}, ReportFormat::markdown,
               dir.path(), opts);
    CHECK(std::filesystem::exists(dir.path() / "charts" / "bps.gp"));
    CHECK(std::count(result.files.begin(), result.files.end(), "charts/bps.gp") == 1);
}

TEST_CASE("text render pads columns and marks figures") {
    TempDir dir("txt");
    ReportSection section;
    section.name = "demo";
    TableItem table;
    table.title = "t";
    table.headers = {"name", "n"};
    table.rows = {{{"longish-name", std::nullopt}, {"1", std::nullopt}}};
    section.items.push_back(table);
    RenderResult result = render({section}, {}, ReportFormat::text, dir.path());
    std::string txt = read_text(result.report_file);
    CHECK(txt.find("SECTION: demo") != std::string::npos);
    CHECK(txt.find("longish-name") != std::string::npos);

    // CSV escaping quotes commas.
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
