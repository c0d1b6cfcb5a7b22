// flowrep: turns enriched flow-record datasets into traffic reports.
//
//   flowrep report <dataset>  full analysis report (markdown/latex/text)
//   flowrep synth  <spec>     deterministic synthetic dataset generator
//   flowrep bench  <dataset>  record-parsing throughput table
//
// Exit codes: 0 success, 1 fatal error, 2 report finished with failed sections.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "flowrep/config.hpp"
#include "flowrep/dataset.hpp"
#include "flowrep/report.hpp"
#include "flowrep/scheduler.hpp"
#include "flowrep/stages.hpp"
#include "flowrep/synth.hpp"
#include "flowrep/text.hpp"

namespace {

using namespace flowrep;

std::string utc_now() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

struct ReportArgs {
    std::string dataset;
    std::string out_dir = "report_out";
    std::string config_path;
    std::string schedule;
    std::string format;
    bool skip_bad_rows = false;
    double burst_threshold = 0.0;
};

Config load_config(const ReportArgs& args) {
    Config cfg = args.config_path.empty() ? Config::defaults()
                                          : Config::from_file(args.config_path);
    if (!args.schedule.empty()) {
        if (args.schedule == "sequential") cfg.schedule = SchedulePolicy::sequential;
        else if (args.schedule == "parallel") cfg.schedule = SchedulePolicy::parallel;
        else if (args.schedule == "smart") cfg.schedule = SchedulePolicy::smart;
        else throw ConfigError("--schedule: expected sequential, parallel or smart");
    }
    if (!args.format.empty()) {
        if (args.format == "markdown") cfg.format = ReportFormat::markdown;
        else if (args.format == "latex") cfg.format = ReportFormat::latex;
        else if (args.format == "text") cfg.format = ReportFormat::text;
        else throw ConfigError("--format: expected markdown, latex or text");
    }
    if (args.skip_bad_rows) cfg.skip_bad_rows = true;
    if (args.burst_threshold > 0) cfg.burst.threshold_bps = args.burst_threshold;
    cfg.validate();
    return cfg;
}

int cmd_report(const ReportArgs& args) {
    Config cfg = load_config(args);

    DatasetOptions opts;
    opts.skip_bad_rows = cfg.skip_bad_rows;
    opts.row_cap = cfg.row_cap;
    Dataset dataset = Dataset::open(args.dataset, opts);  // fatal before any output exists

    std::vector<Stage> stages = default_stages(cfg);
    StagePlan plan = build_plan(stages, cfg.schedule);
    PlanRun run = execute_plan(plan, stages, dataset, cfg);

    std::filesystem::path out_dir(args.out_dir);
    std::filesystem::create_directories(out_dir);
    write_schedule_stats_csv(run.stats, out_dir / "schedule_stats.csv");

    RenderOptions render_opts;
    render_opts.metadata = utc_now() + " schedule=" +
                           schedule_policy_name(cfg.schedule) + " dataset=" + args.dataset;
    render_opts.gnuplot_scripts = cfg.gnuplot_scripts;
    RenderResult rendered = render(run.sections, run.exports, cfg.format, out_dir, render_opts);

    if (cfg.format == ReportFormat::text) {
        std::ifstream in(rendered.report_file);
        std::cout << in.rdbuf();
    }
    std::fprintf(stderr, "report written to %s (%zu files, makespan %.2fs, peak rss %.1f MB)\n",
                 out_dir.string().c_str(), rendered.files.size() + 1, run.stats.makespan_s,
                 static_cast<double>(run.stats.aggregate_peak_bytes) / 1e6);
    if (run.partial_failure) {
        std::fprintf(stderr, "warning: some sections failed, see report body\n");
        return 2;
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    ScenarioSpec spec = ScenarioSpec::from_json_file(spec_path);
    GenerateResult result = generate(spec, out_dir);
    std::fprintf(stderr, "wrote %llu records to %s (%zu planted anomalies)\n",
                 static_cast<unsigned long long>(result.total_rows), out_dir.c_str(),
                 result.anomalies.size());
    return 0;
}

int cmd_bench(const std::string& dataset_path, bool skip_bad_rows) {
    DatasetOptions opts;
    opts.skip_bad_rows = skip_bad_rows;
    Dataset dataset = Dataset::open(dataset_path, opts);

    std::printf("%-8s %12s %14s %10s %14s %10s\n", "protocol", "rows", "bytes", "seconds",
                "rows/s", "MB/s");
    for (const auto& [proto, file] : dataset.manifest()) {
        ScanStats stats = dataset.scan_stats(proto);
        std::printf("%-8s %12llu %14llu %10.3f %14.0f %10.1f\n", protocol_name(proto),
                    static_cast<unsigned long long>(stats.row_count),
                    static_cast<unsigned long long>(stats.byte_count), stats.seconds,
                    stats.rows_per_second,
                    stats.seconds > 0 ? static_cast<double>(stats.byte_count) / 1e6 /
                                            stats.seconds
                                      : 0.0);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"automatic traffic report generation from enriched flow records"};
    app.require_subcommand(1);

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "analyze a dataset and render the report");
    report_cmd->add_option("dataset", report_args.dataset, "dataset directory")->required();
    report_cmd->add_option("--out", report_args.out_dir, "output directory");
    report_cmd->add_option("--config", report_args.config_path, "configuration file");
    report_cmd->add_option("--schedule", report_args.schedule,
                           "stage scheduling: sequential|parallel|smart");
    report_cmd->add_option("--format", report_args.format, "markdown|latex|text");
    report_cmd->add_flag("--skip-bad-rows", report_args.skip_bad_rows,
                         "count malformed rows instead of failing");
    report_cmd->add_option("--burst-threshold", report_args.burst_threshold,
                           "burst detection threshold, bits/s");

    std::string synth_spec, synth_out = "synth_out";
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("spec", synth_spec, "scenario spec (JSON)")->required();
    synth_cmd->add_option("--out", synth_out, "output directory");

    std::string bench_dataset;
    bool bench_skip = false;
    auto* bench_cmd = app.add_subcommand("bench", "measure record-parsing throughput");
    bench_cmd->add_option("dataset", bench_dataset, "dataset directory")->required();
    bench_cmd->add_flag("--skip-bad-rows", bench_skip);

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_cmd->parsed()) return cmd_report(report_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_spec, synth_out);
        if (bench_cmd->parsed()) return cmd_bench(bench_dataset, bench_skip);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
