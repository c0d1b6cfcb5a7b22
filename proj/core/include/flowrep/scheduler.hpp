#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowrep/config.hpp"
#include "flowrep/dataset.hpp"
#include "flowrep/report.hpp"
#include "flowrep/stages.hpp"

namespace flowrep {

/// Worker lanes; lanes run concurrently, stages within a lane sequentially.
struct StagePlan {
    SchedulePolicy policy = SchedulePolicy::sequential;
    std::vector<std::vector<std::string>> lanes;
};

/// sequential: one lane in canonical order. parallel: one lane per stage.
/// smart: heavy stages alone in lane 0 (descending expected cost), everything
/// else in lane 1. Throws ConfigError on an empty stage set.
StagePlan build_plan(const std::vector<Stage>& stages, SchedulePolicy policy);

struct StageRunStats {
    struct PerStage {
        std::string stage;
        size_t lane = 0;
        double wall_s = 0.0;
        uint64_t peak_mem_bytes = 0;  // sampled RSS high-water mark while running
        uint64_t rows = 0;
        bool failed = false;
    };
    std::vector<PerStage> stages;
    double makespan_s = 0.0;           // whole plan, launch to merged output
    uint64_t aggregate_peak_bytes = 0;  // process-wide RSS peak over the run
};

struct PlanRun {
    std::vector<ReportSection> sections;   // canonical stage order
    std::vector<ExportedTable> exports;
    StageRunStats stats;
    bool partial_failure = false;  // some stage threw; its section is a placeholder
};

/// Runs every stage under the plan. Stage outputs go to per-stage staging
/// buffers and are merged in canonical order afterward, so the result is
/// byte-identical whatever the policy or completion order. A failing stage
/// is replaced by an error placeholder section; the rest of the plan runs.
PlanRun execute_plan(const StagePlan& plan, const std::vector<Stage>& stages,
                     const Dataset& dataset, const Config& config);

/// schedule_stats.csv: stage, lane, wall_s, peak_mem_bytes, rows — plus
/// plan_makespan / plan_peak_mem summary rows.
void write_schedule_stats_csv(const StageRunStats& stats, const std::filesystem::path& path);

/// Current resident set size of this process, in bytes.
uint64_t current_rss_bytes();

}  // namespace flowrep
