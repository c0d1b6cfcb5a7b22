#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowrep/burst.hpp"
#include "flowrep/rag.hpp"
#include "flowrep/report.hpp"

namespace flowrep {

enum class SchedulePolicy { sequential, parallel, smart };

const char* schedule_policy_name(SchedulePolicy p);

/// Effective runtime configuration. Every KPI-table threshold and score
/// weight is a key here so any reading of the scoring rules is switchable
/// without a rebuild. File format: flat `dotted.key=value` lines, '#'
/// comments, unknown keys rejected.
struct Config {
    BurstConfig burst;
    RagConfig rag;
    SchedulePolicy schedule = SchedulePolicy::sequential;
    ReportFormat format = ReportFormat::markdown;
    std::vector<std::string> heavy_stages = {"tcp", "bursts"};
    double series_resolution_s = 1.0;
    size_t variability_window_bins = 301;
    CauseScoreMode cause_score = CauseScoreMode::window_max;
    size_t top_n = 10;
    uint64_t row_cap = 50'000'000;
    bool skip_bad_rows = false;
    bool gnuplot_scripts = false;

    static Config defaults() { return Config{}; }
    static Config from_file(const std::filesystem::path& path);
    static Config from_string(const std::string& content);

    /// Re-parsable dump of every key; parse(dump(c)) == c.
    std::string dump() const;

    /// Throws ConfigError when a parameter that must be positive is not.
    void validate() const;

    bool operator==(const Config& other) const { return dump() == other.dump(); }
};

}  // namespace flowrep
