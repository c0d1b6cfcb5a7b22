#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flowrep/op_chain.hpp"
#include "flowrep/timeseries.hpp"

namespace flowrep {

struct BurstConfig {
    double threshold_bps = 100e6;  // detection threshold (100 Mbps default)
    double min_duration_s = 5.0;
    double min_avg_rate_bps = 80e6;  // averaged over the extended interval
    double max_gap_s = 5.0;          // merge sub-threshold gaps shorter than this
};

enum class BurstStatus { accepted, rejected_duration, rejected_avg_rate };

const char* burst_status_name(BurstStatus s);

struct Interval {
    double start = 0.0;
    double end = 0.0;  // exclusive
};

struct CauseScore {
    std::string metric_name;
    double variability_score = 0.0;
};

struct ClientCount {
    std::string client;
    uint64_t connection_count = 0;
};

struct Burst {
    double start = 0.0;
    double end = 0.0;  // exclusive
    double peak_rate = 0.0;
    double mean_rate = 0.0;
    BurstStatus status = BurstStatus::accepted;
    std::vector<Interval> extended_from;  // raw >=threshold runs merged in
    std::vector<CauseScore> root_causes;  // descending score
    std::vector<ClientCount> top_clients;

    double duration() const { return end - start; }
};

/// Threshold/duration heuristic over a 1 s rate series: find maximal
/// >=threshold runs, merge runs across sub-threshold gaps shorter than
/// max_gap, then reject merged intervals that are too short or whose mean
/// rate (gap bins included) is too low. Returns all three classes; accepted
/// bursts are disjoint and sorted by start.
std::vector<Burst> detect_bursts(const TimeSeries& series, const BurstConfig& config);

enum class CauseScoreMode { window_max, window_mean };

struct CauseRanking {
    std::vector<CauseScore> ranked;  // descending, ties by name ascending
    bool no_coverage = false;        // no candidate overlapped the burst
};

/// Scores each candidate metric by its rolling coefficient of variation
/// inside [burst.start, burst.end); the highest-variability metric is the
/// root-cause candidate. Candidates with no bins overlapping the burst are
/// excluded.
CauseRanking rank_root_causes(const Burst& burst,
                              const std::map<std::string, TimeSeries>& candidate_metrics,
                              size_t window_bins,
                              CauseScoreMode mode = CauseScoreMode::window_max);

/// Clients with most connections during the burst: filters TCP records
/// overlapping [start, end), groups by src_ip, counts, keeps the top_n.
std::vector<ClientCount> attribute_clients(const Burst& burst, const Dataset& dataset,
                                           size_t top_n = 10);

/// Same attribution over an already-materialized TCP batch.
std::vector<ClientCount> attribute_clients(const Burst& burst, const RecordBatch& tcp_batch,
                                           size_t top_n = 10);

/// CSV export: start, end, duration, peak, mean, status, top cause, top client.
void write_bursts_csv(const std::vector<Burst>& bursts, const std::filesystem::path& path);

}  // namespace flowrep
