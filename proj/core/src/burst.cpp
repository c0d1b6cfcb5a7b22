#include "flowrep/burst.hpp"

#include <algorithm>
#include <fstream>

#include "flowrep/text.hpp"

namespace flowrep {

const char* burst_status_name(BurstStatus s) {
    switch (s) {
        case BurstStatus::accepted: return "accepted";
        case BurstStatus::rejected_duration: return "rejected_duration";
        case BurstStatus::rejected_avg_rate: return "rejected_avg_rate";
    }
    return "?";
}

std::vector<Burst> detect_bursts(const TimeSeries& series, const BurstConfig& config) {
    std::vector<Burst> out;
    size_t n = series.values.size();
    if (n == 0) return out;
    double res = series.resolution;

    // 1. Maximal runs of bins at or above the threshold.
    struct Run { size_t first; size_t last; };  // inclusive bin indices
    std::vector<Run> runs;
    for (size_t i = 0; i < n; ++i) {
        if (series.values[i] < config.threshold_bps) continue;
        if (!runs.empty() && runs.back().last + 1 == i)
            runs.back().last = i;
        else
            runs.push_back({i, i});
    }

    // 2. Merge consecutive runs whose sub-threshold gap is shorter than
    //    max_gap; these are the extended bursts.
    struct Merged { size_t first; size_t last; std::vector<Interval> parts; };
    std::vector<Merged> merged;
    for (const Run& r : runs) {
        Interval part{series.bin_start(r.first),
                      series.bin_start(r.last) + res};
        if (!merged.empty()) {
            double gap = static_cast<double>(r.first - merged.back().last - 1) * res;
            if (gap < config.max_gap_s) {
                merged.back().last = r.last;
                merged.back().parts.push_back(part);
                continue;
            }
        }
        merged.push_back({r.first, r.last, {part}});
    }

    // 3. Classify each merged interval; the mean includes gap bins.
    for (const Merged& m : merged) {
        Burst b;
        b.start = series.bin_start(m.first);
        b.end = series.bin_start(m.last) + res;
        b.extended_from = m.parts;
        double sum = 0.0, peak = 0.0;
        for (size_t i = m.first; i <= m.last; ++i) {
            sum += series.values[i];
            peak = std::max(peak, series.values[i]);
        }
        b.peak_rate = peak;
        b.mean_rate = sum / static_cast<double>(m.last - m.first + 1);
        if (b.duration() < config.min_duration_s)
            b.status = BurstStatus::rejected_duration;
        else if (b.mean_rate < config.min_avg_rate_bps)
            b.status = BurstStatus::rejected_avg_rate;
        else
            b.status = BurstStatus::accepted;
        out.push_back(std::move(b));
    }
    return out;
}

CauseRanking rank_root_causes(const Burst& burst,
                              const std::map<std::string, TimeSeries>& candidate_metrics,
                              size_t window_bins, CauseScoreMode mode) {
    CauseRanking result;
    for (const auto& [name, series] : candidate_metrics) {
        if (series.empty()) continue;
        TimeSeries cv = rolling_variability(series, window_bins);
        double best = 0.0, sum = 0.0;
        size_t covered = 0;
        for (size_t i = 0; i < cv.values.size(); ++i) {
            double bin_lo = cv.bin_start(i);
            double bin_hi = bin_lo + cv.resolution;
            if (bin_hi <= burst.start || bin_lo >= burst.end) continue;
            best = std::max(best, cv.values[i]);
            sum += cv.values[i];
            ++covered;
        }
        if (covered == 0) continue;  // candidate does not cover the interval
        double score = mode == CauseScoreMode::window_max
                           ? best
                           : sum / static_cast<double>(covered);
        result.ranked.push_back({name, score});
    }
    if (result.ranked.empty()) {
        result.no_coverage = true;
        return result;
    }
    std::sort(result.ranked.begin(), result.ranked.end(),
              [](const CauseScore& a, const CauseScore& b) {
                  if (a.variability_score != b.variability_score)
                      return a.variability_score > b.variability_score;
                  return a.metric_name < b.metric_name;
              });
    return result;
}

std::vector<ClientCount> attribute_clients(const Burst& burst, const Dataset& dataset,
                                           size_t top_n) {
    if (!dataset.has(Protocol::tcp)) return {};
    // Overlap with [start, end): the flow must begin before the burst ends
    // and not finish before it starts.
    OpChain chain(dataset, Protocol::tcp);
    chain.filter({Predicate::num("ts_start", Cmp::lt, burst.end),
                  Predicate::num("ts_end", Cmp::ge, burst.start)})
        .group_aggregate({"src_ip"}, {{AggKind::count, ""}})
        .top_n("count", top_n, true);
    const RecordBatch& batch = chain.materialize();

    std::vector<ClientCount> out;
    const Column& ip = batch.at("src_ip");
    const Column& count = batch.at("count");
    for (size_t r = 0; r < batch.rows; ++r)
        out.push_back({std::string(ip.as_text(r)), static_cast<uint64_t>(count.as_i64(r))});
    return out;
}

std::vector<ClientCount> attribute_clients(const Burst& burst, const RecordBatch& tcp_batch,
                                           size_t top_n) {
    if (tcp_batch.rows == 0) return {};
    const Column& ts_start = tcp_batch.at("ts_start");
    const Column& ts_end = tcp_batch.at("ts_end");
    const Column& src = tcp_batch.at("src_ip");
    std::map<std::string, uint64_t> counts;
    for (size_t r = 0; r < tcp_batch.rows; ++r) {
        if (!ts_start.is_present(r) || !ts_end.is_present(r) || !src.is_present(r)) continue;
        if (ts_start.as_f64(r) < burst.end && ts_end.as_f64(r) >= burst.start)
            ++counts[std::string(src.as_text(r))];
    }
    std::vector<ClientCount> out;
    for (const auto& [client, n] : counts) out.push_back({client, n});
    std::sort(out.begin(), out.end(), [](const ClientCount& a, const ClientCount& b) {
        if (a.connection_count != b.connection_count)
            return a.connection_count > b.connection_count;
        return a.client < b.client;
    });
    if (out.size() > top_n) out.resize(top_n);
    return out;
}

void write_bursts_csv(const std::vector<Burst>& bursts, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "start,end,duration_s,peak_bps,mean_bps,status,top_cause,top_client\n";
    for (const Burst& b : bursts) {
        out << format_fixed(b.start, 3) << ',' << format_fixed(b.end, 3) << ','
            << format_fixed(b.duration(), 3) << ',' << format_f64(b.peak_rate) << ','
            << format_f64(b.mean_rate) << ',' << burst_status_name(b.status) << ','
            << (b.root_causes.empty() ? "" : b.root_causes.front().metric_name) << ','
            << (b.top_clients.empty() ? "" : b.top_clients.front().client) << '\n';
    }
}

}  // namespace flowrep
