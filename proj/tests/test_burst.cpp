#include <cmath>
#include <random>

#include "doctest.h"
#include "flowrep/burst.hpp"
#include "flowrep/records.hpp"
#include "flowrep/text.hpp"
#include "flowrep/writer.hpp"
#include "helpers.hpp"

using namespace flowrep;

namespace {

TimeSeries mbps_series(std::vector<double> mbps, double t0 = 0) {
    TimeSeries s;
    s.t0 = t0;
    s.resolution = 1.0;
    s.unit = "bits/s";
    for (double v : mbps) s.values.push_back(v * 1e6);
    return s;
}

/// Exhaustive interval-scan oracle: an independent implementation of the
/// same three rules (threshold runs, gap merge, duration/avg rejection).
std::vector<Burst> oracle_bursts(const TimeSeries& s, const BurstConfig& cfg) {
    size_t n = s.values.size();
    double res = s.resolution;
    std::vector<int> above(n, 0);
    for (size_t i = 0; i < n; ++i) above[i] = s.values[i] >= cfg.threshold_bps ? 1 : 0;

    // Collect runs by explicit boundary scanning.
    std::vector<std::pair<size_t, size_t>> runs;  // [first, last]
    for (size_t i = 0; i < n; ++i) {
        if (!above[i]) continue;
        if (i == 0 || !above[i - 1]) runs.emplace_back(i, i);
        runs.back().second = i;
    }

    // Merge to a fixpoint, one pair at a time.
    std::vector<std::vector<std::pair<size_t, size_t>>> merged;
    for (const auto& run : runs) {
        if (!merged.empty()) {
            size_t prev_last = merged.back().back().second;
            double gap = static_cast<double>(run.first - prev_last - 1) * res;
            if (gap < cfg.max_gap_s) {
                merged.back().push_back(run);
                continue;
            }
        }
        merged.push_back({run});
    }

    std::vector<Burst> out;
    for (const auto& parts : merged) {
        Burst b;
        size_t first = parts.front().first;
        size_t last = parts.back().second;
        b.start = s.t0 + static_cast<double>(first) * res;
        b.end = s.t0 + static_cast<double>(last + 1) * res;
        for (const auto& p : parts)
            b.extended_from.push_back({s.t0 + static_cast<double>(p.first) * res,
                                       s.t0 + static_cast<double>(p.second + 1) * res});
        double sum = 0, peak = 0;
        for (size_t i = first; i <= last; ++i) {
            sum += s.values[i];
            peak = std::max(peak, s.values[i]);
        }
        b.peak_rate = peak;
        b.mean_rate = sum / static_cast<double>(last - first + 1);
        if ((b.end - b.start) < cfg.min_duration_s)
            b.status = BurstStatus::rejected_duration;
        else if (b.mean_rate < cfg.min_avg_rate_bps)
            b.status = BurstStatus::rejected_avg_rate;
        else
            b.status = BurstStatus::accepted;
        out.push_back(std::move(b));
    }
    return out;
}

bool bursts_equal(const std::vector<Burst>& a, const std::vector<Burst>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].start != b[i].start || a[i].end != b[i].end) return false;
        if (a[i].status != b[i].status) return false;
        if (std::abs(a[i].mean_rate - b[i].mean_rate) > 1e-6) return false;
        if (a[i].peak_rate != b[i].peak_rate) return false;
        if (a[i].extended_from.size() != b[i].extended_from.size()) return false;
        for (size_t j = 0; j < a[i].extended_from.size(); ++j)
            if (a[i].extended_from[j].start != b[i].extended_from[j].start ||
                a[i].extended_from[j].end != b[i].extended_from[j].end)
                return false;
    }
    return true;
}

}  // namespace

TEST_CASE("detect_bursts finds one accepted burst in the worked example") {
    BurstConfig cfg;
    cfg.threshold_bps = 100e6;
    cfg.min_duration_s = 2;
    cfg.max_gap_s = 1;
    cfg.min_avg_rate_bps = 100e6;
    TimeSeries s = mbps_series({0, 0, 200, 200, 200, 0, 0});
    auto bursts = detect_bursts(s, cfg);
    std::vector<Burst> accepted;
    for (const auto& b : bursts)
        if (b.status == BurstStatus::accepted) accepted.push_back(b);
    REQUIRE(accepted.size() == 1);
    CHECK(accepted[0].start == 2.0);
    CHECK(accepted[0].end == 5.0);
    CHECK(accepted[0].mean_rate == doctest::Approx(200e6));
    CHECK(accepted[0].peak_rate == doctest::Approx(200e6));
}

TEST_CASE("detect_bursts merges runs across short gaps into extended bursts") {
    BurstConfig cfg;
    cfg.threshold_bps = 100e6;
    cfg.min_duration_s = 2;
    cfg.max_gap_s = 2;
    cfg.min_avg_rate_bps = 100e6;
    TimeSeries s = mbps_series({200, 0, 200});
    auto bursts = detect_bursts(s, cfg);
    REQUIRE(bursts.size() == 1);
    CHECK(bursts[0].start == 0.0);
    CHECK(bursts[0].end == 3.0);
    REQUIRE(bursts[0].extended_from.size() == 2);
    CHECK(bursts[0].extended_from[0].start == 0.0);
    CHECK(bursts[0].extended_from[0].end == 1.0);
    CHECK(bursts[0].extended_from[1].start == 2.0);
    CHECK(bursts[0].extended_from[1].end == 3.0);
    CHECK(bursts[0].status == BurstStatus::accepted);  // mean 133 Mbps over merged interval
}

TEST_CASE("a series entirely below threshold yields no bursts") {
    BurstConfig cfg;
    auto bursts = detect_bursts(mbps_series({1, 2, 3, 4}), cfg);
    CHECK(bursts.empty());
    CHECK(detect_bursts(TimeSeries{}, cfg).empty());
}

TEST_CASE("rejection reasons distinguish duration from average rate") {
    BurstConfig cfg;
    cfg.threshold_bps = 100e6;
    cfg.min_duration_s = 3;
    cfg.max_gap_s = 5;
    cfg.min_avg_rate_bps = 150e6;
    // One short spike, and one long interval dragged down by merged gap bins.
    TimeSeries s = mbps_series({200, 0, 0, 0, 0, 0, 160, 0, 0, 160, 0});
    auto bursts = detect_bursts(s, cfg);
    REQUIRE(bursts.size() == 2);
    CHECK(bursts[0].status == BurstStatus::rejected_duration);
    CHECK(bursts[1].status == BurstStatus::rejected_avg_rate);
    CHECK(bursts[1].start == 6.0);
    CHECK(bursts[1].end == 10.0);
}

TEST_CASE("detect_bursts equals the exhaustive oracle on random series") {
    std::mt19937_64 rng(20240813);
    for (int trial = 0; trial < 60; ++trial) {
        size_t n = 200 + rng() % 400;
        TimeSeries s;
        s.t0 = static_cast<double>(rng() % 1000000);
        s.resolution = 1.0;
        double level = 0;
        for (size_t i = 0; i < n; ++i) {
            // Random walk with jumps crossing the threshold region.
            if (rng() % 9 == 0) level = static_cast<double>(rng() % 220);
            s.values.push_back(std::max(0.0, level * 1e6));
        }
        BurstConfig cfg;
        cfg.threshold_bps = static_cast<double>(60 + rng() % 100) * 1e6;
        cfg.min_duration_s = static_cast<double>(1 + rng() % 20);
        cfg.max_gap_s = static_cast<double>(1 + rng() % 8);
        cfg.min_avg_rate_bps = cfg.threshold_bps * (0.5 + 0.01 * static_cast<double>(rng() % 60));

        auto got = detect_bursts(s, cfg);
        auto expect = oracle_bursts(s, cfg);
        CHECK(bursts_equal(got, expect));
    }
}

TEST_CASE("accepted bursts are disjoint, sorted, and re-satisfy their predicate") {
    std::mt19937_64 rng(4711);
    TimeSeries s;
    s.t0 = 0;
    s.resolution = 1.0;
    for (int i = 0; i < 600; ++i)
        s.values.push_back(static_cast<double>(rng() % 200) * 1e6);
    BurstConfig cfg;
    cfg.threshold_bps = 120e6;
    cfg.min_duration_s = 4;
    cfg.max_gap_s = 3;
    cfg.min_avg_rate_bps = 110e6;

    auto bursts = detect_bursts(s, cfg);
    double prev_end = -1;
    for (const auto& b : bursts) {
        if (b.status != BurstStatus::accepted) continue;
        CHECK(b.start > prev_end);
        prev_end = b.end;
        CHECK(b.duration() >= cfg.min_duration_s);
        // Recompute the mean from the raw series.
        double sum = 0;
        size_t count = 0;
        for (size_t i = 0; i < s.values.size(); ++i) {
            double t = s.bin_start(i);
            if (t >= b.start && t < b.end) {
                sum += s.values[i];
                ++count;
            }
        }
        CHECK(sum / static_cast<double>(count) == doctest::Approx(b.mean_rate));
        CHECK(b.mean_rate >= cfg.min_avg_rate_bps);
    }
}

TEST_CASE("raising the threshold never covers more at-threshold bins") {
    std::mt19937_64 rng(31337);
    TimeSeries s;
    s.t0 = 0;
    s.resolution = 1.0;
    for (int i = 0; i < 800; ++i)
        s.values.push_back(static_cast<double>(rng() % 250) * 1e6);
    BurstConfig cfg;
    cfg.min_duration_s = 5;
    cfg.max_gap_s = 4;

    size_t prev_covered = SIZE_MAX;
    for (double threshold = 50e6; threshold <= 250e6; threshold += 25e6) {
        cfg.threshold_bps = threshold;
        cfg.min_avg_rate_bps = threshold;
        auto bursts = detect_bursts(s, cfg);
        size_t covered = 0;
        for (const auto& b : bursts) {
            if (b.status != BurstStatus::accepted) continue;
            for (size_t i = 0; i < s.values.size(); ++i) {
                double t = s.bin_start(i);
                if (t >= b.start && t < b.end && s.values[i] >= threshold) ++covered;
            }
        }
        CHECK(covered <= prev_covered);
        prev_covered = covered;
    }
}

TEST_CASE("detection is deterministic") {
    std::mt19937_64 rng(2);
    TimeSeries s;
    s.t0 = 100;
    s.resolution = 1.0;
    for (int i = 0; i < 500; ++i) s.values.push_back(static_cast<double>(rng() % 300) * 1e6);
    BurstConfig cfg;
    auto a = detect_bursts(s, cfg);
    auto b = detect_bursts(s, cfg);
    CHECK(bursts_equal(a, b));
}

TEST_CASE("rank_root_causes prefers the varying metric") {
    Burst burst;
    burst.start = 10;
    burst.end = 20;
    std::map<std::string, TimeSeries> candidates;
    TimeSeries flat, step;
    flat.resolution = step.resolution = 1.0;
    for (int i = 0; i < 30; ++i) {
        flat.values.push_back(50.0);
        step.values.push_back(i >= 12 && i < 18 ? 100.0 : 10.0);
    }
    candidates["flat_metric"] = flat;
    candidates["steppy_metric"] = step;
    auto ranking = rank_root_causes(burst, candidates, 5);
    REQUIRE(ranking.ranked.size() == 2);
    CHECK(ranking.ranked[0].metric_name == "steppy_metric");
    CHECK_FALSE(ranking.no_coverage);
    CHECK(ranking.ranked[0].variability_score > ranking.ranked[1].variability_score);
}

TEST_CASE("identical metrics tie-break lexicographically") {
    Burst burst;
    burst.start = 0;
    burst.end = 10;
    TimeSeries wobble;
    wobble.resolution = 1.0;
    for (int i = 0; i < 10; ++i) wobble.values.push_back(i % 2 ? 10.0 : 30.0);
    std::map<std::string, TimeSeries> candidates;
    candidates["zeta"] = wobble;
    candidates["alpha"] = wobble;
    auto ranking = rank_root_causes(burst, candidates, 3);
    REQUIRE(ranking.ranked.size() == 2);
    CHECK(ranking.ranked[0].metric_name == "alpha");
    CHECK(ranking.ranked[0].variability_score == ranking.ranked[1].variability_score);
}

TEST_CASE("no covering candidate yields an empty ranking with a warning flag") {
    Burst burst;
    burst.start = 1000;
    burst.end = 1010;
    TimeSeries far;
    far.t0 = 0;
    far.resolution = 1.0;
    far.values.assign(10, 5.0);  // covers [0,10) only
    std::map<std::string, TimeSeries> candidates{{"far", far}};
    auto ranking = rank_root_causes(burst, candidates, 3);
    CHECK(ranking.ranked.empty());
    CHECK(ranking.no_coverage);
}

TEST_CASE("attribute_clients counts overlapping flows per client") {
    testutil::TempDir dir("clients");
    {
        RecordFileWriter w(dir.path() / "tcp.records", mandatory_columns(Protocol::tcp));
        auto flow = [&](double s, double e, const std::string& client) {
            TcpRecord r;
            r.ts_start = s;
            r.ts_end = e;
            r.src_ip = client;
            r.dst_ip = "192.168.1.1";
            r.src_port = 30000;
            r.dst_port = 80;
            r.pkts_s2d = r.pkts_d2s = 5;
            r.bytes_s2d = r.bytes_d2s = 100;
            r.data_pkts_s2d = r.data_pkts_d2s = 3;
            r.syn_count = r.synack_count = 1;
            w.write_row(to_fields(r));
        };
        flow(10, 20, "X");
        flow(14, 16, "X");
        flow(19, 30, "X");   // overlaps the tail
        flow(15, 18, "Y");
        flow(25, 30, "Z");   // outside [10,20)
        flow(1, 9.5, "Z");   // ends before the burst
    }
    Dataset ds = Dataset::open(dir.path());
    Burst burst;
    burst.start = 10;
    burst.end = 20;
    auto clients = attribute_clients(burst, ds, 10);
    REQUIRE(clients.size() == 2);
    CHECK(clients[0].client == "X");
    CHECK(clients[0].connection_count == 3);
    CHECK(clients[1].client == "Y");
    CHECK(clients[1].connection_count == 1);

    Burst nothing;
    nothing.start = 5000;
    nothing.end = 5001;
    CHECK(attribute_clients(nothing, ds, 10).empty());
}

TEST_CASE("attribute_clients matches a naive overlap-filter oracle on random flows") {
    testutil::TempDir dir("clients_rand");
    std::mt19937_64 rng(606);
    struct Flow { double s, e; std::string client; };
    std::vector<Flow> flows;
    {
        RecordFileWriter w(dir.path() / "tcp.records", mandatory_columns(Protocol::tcp));
        for (int i = 0; i < 1000; ++i) {
            Flow f;
            f.s = static_cast<double>(rng() % 1000);
            f.e = f.s + static_cast<double>(rng() % 50);
            f.client = "10.0.0." + format_i64(static_cast<int64_t>(rng() % 30));
            flows.push_back(f);
            TcpRecord r;
            r.ts_start = f.s;
            r.ts_end = f.e;
            r.src_ip = f.client;
            r.dst_ip = "192.168.1.1";
            r.src_port = 30000;
            r.dst_port = 80;
            r.pkts_s2d = r.pkts_d2s = 5;
            r.bytes_s2d = r.bytes_d2s = 100;
            r.data_pkts_s2d = r.data_pkts_d2s = 3;
            r.syn_count = r.synack_count = 1;
            w.write_row(to_fields(r));
        }
    }
    Dataset ds = Dataset::open(dir.path());
    Burst burst;
    burst.start = 400;
    burst.end = 500;

    std::map<std::string, uint64_t> oracle;
    for (const auto& f : flows)
        if (f.s < burst.end && f.e >= burst.start) ++oracle[f.client];
    std::vector<std::pair<std::string, uint64_t>> expect(oracle.begin(), oracle.end());
    std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (expect.size() > 10) expect.resize(10);

    auto got = attribute_clients(burst, ds, 10);
    REQUIRE(got.size() == expect.size());
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].client == expect[i].first);
        CHECK(got[i].connection_count == expect[i].second);
    }
}

TEST_CASE("burst CSV export carries the contract columns") {
    testutil::TempDir dir("burstcsv");
    Burst b;
    b.start = 100;
    b.end = 160;
    b.peak_rate = 2.5e8;
    b.mean_rate = 2.0e8;
    b.status = BurstStatus::accepted;
    b.root_causes.push_back({"tcp_connections", 1.5});
    b.top_clients.push_back({"10.0.0.5", 42});
    write_bursts_csv({b}, dir.path() / "bursts.csv");
    std::string csv = testutil::read_text(dir.path() / "bursts.csv");
    CHECK(csv.find("start,end,duration_s,peak_bps,mean_bps,status,top_cause,top_client") !=
          std::string::npos);
    CHECK(csv.find("accepted") != std::string::npos);
    CHECK(csv.find("tcp_connections") != std::string::npos);
    CHECK(csv.find("10.0.0.5") != std::string::npos);
}
