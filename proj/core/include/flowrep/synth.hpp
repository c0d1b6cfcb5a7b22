#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flowrep/timeseries.hpp"

namespace flowrep {

// Deterministic synthetic dataset generator. Identical seed + spec produce
// byte-identical record files, and every planted anomaly is echoed into
// truth.json so tests can cross-check what the analysis modules recover.

struct PlantedBurst {
    std::string cause;  // connection_count | bytes_per_connection | udp_flows
    double start_s = 0.0;  // relative to start_epoch
    double end_s = 0.0;
    double magnitude_bps = 200e6;  // rate added on top of the baseline
};

struct SickTcpServer {
    // retx_s2d | retx_d2s | dupack_s2d | dupack_d2s | zwin_d2s get level_pct
    // per connection; cet | rtt plant a sustained level_value seconds.
    std::string kpi = "retx_s2d";
    double level = 8.0;
};

struct SlowHttpServer {
    double median_rt_s = 0.25;
};

struct DnsErrorServer {
    double error_pct = 12.0;
};

struct ScenarioSpec {
    uint64_t seed = 1;
    double duration_s = 600.0;
    double start_epoch = 1600000000.0;
    std::map<std::string, double> rates = {
        {"tcp", 40}, {"udp", 20}, {"http", 25}, {"dns", 12}, {"icmp", 1}};
    int clients = 40;
    int servers = 8;
    std::vector<PlantedBurst> bursts;
    std::vector<SickTcpServer> sick_tcp;
    std::vector<SlowHttpServer> slow_http;
    std::vector<DnsErrorServer> dns_errors;
    bool gzip = false;

    static ScenarioSpec from_json_file(const std::filesystem::path& path);
    static ScenarioSpec from_json(const std::string& content);

    /// Throws std::invalid_argument naming the offending field.
    void validate_or_throw() const;
};

struct PlantedAnomalyInfo {
    std::string kind;    // burst | sick_tcp_server | slow_http_server | dns_error_server
    std::string entity;  // assigned server (or empty for bursts)
    std::string detail;  // cause or kpi
    double start = 0.0;  // epoch seconds, bursts only
    double end = 0.0;
    double level = 0.0;  // magnitude_bps / level / median_rt_s / error_pct
};

struct GenerateResult {
    std::vector<PlantedAnomalyInfo> anomalies;
    uint64_t total_rows = 0;
};

/// Writes <protocol>.records files plus truth.json under out_dir.
GenerateResult generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

/// Desk-scale in-memory scenario for root-cause ranking trials: a bits/s
/// series with one planted burst whose surge is mirrored in exactly one of
/// the candidate metric series.
struct CauseScenario {
    TimeSeries bps;
    std::map<std::string, TimeSeries> candidates;
    std::string planted_metric;
    double burst_start = 0.0;
    double burst_end = 0.0;
};

CauseScenario make_cause_scenario(uint64_t seed);

/// Deterministic portable RNG (splitmix64 core) used by the generator.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }
    double exponential(double mean);
    double normal(double mu, double sigma);
    double lognormal(double median, double sigma);

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace flowrep
