#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowrep/batch.hpp"

namespace flowrep {

// Red-Amber-Green server health scoring. Every trigger threshold and score
// weight lives here so the constants are externally overridable; the
// defaults are the published KPI table values. Scores are recomputable from
// a row's raw KPI values alone via the apply_*_rules functions.

struct PercentKpiRule {
    double trigger_pct = 5.0;      // fires at or above this value
    double score_per_unit = 2.0;   // points per percentage point once fired
};

struct RagTcpConfig {
    PercentKpiRule dupack_s2d;
    PercentKpiRule dupack_d2s;
    PercentKpiRule retx_s2d;
    PercentKpiRule retx_d2s;
    PercentKpiRule zwin_d2s;
    double downtime_inactive_share = 0.90;  // buckets without server data activity
    double downtime_score = 25.0;
    double cet_threshold_s = 0.1;
    double rtt_threshold_s = 1.0;
    uint64_t sustained_buckets = 5;  // consecutive buckets at/above threshold
    double spike_factor = 10.0;      // single bucket vs mean of non-empty buckets
    double cet_score = 50.0;
    double rtt_score = 50.0;
    double score_per_ignored_syn = 0.1;
    double score_per_connection = 0.01;
    uint64_t no_synack_min_syn_records = 1000;  // sentinel: SYNs but never a SYN-ACK
    double no_synack_fixed_score = 10.0;
    double score_per_mbyte = 0.1;  // MByte = 1e6 bytes, both directions
};

struct RagHttpConfig {
    double server_error_trigger_pct = 5.0;
    double server_error_weight = 3.0;  // score = weight * pct * transactions / 100
    double client_error_trigger_pct = 20.0;
    double client_error_weight = 1.0;
    double median_rt_threshold_s = 0.1;
    double median_rt_score = 50.0;
    double mean_rt_threshold_s = 0.5;
    double mean_rt_score = 50.0;
    double score_per_acc_time_pct = 2.0;
    double score_per_transaction = 1.0;
};

struct RagDnsConfig {
    double error_trigger_pct = 5.0;
    double score_per_error_pct = 2.0;
    double median_rt_threshold_ms = 100.0;
    double median_rt_score = 50.0;
    double mean_rt_threshold_ms = 500.0;
    double mean_rt_score = 50.0;
    double score_per_acc_time_pct = 1.0;
    double score_per_transaction = 1.0;
    bool no_response_is_error = false;  // rcode -1: no response seen
};

struct RagConfig {
    RagTcpConfig tcp;
    RagHttpConfig http;
    RagDnsConfig dns;
    double bucket_width_s = 300.0;
};

/// Per-entity bucketed KPIs over the observation span: mean CET/RTT per
/// bucket plus a server-sent-data activity flag. Records land in the bucket
/// holding their ts_start.
struct KpiBucketSeries {
    std::string entity;
    double bucket_width = 300.0;
    double span_start = 0.0;

    struct Bucket {
        double cet_sum = 0.0;
        uint64_t cet_n = 0;
        double rtt_sum = 0.0;
        uint64_t rtt_n = 0;
        bool server_data_activity = false;
    };
    std::vector<Bucket> buckets;

    bool has_cet(size_t i) const { return buckets[i].cet_n > 0; }
    double mean_cet(size_t i) const { return buckets[i].cet_sum / buckets[i].cet_n; }
    bool has_rtt(size_t i) const { return buckets[i].rtt_n > 0; }
    double mean_rtt(size_t i) const { return buckets[i].rtt_sum / buckets[i].rtt_n; }
};

/// Builds buckets for one server from a TCP batch already filtered to
/// dst_ip == server_ip. The span is supplied by the caller so every server
/// shares the same observation frame.
KpiBucketSeries build_kpi_buckets(const std::string& server_ip, const RecordBatch& tcp_batch,
                                  double bucket_width, double span_start, double span_end);

enum class Severity { red, amber, green };

const char* severity_name(Severity s);

struct RagRow {
    std::string entity;  // server ip, or ip:port for HTTP
    Protocol protocol = Protocol::tcp;
    std::map<std::string, double> kpis;  // raw values; booleans stored as 0/1
    std::set<std::string> fired_triggers;
    double score = 0.0;
    Severity severity = Severity::green;
};

// Pure Table-rule evaluators: raw KPI values in, score/triggers/severity out.
// The score_* operations below fill the raw values from batches and then
// call these, so a row is always recomputable.
void apply_tcp_rules(RagRow& row, const RagTcpConfig& cfg);
void apply_http_rules(RagRow& row, const RagHttpConfig& cfg);
void apply_dns_rules(RagRow& row, const RagDnsConfig& cfg);

/// tcp_batch must be filtered to flows whose destination is server_ip.
RagRow score_tcp_server(const std::string& server_ip, const RecordBatch& tcp_batch,
                        const KpiBucketSeries& buckets, const RagTcpConfig& cfg);

/// http_batch must be filtered to server_ip:port. total_response_time_s is
/// the protocol-wide sum used for the accumulated-time share.
RagRow score_http_server(const std::string& server_ip, int64_t port,
                         const RecordBatch& http_batch, double total_response_time_s,
                         const RagHttpConfig& cfg);

RagRow score_dns_server(const std::string& server_ip, const RecordBatch& dns_batch,
                        double total_response_time_ms, const RagDnsConfig& cfg);

/// Sorts by score descending, ties by entity key ascending.
std::vector<RagRow> build_rag_table(std::vector<RagRow> rows);

// Whole-batch conveniences for the report stages: group by server and score
// every entity.
std::vector<RagRow> score_all_tcp_servers(const RecordBatch& tcp_batch, const RagConfig& cfg);
std::vector<RagRow> score_all_http_servers(const RecordBatch& http_batch, const RagConfig& cfg);
std::vector<RagRow> score_all_dns_servers(const RecordBatch& dns_batch, const RagConfig& cfg);

void write_rag_csv(const std::vector<RagRow>& rows, const std::filesystem::path& path);

}  // namespace flowrep
