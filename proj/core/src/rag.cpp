#include "flowrep/rag.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "flowrep/text.hpp"

namespace flowrep {

namespace {

double kpi(const RagRow& row, const std::string& name, double fallback = 0.0) {
    auto it = row.kpis.find(name);
    return it == row.kpis.end() ? fallback : it->second;
}

bool has_kpi(const RagRow& row, const std::string& name) { return row.kpis.count(name) > 0; }

double median_of(std::vector<double> xs) {
    size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    double lo = *std::max_element(xs.begin(), xs.begin() + mid);
    return (lo + hi) / 2.0;
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

/// Average of per-connection percentages 100*count/pkts; connections with no
/// packets in the direction are excluded (the ratio is undefined there).
double per_connection_pct(const Column& counts, const Column& pkts, size_t rows) {
    double sum = 0.0;
    uint64_t n = 0;
    for (size_t r = 0; r < rows; ++r) {
        if (!pkts.is_present(r) || !counts.is_present(r)) continue;
        double p = pkts.as_f64(r);
        if (p <= 0) continue;
        sum += 100.0 * counts.as_f64(r) / p;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

/// Trigger over bucket means: at/above threshold in `sustained` consecutive
/// non-empty buckets (an empty bucket breaks the run), or any single bucket
/// at/above spike_factor times the mean of non-empty buckets.
struct BucketTrigger {
    bool sustained = false;
    bool spike = false;
};

template <typename HasFn, typename MeanFn>
BucketTrigger evaluate_buckets(const KpiBucketSeries& b, HasFn has, MeanFn mean,
                               double threshold, uint64_t sustained, double spike_factor) {
    BucketTrigger t;
    uint64_t run = 0;
    double total = 0.0;
    uint64_t n = 0;
    for (size_t i = 0; i < b.buckets.size(); ++i) {
        if (!has(i)) {
            run = 0;
            continue;
        }
        double v = mean(i);
        total += v;
        ++n;
        run = v >= threshold ? run + 1 : 0;
        if (sustained > 0 && run >= sustained) t.sustained = true;
    }
    if (n > 0) {
        double overall = total / static_cast<double>(n);
        if (overall > 0) {
            for (size_t i = 0; i < b.buckets.size(); ++i)
                if (has(i) && mean(i) >= spike_factor * overall) t.spike = true;
        }
    }
    return t;
}

}  // namespace

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::red: return "red";
        case Severity::amber: return "amber";
        case Severity::green: return "green";
    }
    return "?";
}

KpiBucketSeries build_kpi_buckets(const std::string& server_ip, const RecordBatch& tcp_batch,
                                  double bucket_width, double span_start, double span_end) {
    KpiBucketSeries out;
    out.entity = server_ip;
    out.bucket_width = bucket_width;
    out.span_start = span_start;
    if (span_end <= span_start || bucket_width <= 0) return out;
    auto n = static_cast<size_t>(std::ceil((span_end - span_start) / bucket_width));
    out.buckets.resize(n);

    if (tcp_batch.rows == 0) return out;
    const Column& ts = tcp_batch.at("ts_start");
    const Column& cet = tcp_batch.at("cet_s");
    const Column& rtt = tcp_batch.at("rtt_s");
    const Column& data_d2s = tcp_batch.at("data_pkts_d2s");
    for (size_t r = 0; r < tcp_batch.rows; ++r) {
        if (!ts.is_present(r)) continue;
        double off = (ts.as_f64(r) - span_start) / bucket_width;
        if (off < 0) continue;
        auto b = static_cast<size_t>(off);
        if (b >= n) continue;
        KpiBucketSeries::Bucket& bucket = out.buckets[b];
        if (cet.is_present(r)) {
            bucket.cet_sum += cet.as_f64(r);
            ++bucket.cet_n;
        }
        if (rtt.is_present(r)) {
            bucket.rtt_sum += rtt.as_f64(r);
            ++bucket.rtt_n;
        }
        if (data_d2s.is_present(r) && data_d2s.as_i64(r) > 0) bucket.server_data_activity = true;
    }
    return out;
}

void apply_tcp_rules(RagRow& row, const RagTcpConfig& cfg) {
    row.score = 0.0;
    row.fired_triggers.clear();

    struct Named { const char* trigger; const char* key; const PercentKpiRule* rule; };
    const Named pct_rules[] = {
        {"dupack_s2d", "dupack_s2d_pct", &cfg.dupack_s2d},
        {"dupack_d2s", "dupack_d2s_pct", &cfg.dupack_d2s},
        {"retx_s2d", "retx_s2d_pct", &cfg.retx_s2d},
        {"retx_d2s", "retx_d2s_pct", &cfg.retx_d2s},
        {"zwin_d2s", "zwin_d2s_pct", &cfg.zwin_d2s},
    };
    for (const auto& r : pct_rules) {
        double v = kpi(row, r.key);
        if (v >= r.rule->trigger_pct) {
            row.fired_triggers.insert(r.trigger);
            row.score += r.rule->score_per_unit * v;
        }
    }
    if (kpi(row, "downtime") >= 1.0) {
        row.fired_triggers.insert("downtime");
        row.score += cfg.downtime_score;
    }
    if (kpi(row, "cet_sustained") >= 1.0 || kpi(row, "cet_spike") >= 1.0) {
        row.fired_triggers.insert("cet");
        row.score += cfg.cet_score;
    }
    if (kpi(row, "rtt_sustained") >= 1.0 || kpi(row, "rtt_spike") >= 1.0) {
        row.fired_triggers.insert("rtt");
        row.score += cfg.rtt_score;
    }
    row.score += cfg.score_per_ignored_syn * kpi(row, "ignored_syns");
    // No SYN-ACK ever seen against a big pile of SYN-bearing records: the
    // connection count is meaningless, use the fixed importance instead.
    if (kpi(row, "synack_total") == 0.0 &&
        kpi(row, "syn_records") > static_cast<double>(cfg.no_synack_min_syn_records))
        row.score += cfg.no_synack_fixed_score;
    else
        row.score += cfg.score_per_connection * kpi(row, "connections");
    row.score += cfg.score_per_mbyte * kpi(row, "mbytes");

    bool red = row.fired_triggers.count("downtime") || row.fired_triggers.count("cet") ||
               row.fired_triggers.count("rtt");
    row.severity =
        red ? Severity::red : (row.fired_triggers.empty() ? Severity::green : Severity::amber);
}

void apply_http_rules(RagRow& row, const RagHttpConfig& cfg) {
    row.score = 0.0;
    row.fired_triggers.clear();
    double tx = kpi(row, "transactions");

    double se = kpi(row, "server_errors_pct");
    if (tx > 0 && se >= cfg.server_error_trigger_pct) {
        row.fired_triggers.insert("server_errors");
        row.score += cfg.server_error_weight * se * tx / 100.0;
    }
    double ce = kpi(row, "client_errors_pct");
    if (tx > 0 && ce >= cfg.client_error_trigger_pct) {
        row.fired_triggers.insert("client_errors");
        row.score += cfg.client_error_weight * ce * tx / 100.0;
    }
    if (has_kpi(row, "median_rt_s") && kpi(row, "median_rt_s") >= cfg.median_rt_threshold_s) {
        row.fired_triggers.insert("median_rt");
        row.score += cfg.median_rt_score;
    }
    if (has_kpi(row, "mean_rt_s") && kpi(row, "mean_rt_s") >= cfg.mean_rt_threshold_s) {
        row.fired_triggers.insert("mean_rt");
        row.score += cfg.mean_rt_score;
    }
    row.score += cfg.score_per_acc_time_pct * kpi(row, "acc_rt_pct");
    row.score += cfg.score_per_transaction * tx;

    bool red = row.fired_triggers.count("median_rt") || row.fired_triggers.count("mean_rt");
    row.severity =
        red ? Severity::red : (row.fired_triggers.empty() ? Severity::green : Severity::amber);
}

void apply_dns_rules(RagRow& row, const RagDnsConfig& cfg) {
    row.score = 0.0;
    row.fired_triggers.clear();
    double tx = kpi(row, "transactions");

    double err = kpi(row, "errors_pct");
    if (tx > 0 && err >= cfg.error_trigger_pct) {
        row.fired_triggers.insert("errors");
        row.score += cfg.score_per_error_pct * err;
    }
    if (has_kpi(row, "median_rt_ms") && kpi(row, "median_rt_ms") >= cfg.median_rt_threshold_ms) {
        row.fired_triggers.insert("median_rt");
        row.score += cfg.median_rt_score;
    }
    if (has_kpi(row, "mean_rt_ms") && kpi(row, "mean_rt_ms") >= cfg.mean_rt_threshold_ms) {
        row.fired_triggers.insert("mean_rt");
        row.score += cfg.mean_rt_score;
    }
    row.score += cfg.score_per_acc_time_pct * kpi(row, "acc_time_pct");
    row.score += cfg.score_per_transaction * tx;

    bool red = row.fired_triggers.count("median_rt") || row.fired_triggers.count("mean_rt");
    row.severity =
        red ? Severity::red : (row.fired_triggers.empty() ? Severity::green : Severity::amber);
}

RagRow score_tcp_server(const std::string& server_ip, const RecordBatch& tcp_batch,
                        const KpiBucketSeries& buckets, const RagTcpConfig& cfg) {
    RagRow row;
    row.entity = server_ip;
    row.protocol = Protocol::tcp;
    size_t n = tcp_batch.rows;

    if (n > 0) {
        row.kpis["dupack_s2d_pct"] =
            per_connection_pct(tcp_batch.at("dupack_s2d"), tcp_batch.at("pkts_s2d"), n);
        row.kpis["dupack_d2s_pct"] =
            per_connection_pct(tcp_batch.at("dupack_d2s"), tcp_batch.at("pkts_d2s"), n);
        row.kpis["retx_s2d_pct"] =
            per_connection_pct(tcp_batch.at("retx_s2d"), tcp_batch.at("pkts_s2d"), n);
        row.kpis["retx_d2s_pct"] =
            per_connection_pct(tcp_batch.at("retx_d2s"), tcp_batch.at("pkts_d2s"), n);
        row.kpis["zwin_d2s_pct"] =
            per_connection_pct(tcp_batch.at("zwin_d2s"), tcp_batch.at("pkts_d2s"), n);

        const Column& syn = tcp_batch.at("syn_count");
        const Column& synack = tcp_batch.at("synack_count");
        const Column& pkts_d2s = tcp_batch.at("pkts_d2s");
        const Column& ignored = tcp_batch.at("ignored_syns");
        const Column& bytes_s2d = tcp_batch.at("bytes_s2d");
        const Column& bytes_d2s = tcp_batch.at("bytes_d2s");
        bool unanswered_syns = false;
        double synack_total = 0, syn_records = 0, ignored_total = 0, bytes_total = 0;
        for (size_t r = 0; r < n; ++r) {
            int64_t syn_c = syn.is_present(r) ? syn.as_i64(r) : 0;
            if (syn_c > 0) {
                syn_records += 1;
                if (!pkts_d2s.is_present(r) || pkts_d2s.as_i64(r) == 0) unanswered_syns = true;
            }
            if (synack.is_present(r)) synack_total += static_cast<double>(synack.as_i64(r));
            if (ignored.is_present(r)) ignored_total += static_cast<double>(ignored.as_i64(r));
            if (bytes_s2d.is_present(r)) bytes_total += static_cast<double>(bytes_s2d.as_i64(r));
            if (bytes_d2s.is_present(r)) bytes_total += static_cast<double>(bytes_d2s.as_i64(r));
        }

        uint64_t inactive = 0;
        for (size_t i = 0; i < buckets.buckets.size(); ++i)
            if (!buckets.buckets[i].server_data_activity) ++inactive;
        bool mostly_inactive =
            !buckets.buckets.empty() &&
            static_cast<double>(inactive) >=
                cfg.downtime_inactive_share * static_cast<double>(buckets.buckets.size());
        row.kpis["downtime"] = unanswered_syns && mostly_inactive ? 1.0 : 0.0;

        BucketTrigger cet = evaluate_buckets(
            buckets, [&](size_t i) { return buckets.has_cet(i); },
            [&](size_t i) { return buckets.mean_cet(i); }, cfg.cet_threshold_s,
            cfg.sustained_buckets, cfg.spike_factor);
        BucketTrigger rtt = evaluate_buckets(
            buckets, [&](size_t i) { return buckets.has_rtt(i); },
            [&](size_t i) { return buckets.mean_rtt(i); }, cfg.rtt_threshold_s,
            cfg.sustained_buckets, cfg.spike_factor);
        row.kpis["cet_sustained"] = cet.sustained ? 1.0 : 0.0;
        row.kpis["cet_spike"] = cet.spike ? 1.0 : 0.0;
        row.kpis["rtt_sustained"] = rtt.sustained ? 1.0 : 0.0;
        row.kpis["rtt_spike"] = rtt.spike ? 1.0 : 0.0;

        row.kpis["ignored_syns"] = ignored_total;
        row.kpis["connections"] = static_cast<double>(n);
        row.kpis["syn_records"] = syn_records;
        row.kpis["synack_total"] = synack_total;
        row.kpis["mbytes"] = bytes_total / 1e6;
    }

    apply_tcp_rules(row, cfg);
    return row;
}

RagRow score_http_server(const std::string& server_ip, int64_t port,
                         const RecordBatch& http_batch, double total_response_time_s,
                         const RagHttpConfig& cfg) {
    RagRow row;
    row.entity = server_ip + ":" + format_i64(port);
    row.protocol = Protocol::http;
    size_t n = http_batch.rows;
    row.kpis["transactions"] = static_cast<double>(n);

    if (n > 0) {
        const Column& code = http_batch.at("response_code");
        const Column& rt = http_batch.at("response_time_s");
        uint64_t server_err = 0, client_err = 0;
        std::vector<double> rts;
        double rt_sum = 0.0;
        for (size_t r = 0; r < n; ++r) {
            if (code.is_present(r)) {
                int64_t c = code.as_i64(r);
                if (c >= 500 && c <= 599) ++server_err;
                if (c >= 400 && c <= 499) ++client_err;
            }
            if (rt.is_present(r)) {
                rts.push_back(rt.as_f64(r));
                rt_sum += rt.as_f64(r);
            }
        }
        row.kpis["server_errors_pct"] = 100.0 * static_cast<double>(server_err) / n;
        row.kpis["client_errors_pct"] = 100.0 * static_cast<double>(client_err) / n;
        if (!rts.empty()) {
            row.kpis["median_rt_s"] = median_of(rts);
            row.kpis["mean_rt_s"] = mean_of(rts);
        }
        row.kpis["acc_rt_pct"] =
            total_response_time_s > 0 ? 100.0 * rt_sum / total_response_time_s : 0.0;
    }

    apply_http_rules(row, cfg);
    return row;
}

RagRow score_dns_server(const std::string& server_ip, const RecordBatch& dns_batch,
                        double total_response_time_ms, const RagDnsConfig& cfg) {
    RagRow row;
    row.entity = server_ip;
    row.protocol = Protocol::dns;
    size_t n = dns_batch.rows;
    row.kpis["transactions"] = static_cast<double>(n);

    if (n > 0) {
        const Column& rcode = dns_batch.at("rcode");
        const Column& rt = dns_batch.at("response_time_ms");
        uint64_t errors = 0;
        std::vector<double> rts;
        double rt_sum = 0.0;
        for (size_t r = 0; r < n; ++r) {
            if (rcode.is_present(r)) {
                int64_t c = rcode.as_i64(r);
                if (c == -1 ? cfg.no_response_is_error : c != 0) ++errors;
            }
            if (rt.is_present(r)) {
                rts.push_back(rt.as_f64(r));
                rt_sum += rt.as_f64(r);
            }
        }
        row.kpis["errors_pct"] = 100.0 * static_cast<double>(errors) / n;
        if (!rts.empty()) {
            row.kpis["median_rt_ms"] = median_of(rts);
            row.kpis["mean_rt_ms"] = mean_of(rts);
        }
        row.kpis["acc_time_pct"] =
            total_response_time_ms > 0 ? 100.0 * rt_sum / total_response_time_ms : 0.0;
    }

    apply_dns_rules(row, cfg);
    return row;
}

std::vector<RagRow> build_rag_table(std::vector<RagRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const RagRow& a, const RagRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity < b.entity;
    });
    return rows;
}

namespace {

/// Copies the rows at `indices` into a fresh batch (per-entity view).
RecordBatch subset(const RecordBatch& src, const std::vector<size_t>& indices) {
    RecordBatch out;
    for (const auto& col : src.columns) {
        Column c;
        c.name = col.name;
        c.type = col.type;
        out.columns.push_back(std::move(c));
    }
    for (size_t row : indices)
        for (size_t ci = 0; ci < src.columns.size(); ++ci)
            out.columns[ci].append_from(src.columns[ci], row);
    out.rows = indices.size();
    return out;
}

}  // namespace

std::vector<RagRow> score_all_tcp_servers(const RecordBatch& tcp_batch, const RagConfig& cfg) {
    std::vector<RagRow> rows;
    if (tcp_batch.rows == 0) return rows;
    const Column& dst = tcp_batch.at("dst_ip");
    const Column& ts_start = tcp_batch.at("ts_start");
    const Column& ts_end = tcp_batch.at("ts_end");

    double span_start = 0, span_end = 0;
    bool any = false;
    std::map<std::string, std::vector<size_t>> by_server;
    for (size_t r = 0; r < tcp_batch.rows; ++r) {
        if (!dst.is_present(r)) continue;
        by_server[std::string(dst.as_text(r))].push_back(r);
        if (ts_start.is_present(r)) {
            double s = ts_start.as_f64(r);
            double e = ts_end.is_present(r) ? ts_end.as_f64(r) : s;
            if (!any) { span_start = s; span_end = e; any = true; }
            span_start = std::min(span_start, s);
            span_end = std::max(span_end, e);
        }
    }
    for (const auto& [server, indices] : by_server) {
        RecordBatch view = subset(tcp_batch, indices);
        KpiBucketSeries buckets =
            build_kpi_buckets(server, view, cfg.bucket_width_s, span_start, span_end);
        rows.push_back(score_tcp_server(server, view, buckets, cfg.tcp));
    }
    return build_rag_table(std::move(rows));
}

std::vector<RagRow> score_all_http_servers(const RecordBatch& http_batch, const RagConfig& cfg) {
    std::vector<RagRow> rows;
    if (http_batch.rows == 0) return rows;
    const Column& server = http_batch.at("server_ip");
    const Column& port = http_batch.at("server_port");
    const Column& rt = http_batch.at("response_time_s");

    double total_rt = 0.0;
    std::map<std::pair<std::string, int64_t>, std::vector<size_t>> by_entity;
    for (size_t r = 0; r < http_batch.rows; ++r) {
        if (!server.is_present(r)) continue;
        int64_t p = port.is_present(r) ? port.as_i64(r) : 0;
        by_entity[{std::string(server.as_text(r)), p}].push_back(r);
        if (rt.is_present(r)) total_rt += rt.as_f64(r);
    }
    for (const auto& [key, indices] : by_entity) {
        RecordBatch view = subset(http_batch, indices);
        rows.push_back(score_http_server(key.first, key.second, view, total_rt, cfg.http));
    }
    return build_rag_table(std::move(rows));
}

std::vector<RagRow> score_all_dns_servers(const RecordBatch& dns_batch, const RagConfig& cfg) {
    std::vector<RagRow> rows;
    if (dns_batch.rows == 0) return rows;
    const Column& server = dns_batch.at("server_ip");
    const Column& rt = dns_batch.at("response_time_ms");

    double total_rt = 0.0;
    std::map<std::string, std::vector<size_t>> by_entity;
    for (size_t r = 0; r < dns_batch.rows; ++r) {
        if (!server.is_present(r)) continue;
        by_entity[std::string(server.as_text(r))].push_back(r);
        if (rt.is_present(r)) total_rt += rt.as_f64(r);
    }
    for (const auto& [key, indices] : by_entity) {
        RecordBatch view = subset(dns_batch, indices);
        rows.push_back(score_dns_server(key, view, total_rt, cfg.dns));
    }
    return build_rag_table(std::move(rows));
}

void write_rag_csv(const std::vector<RagRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "entity,protocol,score,severity,fired_triggers,kpis\n";
    for (const RagRow& row : rows) {
        out << row.entity << ',' << protocol_name(row.protocol) << ','
            << format_fixed(row.score, 4) << ',' << severity_name(row.severity) << ',';
        bool first = true;
        for (const auto& t : row.fired_triggers) {
            if (!first) out << ';';
            out << t;
            first = false;
        }
        out << ',';
        first = true;
        for (const auto& [k, v] : row.kpis) {
            if (!first) out << ';';
            out << k << '=' << format_fixed(v, 6);
            first = false;
        }
        out << '\n';
    }
}

}  // namespace flowrep
