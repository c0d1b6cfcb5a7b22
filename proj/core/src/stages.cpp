#include "flowrep/stages.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flowrep/burst.hpp"
#include "flowrep/op_chain.hpp"
#include "flowrep/rag.hpp"
#include "flowrep/text.hpp"
#include "flowrep/timeseries.hpp"

namespace flowrep {

namespace {

std::string fmt_bytes(double b) {
    if (b >= 1e12) return format_fixed(b / 1e12, 2) + " TB";
    if (b >= 1e9) return format_fixed(b / 1e9, 2) + " GB";
    if (b >= 1e6) return format_fixed(b / 1e6, 2) + " MB";
    if (b >= 1e3) return format_fixed(b / 1e3, 2) + " kB";
    return format_fixed(b, 0) + " B";
}

std::string fmt_rate(double bps) {
    if (bps >= 1e9) return format_fixed(bps / 1e9, 2) + " Gbit/s";
    if (bps >= 1e6) return format_fixed(bps / 1e6, 2) + " Mbit/s";
    if (bps >= 1e3) return format_fixed(bps / 1e3, 2) + " kbit/s";
    return format_fixed(bps, 0) + " bit/s";
}

TableCell cell(std::string text) { return {std::move(text), std::nullopt}; }

StageOutput missing_input(const std::string& stage, Protocol proto) {
    StageOutput out;
    ReportSection section;
    section.name = stage;
    section.items.push_back(
        TextItem{std::string("No ") + protocol_name(proto) + " records in this dataset."});
    out.sections.push_back(std::move(section));
    return out;
}

double col_sum(const RecordBatch& batch, std::string_view name) {
    const Column& c = batch.at(name);
    double s = 0;
    for (size_t r = 0; r < batch.rows; ++r)
        if (c.is_present(r)) s += c.as_f64(r);
    return s;
}

std::vector<FlowImpulse> impulses_of(const RecordBatch& batch, std::string_view bytes_a,
                                     std::string_view bytes_b) {
    std::vector<FlowImpulse> flows;
    flows.reserve(batch.rows);
    const Column& ts_start = batch.at("ts_start");
    const Column& ts_end = batch.at("ts_end");
    const Column& ba = batch.at(bytes_a);
    const Column& bb = batch.at(bytes_b);
    for (size_t r = 0; r < batch.rows; ++r) {
        if (!ts_start.is_present(r) || !ts_end.is_present(r)) continue;
        FlowImpulse f;
        f.ts_start = ts_start.as_f64(r);
        f.ts_end = ts_end.as_f64(r);
        if (f.ts_end < f.ts_start) continue;  // malformed row, not ours to report here
        f.bytes = (ba.is_present(r) ? ba.as_i64(r) : 0) + (bb.is_present(r) ? bb.as_i64(r) : 0);
        flows.push_back(f);
    }
    return flows;
}

ExportedTable series_export(const TimeSeries& s, std::string rel_path) {
    ExportedTable t;
    t.rel_path = std::move(rel_path);
    t.header = {"timestamp", "value"};
    for (size_t i = 0; i < s.values.size(); ++i)
        t.rows.push_back({format_fixed(s.bin_start(i), 3), format_f64(s.values[i])});
    return t;
}

ExportedTable rag_export(const std::vector<RagRow>& rows, std::string rel_path) {
    ExportedTable t;
    t.rel_path = std::move(rel_path);
    t.header = {"entity", "score", "severity", "fired_triggers"};
    for (const RagRow& r : rows) {
        std::string triggers;
        for (const auto& name : r.fired_triggers) {
            if (!triggers.empty()) triggers += ';';
            triggers += name;
        }
        t.rows.push_back(
            {r.entity, format_fixed(r.score, 2), severity_name(r.severity), triggers});
    }
    return t;
}

TableItem rag_table(const std::string& title, const std::vector<RagRow>& rows, size_t top_n) {
    TableItem table;
    table.title = title;
    table.headers = {"#", "server", "score", "severity", "fired triggers"};
    for (size_t i = 0; i < rows.size() && i < top_n; ++i) {
        const RagRow& r = rows[i];
        std::string triggers;
        for (const auto& name : r.fired_triggers) {
            if (!triggers.empty()) triggers += ", ";
            triggers += name;
        }
        TableCell sev{severity_name(r.severity), severity_name(r.severity)};
        table.rows.push_back({cell(format_i64(static_cast<int64_t>(i + 1))), cell(r.entity),
                              cell(format_fixed(r.score, 2)), sev, cell(triggers)});
    }
    return table;
}

/// Shared volumetry for the conversation layers (mac, ip, udp).
StageOutput conversation_stage(const std::string& stage, Protocol proto,
                               const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(proto)) return missing_input(stage, proto);
    StageOutput out;
    ReportSection section;
    section.name = stage;

    OpChain full(dataset, proto);
    const RecordBatch& batch = full.materialize();
    out.rows += full.rows_scanned();

    double pkts = col_sum(batch, "pkts_a2b") + col_sum(batch, "pkts_b2a");
    double bytes = col_sum(batch, "bytes_a2b") + col_sum(batch, "bytes_b2a");
    std::ostringstream totals;
    totals << format_i64(static_cast<int64_t>(batch.rows)) << " " << stage
           << " conversation records, " << format_i64(static_cast<int64_t>(pkts))
           << " packets, " << fmt_bytes(bytes) << " total.";
    section.items.push_back(TextItem{totals.str()});

    // Top conversations by total bytes.
    OpChain conv(dataset, proto);
    conv.group_aggregate({"endpoint_a", "endpoint_b"},
                         {{AggKind::sum, "bytes_a2b"},
                          {AggKind::sum, "bytes_b2a"},
                          {AggKind::count, ""}});
    const RecordBatch& groups = conv.materialize();
    struct Conv { std::string a, b; double bytes; int64_t flows; };
    std::vector<Conv> convs;
    {
        const Column& a = groups.at("endpoint_a");
        const Column& b = groups.at("endpoint_b");
        const Column& s1 = groups.at("sum(bytes_a2b)");
        const Column& s2 = groups.at("sum(bytes_b2a)");
        const Column& n = groups.at("count");
        for (size_t r = 0; r < groups.rows; ++r)
            convs.push_back({std::string(a.as_text(r)), std::string(b.as_text(r)),
                             s1.as_f64(r) + s2.as_f64(r), n.as_i64(r)});
        std::sort(convs.begin(), convs.end(), [](const Conv& x, const Conv& y) {
            if (x.bytes != y.bytes) return x.bytes > y.bytes;
            return std::tie(x.a, x.b) < std::tie(y.a, y.b);
        });
    }
    TableItem conv_table;
    conv_table.title = "Top conversations by volume";
    conv_table.headers = {"endpoint A", "endpoint B", "bytes", "records"};
    for (size_t i = 0; i < convs.size() && i < cfg.top_n; ++i)
        conv_table.rows.push_back({cell(convs[i].a), cell(convs[i].b),
                                   cell(fmt_bytes(convs[i].bytes)),
                                   cell(format_i64(convs[i].flows))});
    section.items.push_back(conv_table);

    // Throughput series reconstructed from the conversation volumetry.
    TimeSeries bps = reconstruct(impulses_of(batch, "bytes_a2b", "bytes_b2a"),
                                 cfg.series_resolution_s);
    std::string bps_csv = "tables/" + stage + "_bps.csv";
    out.exports.push_back(series_export(bps, bps_csv));
    ChartSpec chart;
    chart.kind = ChartKind::timeseries_line;
    chart.name = stage + "_bps";
    chart.data_source = bps_csv;
    chart.title = stage + " traffic";
    chart.x_label = "epoch seconds";
    chart.y_label = "bits/s";
    section.items.push_back(FigureItem{chart});

    if (proto == Protocol::ip && !convs.empty()) {
        // Byte-share pie of the top talkers.
        ExportedTable pie;
        pie.rel_path = "tables/ip_share.csv";
        pie.header = {"conversation", "bytes"};
        double shown = 0;
        for (size_t i = 0; i < convs.size() && i < 8; ++i) {
            pie.rows.push_back({convs[i].a + " - " + convs[i].b, format_f64(convs[i].bytes)});
            shown += convs[i].bytes;
        }
        if (bytes > shown)
            pie.rows.push_back({"other", format_f64(bytes - shown)});
        out.exports.push_back(pie);
        ChartSpec pie_chart;
        pie_chart.kind = ChartKind::pie;
        pie_chart.name = "ip_share";
        pie_chart.data_source = "tables/ip_share.csv";
        pie_chart.title = "Byte share of top conversations";
        section.items.push_back(FigureItem{pie_chart});
    }

    if (proto == Protocol::udp) {
        OpChain ports(dataset, proto);
        ports.group_aggregate({"port_b"}, {{AggKind::count, ""}, {AggKind::sum, "bytes_b2a"}})
            .top_n("count", cfg.top_n, true);
        const RecordBatch& top_ports = ports.materialize();
        TableItem port_table;
        port_table.title = "Top destination ports";
        port_table.headers = {"port", "records", "bytes b2a"};
        const Column& p = top_ports.at("port_b");
        const Column& n = top_ports.at("count");
        const Column& s = top_ports.at("sum(bytes_b2a)");
        for (size_t r = 0; r < top_ports.rows; ++r)
            port_table.rows.push_back({cell(p.is_present(r) ? format_i64(p.as_i64(r)) : "-"),
                                       cell(format_i64(n.as_i64(r))),
                                       cell(fmt_bytes(s.as_f64(r)))});
        section.items.push_back(port_table);
    }

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput tcp_stage(const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(Protocol::tcp)) return missing_input("tcp", Protocol::tcp);
    StageOutput out;
    ReportSection section;
    section.name = "tcp";

    OpChain full(dataset, Protocol::tcp);
    const RecordBatch& batch = full.materialize();
    out.rows += full.rows_scanned();

    double bytes = col_sum(batch, "bytes_s2d") + col_sum(batch, "bytes_d2s");
    double retx = col_sum(batch, "retx_s2d") + col_sum(batch, "retx_d2s");
    double pkts = col_sum(batch, "pkts_s2d") + col_sum(batch, "pkts_d2s");
    std::ostringstream totals;
    totals << format_i64(static_cast<int64_t>(batch.rows)) << " TCP connections, "
           << fmt_bytes(bytes) << " transferred, overall retransmission ratio "
           << format_fixed(pkts > 0 ? 100.0 * retx / pkts : 0.0, 2) << "%.";
    section.items.push_back(TextItem{totals.str()});

    // Top conversations by volume.
    OpChain conv(dataset, Protocol::tcp);
    conv.group_aggregate({"src_ip", "dst_ip", "dst_port"},
                         {{AggKind::sum, "bytes_s2d"},
                          {AggKind::sum, "bytes_d2s"},
                          {AggKind::count, ""}});
    const RecordBatch& groups = conv.materialize();
    struct Conv { std::string src, dst; int64_t port; double bytes; int64_t flows; };
    std::vector<Conv> convs;
    {
        const Column& s = groups.at("src_ip");
        const Column& d = groups.at("dst_ip");
        const Column& p = groups.at("dst_port");
        const Column& b1 = groups.at("sum(bytes_s2d)");
        const Column& b2 = groups.at("sum(bytes_d2s)");
        const Column& n = groups.at("count");
        for (size_t r = 0; r < groups.rows; ++r)
            convs.push_back({std::string(s.as_text(r)), std::string(d.as_text(r)),
                             p.as_i64(r), b1.as_f64(r) + b2.as_f64(r), n.as_i64(r)});
        std::sort(convs.begin(), convs.end(), [](const Conv& x, const Conv& y) {
            if (x.bytes != y.bytes) return x.bytes > y.bytes;
            return std::tie(x.src, x.dst, x.port) < std::tie(y.src, y.dst, y.port);
        });
    }
    TableItem conv_table;
    conv_table.title = "Top TCP conversations";
    conv_table.headers = {"client", "server", "port", "bytes", "connections"};
    for (size_t i = 0; i < convs.size() && i < cfg.top_n; ++i)
        conv_table.rows.push_back({cell(convs[i].src), cell(convs[i].dst),
                                   cell(format_i64(convs[i].port)),
                                   cell(fmt_bytes(convs[i].bytes)),
                                   cell(format_i64(convs[i].flows))});
    section.items.push_back(conv_table);

    // Server health (RAG).
    std::vector<RagRow> rag = score_all_tcp_servers(batch, cfg.rag);
    section.items.push_back(rag_table("TCP server health", rag, 15));
    out.exports.push_back(rag_export(rag, "tables/tcp_rag.csv"));

    // RTT boxplot for the busiest servers.
    {
        std::vector<std::pair<std::string, size_t>> busiest;  // server -> row count
        std::map<std::string, size_t> counts;
        const Column& dst = batch.at("dst_ip");
        for (size_t r = 0; r < batch.rows; ++r)
            if (dst.is_present(r)) ++counts[std::string(dst.as_text(r))];
        for (const auto& [k, v] : counts) busiest.emplace_back(k, v);
        std::sort(busiest.begin(), busiest.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (busiest.size() > 6) busiest.resize(6);
        std::set<std::string> keep;
        for (const auto& [k, v] : busiest) keep.insert(k);

        ExportedTable rtt;
        rtt.rel_path = "tables/tcp_rtt.csv";
        rtt.header = {"server", "rtt_s"};
        const Column& rtt_col = batch.at("rtt_s");
        size_t emitted = 0;
        for (size_t r = 0; r < batch.rows && emitted < 30000; ++r) {
            if (!dst.is_present(r) || !rtt_col.is_present(r)) continue;
            std::string server(dst.as_text(r));
            if (!keep.count(server)) continue;
            rtt.rows.push_back({server, format_f64(rtt_col.as_f64(r))});
            ++emitted;
        }
        out.exports.push_back(std::move(rtt));
        ChartSpec box;
        box.kind = ChartKind::boxplot;
        box.name = "tcp_rtt";
        box.data_source = "tables/tcp_rtt.csv";
        box.title = "RTT by server";
        box.y_label = "seconds";
        section.items.push_back(FigureItem{box});
    }

    // Connection duration survival plot.
    {
        ExportedTable dur;
        dur.rel_path = "tables/tcp_duration.csv";
        dur.header = {"duration_s"};
        const Column& ts_start = batch.at("ts_start");
        const Column& ts_end = batch.at("ts_end");
        size_t emitted = 0;
        for (size_t r = 0; r < batch.rows && emitted < 50000; ++r) {
            if (!ts_start.is_present(r) || !ts_end.is_present(r)) continue;
            double d = ts_end.as_f64(r) - ts_start.as_f64(r);
            if (d < 0) continue;
            dur.rows.push_back({format_f64(d)});
            ++emitted;
        }
        out.exports.push_back(std::move(dur));
        ChartSpec surv;
        surv.kind = ChartKind::survival_distribution;
        surv.name = "tcp_duration";
        surv.data_source = "tables/tcp_duration.csv";
        surv.title = "Connection duration survival";
        surv.x_label = "seconds";
        section.items.push_back(FigureItem{surv});
    }

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput http_stage(const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(Protocol::http)) return missing_input("http", Protocol::http);
    StageOutput out;
    ReportSection section;
    section.name = "http";

    OpChain full(dataset, Protocol::http);
    const RecordBatch& batch = full.materialize();
    out.rows += full.rows_scanned();

    std::ostringstream totals;
    totals << format_i64(static_cast<int64_t>(batch.rows)) << " HTTP transactions.";
    section.items.push_back(TextItem{totals.str()});

    std::vector<RagRow> rag = score_all_http_servers(batch, cfg.rag);
    section.items.push_back(rag_table("HTTP server:port health", rag, 15));
    out.exports.push_back(rag_export(rag, "tables/http_rag.csv"));

    OpChain urls(dataset, Protocol::http);
    urls.group_aggregate({"url"}, {{AggKind::count, ""}, {AggKind::mean, "response_time_s"}})
        .top_n("count", cfg.top_n, true);
    const RecordBatch& top_urls = urls.materialize();
    TableItem url_table;
    url_table.title = "Top URLs";
    url_table.headers = {"url", "transactions", "mean response time (s)"};
    {
        const Column& u = top_urls.at("url");
        const Column& n = top_urls.at("count");
        const Column& m = top_urls.at("mean(response_time_s)");
        for (size_t r = 0; r < top_urls.rows; ++r)
            url_table.rows.push_back(
                {cell(std::string(u.as_text(r))), cell(format_i64(n.as_i64(r))),
                 cell(m.is_present(r) ? format_fixed(m.as_f64(r), 4) : "-")});
    }
    section.items.push_back(url_table);

    // Response time boxplot across the busiest entities.
    {
        std::map<std::string, size_t> counts;
        const Column& server = batch.at("server_ip");
        const Column& port = batch.at("server_port");
        const Column& rt = batch.at("response_time_s");
        for (size_t r = 0; r < batch.rows; ++r)
            if (server.is_present(r))
                ++counts[std::string(server.as_text(r)) + ":" +
                         format_i64(port.is_present(r) ? port.as_i64(r) : 0)];
        std::vector<std::pair<std::string, size_t>> busiest(counts.begin(), counts.end());
        std::sort(busiest.begin(), busiest.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (busiest.size() > 6) busiest.resize(6);
        std::set<std::string> keep;
        for (const auto& [k, v] : busiest) keep.insert(k);

        ExportedTable rts;
        rts.rel_path = "tables/http_rt.csv";
        rts.header = {"entity", "response_time_s"};
        size_t emitted = 0;
        for (size_t r = 0; r < batch.rows && emitted < 30000; ++r) {
            if (!server.is_present(r) || !rt.is_present(r)) continue;
            std::string entity = std::string(server.as_text(r)) + ":" +
                                 format_i64(port.is_present(r) ? port.as_i64(r) : 0);
            if (!keep.count(entity)) continue;
            rts.rows.push_back({entity, format_f64(rt.as_f64(r))});
            ++emitted;
        }
        out.exports.push_back(std::move(rts));
        ChartSpec box;
        box.kind = ChartKind::boxplot;
        box.name = "http_rt";
        box.data_source = "tables/http_rt.csv";
        box.title = "HTTP response time by server";
        box.y_label = "seconds";
        section.items.push_back(FigureItem{box});
    }

    TimeSeries tx = series_from_batch(batch, "ts", SeriesValue::event_count, "",
                                      cfg.series_resolution_s);
    out.exports.push_back(series_export(tx, "tables/http_tx.csv"));
    ChartSpec chart;
    chart.kind = ChartKind::timeseries_line;
    chart.name = "http_tx";
    chart.data_source = "tables/http_tx.csv";
    chart.title = "HTTP transactions per second";
    chart.x_label = "epoch seconds";
    chart.y_label = "transactions/s";
    section.items.push_back(FigureItem{chart});

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput dns_stage(const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(Protocol::dns)) return missing_input("dns", Protocol::dns);
    StageOutput out;
    ReportSection section;
    section.name = "dns";

    OpChain full(dataset, Protocol::dns);
    const RecordBatch& batch = full.materialize();
    out.rows += full.rows_scanned();

    std::ostringstream totals;
    totals << format_i64(static_cast<int64_t>(batch.rows)) << " DNS transactions.";
    section.items.push_back(TextItem{totals.str()});

    std::vector<RagRow> rag = score_all_dns_servers(batch, cfg.rag);
    section.items.push_back(rag_table("DNS server health", rag, 15));
    out.exports.push_back(rag_export(rag, "tables/dns_rag.csv"));

    OpChain names(dataset, Protocol::dns);
    names.group_aggregate({"query_name"}, {{AggKind::count, ""}})
        .top_n("count", cfg.top_n, true);
    const RecordBatch& top_names = names.materialize();
    TableItem name_table;
    name_table.title = "Top query names";
    name_table.headers = {"query name", "queries"};
    {
        const Column& q = top_names.at("query_name");
        const Column& n = top_names.at("count");
        for (size_t r = 0; r < top_names.rows; ++r)
            name_table.rows.push_back(
                {cell(std::string(q.as_text(r))), cell(format_i64(n.as_i64(r)))});
    }
    section.items.push_back(name_table);

    // Response time survival plot.
    {
        ExportedTable rts;
        rts.rel_path = "tables/dns_rt.csv";
        rts.header = {"response_time_ms"};
        const Column& rt = batch.at("response_time_ms");
        size_t emitted = 0;
        for (size_t r = 0; r < batch.rows && emitted < 50000; ++r) {
            if (!rt.is_present(r)) continue;
            rts.rows.push_back({format_f64(rt.as_f64(r))});
            ++emitted;
        }
        out.exports.push_back(std::move(rts));
        ChartSpec surv;
        surv.kind = ChartKind::survival_distribution;
        surv.name = "dns_rt";
        surv.data_source = "tables/dns_rt.csv";
        surv.title = "DNS response time survival";
        surv.x_label = "milliseconds";
        section.items.push_back(FigureItem{surv});
    }

    TimeSeries qps = series_from_batch(batch, "ts", SeriesValue::event_count, "",
                                       cfg.series_resolution_s);
    out.exports.push_back(series_export(qps, "tables/dns_qps.csv"));
    ChartSpec chart;
    chart.kind = ChartKind::timeseries_line;
    chart.name = "dns_qps";
    chart.data_source = "tables/dns_qps.csv";
    chart.title = "DNS queries per second";
    chart.x_label = "epoch seconds";
    chart.y_label = "queries/s";
    section.items.push_back(FigureItem{chart});

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput icmp_stage(const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(Protocol::icmp)) return missing_input("icmp", Protocol::icmp);
    StageOutput out;
    ReportSection section;
    section.name = "icmp";

    OpChain full(dataset, Protocol::icmp);
    const RecordBatch& batch = full.materialize();
    out.rows += full.rows_scanned();

    double messages = col_sum(batch, "count");
    std::ostringstream totals;
    totals << format_i64(static_cast<int64_t>(batch.rows)) << " ICMP records carrying "
           << format_i64(static_cast<int64_t>(messages)) << " messages.";
    section.items.push_back(TextItem{totals.str()});

    OpChain kinds(dataset, Protocol::icmp);
    kinds.group_aggregate({"icmp_type", "icmp_code"}, {{AggKind::sum, "count"}});
    const RecordBatch& by_kind = kinds.materialize();
    TableItem kind_table;
    kind_table.title = "Messages by type and code";
    kind_table.headers = {"type", "code", "messages"};
    {
        struct Kind { int64_t type, code; double n; };
        std::vector<Kind> entries;
        const Column& t = by_kind.at("icmp_type");
        const Column& c = by_kind.at("icmp_code");
        const Column& n = by_kind.at("sum(count)");
        for (size_t r = 0; r < by_kind.rows; ++r)
            entries.push_back({t.as_i64(r), c.as_i64(r), n.as_f64(r)});
        std::sort(entries.begin(), entries.end(), [](const Kind& a, const Kind& b) {
            if (a.n != b.n) return a.n > b.n;
            return std::tie(a.type, a.code) < std::tie(b.type, b.code);
        });
        for (const auto& e : entries)
            kind_table.rows.push_back({cell(format_i64(e.type)), cell(format_i64(e.code)),
                                       cell(format_i64(static_cast<int64_t>(e.n)))});
    }
    section.items.push_back(kind_table);

    TimeSeries mps = series_from_batch(batch, "ts", SeriesValue::column_sum, "count",
                                       cfg.series_resolution_s);
    out.exports.push_back(series_export(mps, "tables/icmp_mps.csv"));
    ChartSpec chart;
    chart.kind = ChartKind::timeseries_line;
    chart.name = "icmp_mps";
    chart.data_source = "tables/icmp_mps.csv";
    chart.title = "ICMP messages per second";
    chart.x_label = "epoch seconds";
    chart.y_label = "messages/s";
    section.items.push_back(FigureItem{chart});

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput bursts_stage(const Dataset& dataset, const Config& cfg) {
    Protocol source = Protocol::ip;
    if (!dataset.has(source)) source = Protocol::mac;
    if (!dataset.has(source)) return missing_input("bursts", Protocol::ip);
    StageOutput out;
    ReportSection section;
    section.name = "bursts";

    OpChain src(dataset, source);
    const RecordBatch& src_batch = src.materialize();
    out.rows += src.rows_scanned();
    TimeSeries bps = reconstruct(impulses_of(src_batch, "bytes_a2b", "bytes_b2a"),
                                 cfg.series_resolution_s);

    std::vector<Burst> bursts = detect_bursts(bps, cfg.burst);

    // Candidate root-cause metrics on the bps frame.
    std::map<std::string, TimeSeries> candidates;
    if (!bps.empty()) {
        double t0 = bps.t0;
        size_t bins = bps.size();
        double res = cfg.series_resolution_s;
        if (dataset.has(Protocol::tcp)) {
            OpChain tcp(dataset, Protocol::tcp);
            tcp.project({"ts_start", "bytes_s2d", "bytes_d2s"});
            const RecordBatch& b = tcp.materialize();
            out.rows += tcp.rows_scanned();
            TimeSeries conns = series_from_batch(b, "ts_start", SeriesValue::event_count, "",
                                                 res, t0, bins);
            TimeSeries up = series_from_batch(b, "ts_start", SeriesValue::column_sum,
                                              "bytes_s2d", res, t0, bins);
            TimeSeries down = series_from_batch(b, "ts_start", SeriesValue::column_sum,
                                                "bytes_d2s", res, t0, bins);
            TimeSeries bytes = series_add(up, down, "bytes");
            TimeSeries mb_per_conn = series_ratio(bytes, conns, "MB/connection");
            for (double& v : mb_per_conn.values) v /= 1e6;
            candidates.emplace("tcp_connections", std::move(conns));
            candidates.emplace("mb_per_connection", std::move(mb_per_conn));
        }
        if (dataset.has(Protocol::udp)) {
            OpChain udp(dataset, Protocol::udp);
            udp.project({"ts_start"});
            const RecordBatch& b = udp.materialize();
            out.rows += udp.rows_scanned();
            candidates.emplace("udp_flows", series_from_batch(b, "ts_start",
                                                              SeriesValue::event_count, "", res,
                                                              t0, bins));
        }
        if (dataset.has(Protocol::http)) {
            OpChain http(dataset, Protocol::http);
            http.project({"ts"});
            const RecordBatch& b = http.materialize();
            out.rows += http.rows_scanned();
            candidates.emplace("http_transactions",
                               series_from_batch(b, "ts", SeriesValue::event_count, "", res, t0,
                                                 bins));
        }
        if (dataset.has(Protocol::dns)) {
            OpChain dns(dataset, Protocol::dns);
            dns.project({"ts"});
            const RecordBatch& b = dns.materialize();
            out.rows += dns.rows_scanned();
            candidates.emplace("dns_queries", series_from_batch(b, "ts",
                                                                SeriesValue::event_count, "",
                                                                res, t0, bins));
        }
    }

    size_t accepted = 0;
    for (Burst& b : bursts) {
        if (b.status != BurstStatus::accepted) continue;
        ++accepted;
        CauseRanking ranking =
            rank_root_causes(b, candidates, cfg.variability_window_bins, cfg.cause_score);
        b.root_causes = ranking.ranked;
        b.top_clients = attribute_clients(b, dataset, cfg.top_n);
    }

    std::ostringstream summary;
    summary << format_i64(static_cast<int64_t>(accepted)) << " accepted burst(s) out of "
            << format_i64(static_cast<int64_t>(bursts.size()))
            << " candidate interval(s) at threshold " << fmt_rate(cfg.burst.threshold_bps)
            << ".";
    section.items.push_back(TextItem{summary.str()});

    TableItem table;
    table.title = "Detected bursts";
    table.headers = {"start", "end", "duration (s)", "peak", "mean", "status", "top cause",
                     "top client"};
    ExportedTable burst_csv;
    burst_csv.rel_path = "tables/bursts.csv";
    burst_csv.header = {"start", "end", "duration_s", "peak_bps", "mean_bps", "status",
                        "top_cause", "top_client"};
    for (const Burst& b : bursts) {
        std::string cause = b.root_causes.empty() ? "-" : b.root_causes.front().metric_name;
        std::string client = b.top_clients.empty() ? "-" : b.top_clients.front().client;
        table.rows.push_back({cell(format_fixed(b.start, 0)), cell(format_fixed(b.end, 0)),
                              cell(format_fixed(b.duration(), 0)), cell(fmt_rate(b.peak_rate)),
                              cell(fmt_rate(b.mean_rate)), cell(burst_status_name(b.status)),
                              cell(cause), cell(client)});
        burst_csv.rows.push_back({format_fixed(b.start, 3), format_fixed(b.end, 3),
                                  format_fixed(b.duration(), 3), format_f64(b.peak_rate),
                                  format_f64(b.mean_rate), burst_status_name(b.status),
                                  b.root_causes.empty() ? "" : b.root_causes.front().metric_name,
                                  b.top_clients.empty() ? "" : b.top_clients.front().client});
    }
    section.items.push_back(table);
    out.exports.push_back(std::move(burst_csv));

    out.exports.push_back(series_export(bps, "tables/bursts_bps.csv"));
    ChartSpec chart;
    chart.kind = ChartKind::timeseries_line;
    chart.name = "bursts_bps";
    chart.data_source = "tables/bursts_bps.csv";
    chart.title = "Total traffic with detected bursts";
    chart.x_label = "epoch seconds";
    chart.y_label = "bits/s";
    for (const Burst& b : bursts)
        if (b.status == BurstStatus::accepted)
            chart.highlight_intervals.push_back({b.start, b.end});
    section.items.push_back(FigureItem{chart});

    // The top cause metric of the first accepted burst, shaded the same way.
    for (const Burst& b : bursts) {
        if (b.status != BurstStatus::accepted || b.root_causes.empty()) continue;
        const std::string& cause = b.root_causes.front().metric_name;
        auto it = candidates.find(cause);
        if (it == candidates.end()) break;
        out.exports.push_back(series_export(it->second, "tables/bursts_cause.csv"));
        ChartSpec cause_chart;
        cause_chart.kind = ChartKind::timeseries_line;
        cause_chart.name = "bursts_cause";
        cause_chart.data_source = "tables/bursts_cause.csv";
        cause_chart.title = "Root-cause candidate: " + cause;
        cause_chart.x_label = "epoch seconds";
        cause_chart.y_label = it->second.unit;
        cause_chart.highlight_intervals.push_back({b.start, b.end});
        section.items.push_back(FigureItem{cause_chart});
        break;
    }

    out.sections.push_back(std::move(section));
    return out;
}

StageOutput topology_stage(const Dataset& dataset, const Config& cfg) {
    if (!dataset.has(Protocol::ip)) return missing_input("topology", Protocol::ip);
    StageOutput out;
    ReportSection section;
    section.name = "topology";

    OpChain conv(dataset, Protocol::ip);
    conv.group_aggregate({"endpoint_a", "endpoint_b"},
                         {{AggKind::sum, "bytes_a2b"}, {AggKind::sum, "bytes_b2a"}});
    const RecordBatch& groups = conv.materialize();
    out.rows += conv.rows_scanned();

    struct Edge { std::string a, b; double bytes; };
    std::vector<Edge> edges;
    {
        const Column& a = groups.at("endpoint_a");
        const Column& b = groups.at("endpoint_b");
        const Column& s1 = groups.at("sum(bytes_a2b)");
        const Column& s2 = groups.at("sum(bytes_b2a)");
        for (size_t r = 0; r < groups.rows; ++r)
            edges.push_back({std::string(a.as_text(r)), std::string(b.as_text(r)),
                             s1.as_f64(r) + s2.as_f64(r)});
        std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
            if (x.bytes != y.bytes) return x.bytes > y.bytes;
            return std::tie(x.a, x.b) < std::tie(y.a, y.b);
        });
        if (edges.size() > 20) edges.resize(20);
    }

    std::ostringstream text;
    text << "Node-link view of the top " << edges.size() << " IP conversations by volume.";
    section.items.push_back(TextItem{text.str()});

    ExportedTable csv;
    csv.rel_path = "tables/topology_edges.csv";
    csv.header = {"endpoint_a", "endpoint_b", "bytes"};
    TableItem table;
    table.title = "Top conversation edges";
    table.headers = {"endpoint A", "endpoint B", "bytes"};
    for (const Edge& e : edges) {
        csv.rows.push_back({e.a, e.b, format_f64(e.bytes)});
        table.rows.push_back({cell(e.a), cell(e.b), cell(fmt_bytes(e.bytes))});
    }
    out.exports.push_back(std::move(csv));
    section.items.push_back(table);

    ChartSpec chart;
    chart.kind = ChartKind::topology_graph;
    chart.name = "topology";
    chart.data_source = "tables/topology_edges.csv";
    chart.title = "Conversation topology";
    section.items.push_back(FigureItem{chart});

    (void)cfg;
    out.sections.push_back(std::move(section));
    return out;
}

}  // namespace

std::vector<Stage> default_stages(const Config& config) {
    struct Entry { const char* name; double cost; std::vector<Protocol> inputs; };
    const Entry entries[] = {
        {"mac", 20, {Protocol::mac}},
        {"ip", 25, {Protocol::ip}},
        {"udp", 25, {Protocol::udp}},
        {"tcp", 100, {Protocol::tcp}},
        {"http", 30, {Protocol::http}},
        {"dns", 15, {Protocol::dns}},
        {"icmp", 5, {Protocol::icmp}},
        {"bursts", 80, {Protocol::ip, Protocol::tcp, Protocol::udp, Protocol::http, Protocol::dns}},
        {"topology", 5, {Protocol::ip}},
    };
    std::vector<Stage> stages;
    for (const auto& e : entries) {
        Stage s;
        s.name = e.name;
        s.expected_cost = e.cost;
        s.inputs = e.inputs;
        s.heavy = std::find(config.heavy_stages.begin(), config.heavy_stages.end(), e.name) !=
                  config.heavy_stages.end();
        stages.push_back(std::move(s));
    }
    return stages;
}

StageOutput run_stage(const std::string& name, const Dataset& dataset, const Config& config) {
    if (name == "mac") return conversation_stage("mac", Protocol::mac, dataset, config);
    if (name == "ip") return conversation_stage("ip", Protocol::ip, dataset, config);
    if (name == "udp") return conversation_stage("udp", Protocol::udp, dataset, config);
    if (name == "tcp") return tcp_stage(dataset, config);
    if (name == "http") return http_stage(dataset, config);
    if (name == "dns") return dns_stage(dataset, config);
    if (name == "icmp") return icmp_stage(dataset, config);
    if (name == "bursts") return bursts_stage(dataset, config);
    if (name == "topology") return topology_stage(dataset, config);
    throw ConfigError("unknown stage '" + name + "'");
}

}  // namespace flowrep
