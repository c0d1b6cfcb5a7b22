#include "flowrep/records.hpp"

#include <array>
#include <cstdio>
#include <unordered_map>

#include "flowrep/text.hpp"

namespace flowrep {

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::mac: return "mac";
        case Protocol::ip: return "ip";
        case Protocol::udp: return "udp";
        case Protocol::tcp: return "tcp";
        case Protocol::http: return "http";
        case Protocol::dns: return "dns";
        case Protocol::icmp: return "icmp";
    }
    return "?";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
    static const std::array<Protocol, 7> all = {Protocol::mac, Protocol::ip,  Protocol::udp,
                                                Protocol::tcp, Protocol::http, Protocol::dns,
                                                Protocol::icmp};
    for (Protocol p : all)
        if (name == protocol_name(p)) return p;
    return std::nullopt;
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::vector<std::string_view> split(std::string_view s, char delim) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

void check_time_order(double ts_start, double ts_end, std::vector<std::string>& out) {
    if (ts_start > ts_end) out.push_back("ts_start > ts_end");
}

void check_count(const char* name, int64_t v, std::vector<std::string>& out) {
    if (v < 0) out.push_back(std::string(name) + " negative");
}

}  // namespace

std::vector<std::string> ConversationRecord::validate() const {
    std::vector<std::string> v;
    check_time_order(ts_start, ts_end, v);
    check_count("pkts_a2b", pkts_a2b, v);
    check_count("pkts_b2a", pkts_b2a, v);
    check_count("bytes_a2b", bytes_a2b, v);
    check_count("bytes_b2a", bytes_b2a, v);
    bool is_udp = layer == Protocol::udp;
    if (is_udp) {
        if (!port_a || !port_b) v.push_back("udp record missing ports");
        for (const auto& p : {port_a, port_b})
            if (p && (*p < 0 || *p > 65535)) v.push_back("port out of range");
    } else if (port_a || port_b) {
        v.push_back("non-udp conversation carries ports");
    }
    return v;
}

std::vector<std::string> TcpRecord::validate() const {
    std::vector<std::string> v;
    check_time_order(ts_start, ts_end, v);
    struct Named { const char* n; int64_t c; };
    for (const auto& [n, c] : {Named{"pkts_s2d", pkts_s2d}, Named{"pkts_d2s", pkts_d2s},
                               Named{"bytes_s2d", bytes_s2d}, Named{"bytes_d2s", bytes_d2s},
                               Named{"data_pkts_s2d", data_pkts_s2d},
                               Named{"data_pkts_d2s", data_pkts_d2s},
                               Named{"syn_count", syn_count}, Named{"synack_count", synack_count},
                               Named{"ignored_syns", ignored_syns}, Named{"retx_s2d", retx_s2d},
                               Named{"retx_d2s", retx_d2s}, Named{"dupack_s2d", dupack_s2d},
                               Named{"dupack_d2s", dupack_d2s}, Named{"zwin_s2d", zwin_s2d},
                               Named{"zwin_d2s", zwin_d2s}})
        check_count(n, c, v);
    if (retx_s2d > pkts_s2d) v.push_back("retx_s2d > pkts_s2d");
    if (retx_d2s > pkts_d2s) v.push_back("retx_d2s > pkts_d2s");
    if (cet_s && *cet_s < 0) v.push_back("cet_s negative");
    if (rtt_s && *rtt_s < 0) v.push_back("rtt_s negative");
    for (const auto& [n, c] : {Named{"src_port", src_port}, Named{"dst_port", dst_port}})
        if (c < 0 || c > 65535) v.push_back(std::string(n) + " out of range");
    return v;
}

std::vector<std::string> HttpRecord::validate() const {
    std::vector<std::string> v;
    if (response_code != 0 && (response_code < 100 || response_code > 599))
        v.push_back("response_code out of range");
    if (response_time_s && *response_time_s < 0) v.push_back("response_time_s negative");
    if (server_port < 0 || server_port > 65535) v.push_back("server_port out of range");
    return v;
}

std::vector<std::string> DnsRecord::validate() const {
    std::vector<std::string> v;
    if (rcode < -1) v.push_back("rcode out of range");
    if (response_time_ms && *response_time_ms < 0) v.push_back("response_time_ms negative");
    return v;
}

std::vector<std::string> IcmpRecord::validate() const {
    std::vector<std::string> v;
    if (icmp_type < 0 || icmp_type > 255) v.push_back("icmp_type out of range");
    if (icmp_code < 0 || icmp_code > 255) v.push_back("icmp_code out of range");
    if (count < 1) v.push_back("count < 1");
    return v;
}

namespace {

std::vector<ColumnSpec> conversation_columns(bool with_ports) {
    std::vector<ColumnSpec> c = {
        {"ts_start", ColumnType::f64}, {"ts_end", ColumnType::f64},
        {"endpoint_a", ColumnType::text}, {"endpoint_b", ColumnType::text},
    };
    if (with_ports) {
        c.push_back({"port_a", ColumnType::i64});
        c.push_back({"port_b", ColumnType::i64});
    }
    c.push_back({"pkts_a2b", ColumnType::i64});
    c.push_back({"pkts_b2a", ColumnType::i64});
    c.push_back({"bytes_a2b", ColumnType::i64});
    c.push_back({"bytes_b2a", ColumnType::i64});
    return c;
}

}  // namespace

const std::vector<ColumnSpec>& mandatory_columns(Protocol p) {
    static const std::vector<ColumnSpec> mac_cols = conversation_columns(false);
    static const std::vector<ColumnSpec> udp_cols = conversation_columns(true);
    static const std::vector<ColumnSpec> tcp_cols = {
        {"ts_start", ColumnType::f64},   {"ts_end", ColumnType::f64},
        {"src_ip", ColumnType::text},    {"dst_ip", ColumnType::text},
        {"src_port", ColumnType::i64},   {"dst_port", ColumnType::i64},
        {"pkts_s2d", ColumnType::i64},   {"pkts_d2s", ColumnType::i64},
        {"bytes_s2d", ColumnType::i64},  {"bytes_d2s", ColumnType::i64},
        {"data_pkts_s2d", ColumnType::i64}, {"data_pkts_d2s", ColumnType::i64},
        {"syn_count", ColumnType::i64},  {"synack_count", ColumnType::i64},
        {"ignored_syns", ColumnType::i64},
        {"retx_s2d", ColumnType::i64},   {"retx_d2s", ColumnType::i64},
        {"dupack_s2d", ColumnType::i64}, {"dupack_d2s", ColumnType::i64},
        {"zwin_s2d", ColumnType::i64},   {"zwin_d2s", ColumnType::i64},
        {"cet_s", ColumnType::f64},      {"rtt_s", ColumnType::f64},
    };
    static const std::vector<ColumnSpec> http_cols = {
        {"ts", ColumnType::f64},          {"client_ip", ColumnType::text},
        {"server_ip", ColumnType::text},  {"server_port", ColumnType::i64},
        {"method", ColumnType::text},     {"url", ColumnType::text},
        {"response_code", ColumnType::i64}, {"response_time_s", ColumnType::f64},
    };
    static const std::vector<ColumnSpec> dns_cols = {
        {"ts", ColumnType::f64},         {"client_ip", ColumnType::text},
        {"server_ip", ColumnType::text}, {"query_name", ColumnType::text},
        {"qtype", ColumnType::text},     {"rcode", ColumnType::i64},
        {"response_time_ms", ColumnType::f64},
    };
    static const std::vector<ColumnSpec> icmp_cols = {
        {"ts", ColumnType::f64},      {"src_ip", ColumnType::text},
        {"dst_ip", ColumnType::text}, {"icmp_type", ColumnType::i64},
        {"icmp_code", ColumnType::i64}, {"count", ColumnType::i64},
    };
    switch (p) {
        case Protocol::mac:
        case Protocol::ip: return mac_cols;
        case Protocol::udp: return udp_cols;
        case Protocol::tcp: return tcp_cols;
        case Protocol::http: return http_cols;
        case Protocol::dns: return dns_cols;
        case Protocol::icmp: return icmp_cols;
    }
    return mac_cols;
}

ColumnType column_type(Protocol p, std::string_view column) {
    for (const auto& spec : mandatory_columns(p))
        if (spec.name == column) return spec.type;
    return ColumnType::text;
}

}  // namespace flowrep
