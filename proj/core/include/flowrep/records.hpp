#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowrep {

// Enriched flow-record types, one per dissected protocol layer. Records are
// immutable value types once filled in; validate() reports every invariant
// violation as data instead of throwing.

enum class Protocol { mac, ip, udp, tcp, http, dns, icmp };

const char* protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);

/// MAC, IP and UDP conversations share one shape; UDP adds ports.
struct ConversationRecord {
    Protocol layer = Protocol::ip;  // mac, ip or udp
    double ts_start = 0.0;
    double ts_end = 0.0;
    std::string endpoint_a;
    std::string endpoint_b;
    std::optional<int64_t> port_a;  // UDP only
    std::optional<int64_t> port_b;
    int64_t pkts_a2b = 0;
    int64_t pkts_b2a = 0;
    int64_t bytes_a2b = 0;
    int64_t bytes_b2a = 0;

    std::vector<std::string> validate() const;
};

struct TcpRecord {
    double ts_start = 0.0;
    double ts_end = 0.0;
    std::string src_ip;
    std::string dst_ip;
    int64_t src_port = 0;
    int64_t dst_port = 0;
    int64_t pkts_s2d = 0;
    int64_t pkts_d2s = 0;
    int64_t bytes_s2d = 0;
    int64_t bytes_d2s = 0;
    int64_t data_pkts_s2d = 0;
    int64_t data_pkts_d2s = 0;
    int64_t syn_count = 0;
    int64_t synack_count = 0;
    int64_t ignored_syns = 0;
    int64_t retx_s2d = 0;
    int64_t retx_d2s = 0;
    int64_t dupack_s2d = 0;
    int64_t dupack_d2s = 0;
    int64_t zwin_s2d = 0;
    int64_t zwin_d2s = 0;
    std::optional<double> cet_s;  // connection establishment time
    std::optional<double> rtt_s;  // SYN-ACK -> ACK estimate

    std::vector<std::string> validate() const;
};

struct HttpRecord {
    double ts = 0.0;
    std::string client_ip;
    std::string server_ip;
    int64_t server_port = 0;
    std::string method;
    std::string url;
    int64_t response_code = 0;  // 0 = no response seen
    std::optional<double> response_time_s;

    std::vector<std::string> validate() const;
};

struct DnsRecord {
    double ts = 0.0;
    std::string client_ip;
    std::string server_ip;
    std::string query_name;
    std::string qtype;
    int64_t rcode = -1;  // -1 = no response seen
    std::optional<double> response_time_ms;

    std::vector<std::string> validate() const;
};

struct IcmpRecord {
    double ts = 0.0;
    std::string src_ip;
    std::string dst_ip;
    int64_t icmp_type = 0;
    int64_t icmp_code = 0;
    int64_t count = 1;

    std::vector<std::string> validate() const;
};

// On-disk column layout. Semantic types drive parsing: seconds-typed fields
// round-trip to 6 decimal places, counts bit-exactly, addresses as opaque text.
enum class ColumnType { f64, i64, text };

struct ColumnSpec {
    std::string name;
    ColumnType type = ColumnType::text;
};

/// Mandatory columns for a protocol file, in canonical order.
const std::vector<ColumnSpec>& mandatory_columns(Protocol p);

/// Declared semantic type for a column of the given protocol; text for
/// unknown (extra) columns, which are preserved opaquely.
ColumnType column_type(Protocol p, std::string_view column);

}  // namespace flowrep
