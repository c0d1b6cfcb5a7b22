#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "flowrep/dataset.hpp"
#include "flowrep/op_chain.hpp"
#include "flowrep/records.hpp"
#include "flowrep/writer.hpp"
#include "helpers.hpp"

using namespace flowrep;

namespace {

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) {
        return s.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("validate flags ts ordering violations") {
    TcpRecord r;
    r.ts_start = 10;
    r.ts_end = 5;
    r.src_ip = "10.0.0.1";
    r.dst_ip = "10.0.0.2";
    auto v = r.validate();
    CHECK(has_violation(v, "ts_start > ts_end"));
}

TEST_CASE("validate accepts a well-formed http record") {
    HttpRecord r;
    r.ts = 100.5;
    r.client_ip = "10.0.0.1";
    r.server_ip = "192.168.1.1";
    r.server_port = 80;
    r.method = "GET";
    r.url = "/";
    r.response_code = 200;
    r.response_time_s = 0.02;
    CHECK(r.validate().empty());
}

TEST_CASE("validate flags icmp type out of range") {
    IcmpRecord r;
    r.ts = 1;
    r.icmp_type = 300;
    r.icmp_code = 0;
    r.count = 1;
    auto v = r.validate();
    CHECK(has_violation(v, "icmp_type out of range"));
}

TEST_CASE("validate covers the remaining record invariants") {
    ConversationRecord c;
    c.layer = Protocol::udp;
    c.ts_start = 1;
    c.ts_end = 2;
    c.pkts_a2b = -1;
    auto v = c.validate();
    CHECK(has_violation(v, "pkts_a2b"));
    CHECK(has_violation(v, "missing ports"));

    c.layer = Protocol::ip;
    c.pkts_a2b = 0;
    c.port_a = 80;
    CHECK(has_violation(c.validate(), "carries ports"));

    TcpRecord t;
    t.ts_start = 0;
    t.ts_end = 1;
    t.pkts_s2d = 5;
    t.retx_s2d = 9;
    CHECK(has_violation(t.validate(), "retx_s2d > pkts_s2d"));
    t.retx_s2d = 0;
    t.cet_s = -0.5;
    CHECK(has_violation(t.validate(), "cet_s negative"));

    HttpRecord h;
    h.response_code = 99;
    CHECK(has_violation(h.validate(), "response_code out of range"));
    h.response_code = 0;  // no response seen: valid
    CHECK(h.validate().empty());

    DnsRecord d;
    d.rcode = -1;  // no response: valid
    CHECK(d.validate().empty());
    d.response_time_ms = -3;
    CHECK(has_violation(d.validate(), "response_time_ms negative"));

    IcmpRecord i;
    i.count = 0;
    CHECK(has_violation(i.validate(), "count < 1"));
}

TEST_CASE("mandatory columns differ per layer") {
    auto names = [](Protocol p) {
        std::vector<std::string> out;
        for (const auto& spec : mandatory_columns(p)) out.push_back(spec.name);
        return out;
    };
    auto udp = names(Protocol::udp);
    auto ip = names(Protocol::ip);
    CHECK(std::count(udp.begin(), udp.end(), "port_a") == 1);
    CHECK(std::count(ip.begin(), ip.end(), "port_a") == 0);
    CHECK(column_type(Protocol::tcp, "cet_s") == ColumnType::f64);
    CHECK(column_type(Protocol::tcp, "retx_s2d") == ColumnType::i64);
    CHECK(column_type(Protocol::tcp, "some_extra_column") == ColumnType::text);
}

TEST_CASE("serialization round-trips integers exactly and seconds to 6 decimals") {
    testutil::TempDir dir("roundtrip");

    TcpRecord t;
    t.ts_start = 1600000123.1234564;
    t.ts_end = 1600000125.7654329;
    t.src_ip = "10.0.0.7";
    t.dst_ip = "192.168.1.2";
    t.src_port = 51515;
    t.dst_port = 443;
    t.pkts_s2d = 1234567;
    t.pkts_d2s = 7654321;
    t.bytes_s2d = 999999999999;
    t.bytes_d2s = 1;
    t.data_pkts_s2d = 10;
    t.data_pkts_d2s = 20;
    t.syn_count = 2;
    t.synack_count = 1;
    t.ignored_syns = 1;
    t.retx_s2d = 3;
    t.retx_d2s = 4;
    t.dupack_s2d = 5;
    t.dupack_d2s = 6;
    t.zwin_s2d = 0;
    t.zwin_d2s = 7;
    t.cet_s = 0.123456;
    t.rtt_s = std::nullopt;  // absent must survive as absent, not zero

    {
        RecordFileWriter w(dir.path() / "tcp.records", mandatory_columns(Protocol::tcp));
        w.write_row(to_fields(t));
    }
    Dataset ds = Dataset::open(dir.path());
    OpChain chain(ds, Protocol::tcp);
    const RecordBatch& batch = chain.materialize();
    REQUIRE(batch.rows == 1);
    TcpRecord back = tcp_from_batch(batch, 0);

    CHECK(back.src_ip == t.src_ip);
    CHECK(back.dst_ip == t.dst_ip);
    CHECK(back.src_port == t.src_port);
    CHECK(back.pkts_s2d == t.pkts_s2d);
    CHECK(back.bytes_s2d == t.bytes_s2d);
    CHECK(back.bytes_d2s == t.bytes_d2s);
    CHECK(back.zwin_d2s == t.zwin_d2s);
    CHECK(std::abs(back.ts_start - t.ts_start) <= 1e-6);
    CHECK(std::abs(back.ts_end - t.ts_end) <= 1e-6);
    REQUIRE(back.cet_s.has_value());
    CHECK(std::abs(*back.cet_s - *t.cet_s) <= 1e-6);
    CHECK_FALSE(back.rtt_s.has_value());

    // The other record shapes, one instance each.
    {
        ConversationRecord u;
        u.layer = Protocol::udp;
        u.ts_start = 10.5;
        u.ts_end = 11.25;
        u.endpoint_a = "10.0.0.1";
        u.endpoint_b = "192.168.1.9";
        u.port_a = 1234;
        u.port_b = 53;
        u.pkts_a2b = 2;
        u.pkts_b2a = 2;
        u.bytes_a2b = 180;
        u.bytes_b2a = 512;
        RecordFileWriter w(dir.path() / "udp.records", mandatory_columns(Protocol::udp));
        w.write_row(to_fields(u));
        w.close();
        Dataset ds2 = Dataset::open(dir.path());
        OpChain c2(ds2, Protocol::udp);
        ConversationRecord back2 = conversation_from_batch(c2.materialize(), 0, Protocol::udp);
        CHECK(back2.endpoint_b == "192.168.1.9");
        CHECK(back2.port_b == 53);
        CHECK(back2.bytes_b2a == 512);
        CHECK(back2.validate().empty());
    }

    {
        HttpRecord h;
        h.ts = 1600000000.25;
        h.client_ip = "10.0.0.1";
        h.server_ip = "192.168.1.1";
        h.server_port = 8080;
        h.method = "POST";
        h.url = "/api/v1/items";
        h.response_code = 503;
        h.response_time_s = 1.5;
        RecordFileWriter w(dir.path() / "http.records", mandatory_columns(Protocol::http));
        w.write_row(to_fields(h));
        w.close();
        Dataset ds2 = Dataset::open(dir.path());
        OpChain c2(ds2, Protocol::http);
        HttpRecord back2 = http_from_batch(c2.materialize(), 0);
        CHECK(back2.url == h.url);
        CHECK(back2.response_code == 503);
        CHECK(std::abs(*back2.response_time_s - 1.5) <= 1e-6);
    }
}
