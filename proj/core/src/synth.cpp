#include "flowrep/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "flowrep/records.hpp"
#include "flowrep/text.hpp"
#include "flowrep/writer.hpp"

namespace flowrep {

using ordered_json = nlohmann::ordered_json;

double Rng::exponential(double mean) {
    double u = uniform();
    if (u <= 0) u = 1e-12;
    return -mean * std::log(1.0 - u);
}

double Rng::normal(double mu, double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return mu + sigma * spare_;
    }
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0) u1 = 1e-12;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mu + sigma * r * std::cos(a);
}

double Rng::lognormal(double median, double sigma) {
    return median * std::exp(normal(0.0, sigma));
}

namespace {

constexpr const char* kBurstCauses[] = {"connection_count", "bytes_per_connection",
                                        "udp_flows"};
constexpr const char* kSickKpis[] = {"retx_s2d", "retx_d2s", "dupack_s2d",
                                     "dupack_d2s", "zwin_d2s", "cet", "rtt"};

bool one_of(const std::string& v, const char* const* names, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (v == names[i]) return true;
    return false;
}

double get_num(const nlohmann::json& j, const std::string& field, double fallback,
               bool required = false) {
    if (!j.contains(field)) {
        if (required) throw std::invalid_argument("scenario spec: missing field '" + field + "'");
        return fallback;
    }
    if (!j[field].is_number())
        throw std::invalid_argument("scenario spec: field '" + field + "' must be a number");
    return j[field].get<double>();
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json(const std::string& content) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario spec: invalid JSON: ") + e.what());
    }
    ScenarioSpec spec;
    spec.seed = static_cast<uint64_t>(get_num(j, "seed", 1));
    spec.duration_s = get_num(j, "duration_s", 600, true);
    spec.start_epoch = get_num(j, "start_epoch", spec.start_epoch);
    spec.clients = static_cast<int>(get_num(j, "clients", spec.clients));
    spec.servers = static_cast<int>(get_num(j, "servers", spec.servers));
    if (j.contains("gzip")) {
        if (!j["gzip"].is_boolean())
            throw std::invalid_argument("scenario spec: field 'gzip' must be a boolean");
        spec.gzip = j["gzip"].get<bool>();
    }
    if (j.contains("rates")) {
        if (!j["rates"].is_object())
            throw std::invalid_argument("scenario spec: field 'rates' must be an object");
        for (const auto& [proto, rate] : j["rates"].items()) {
            if (!protocol_from_name(proto) || proto == "mac" || proto == "ip")
                throw std::invalid_argument("scenario spec: rates: unknown protocol '" + proto +
                                            "' (mac/ip are derived)");
            if (!rate.is_number() || rate.get<double>() < 0)
                throw std::invalid_argument("scenario spec: rates." + proto +
                                            " must be a non-negative number");
            spec.rates[proto] = rate.get<double>();
        }
    }
    if (j.contains("anomalies")) {
        if (!j["anomalies"].is_array())
            throw std::invalid_argument("scenario spec: field 'anomalies' must be an array");
        for (const auto& a : j["anomalies"]) {
            std::string kind = a.value("kind", "");
            if (kind == "burst") {
                PlantedBurst b;
                b.cause = a.value("cause", "connection_count");
                b.start_s = get_num(a, "start_s", 0, true);
                b.end_s = get_num(a, "end_s", 0, true);
                b.magnitude_bps = get_num(a, "magnitude_bps", b.magnitude_bps);
                spec.bursts.push_back(b);
            } else if (kind == "sick_tcp_server") {
                SickTcpServer s;
                s.kpi = a.value("kpi", "retx_s2d");
                s.level = get_num(a, "level", s.level);
                spec.sick_tcp.push_back(s);
            } else if (kind == "slow_http_server") {
                SlowHttpServer s;
                s.median_rt_s = get_num(a, "median_rt_s", s.median_rt_s);
                spec.slow_http.push_back(s);
            } else if (kind == "dns_error_server") {
                DnsErrorServer s;
                s.error_pct = get_num(a, "error_pct", s.error_pct);
                spec.dns_errors.push_back(s);
            } else {
                throw std::invalid_argument("scenario spec: anomalies: unknown kind '" + kind +
                                            "'");
            }
        }
    }
    spec.validate_or_throw();
    return spec;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario spec " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(content);
}

void ScenarioSpec::validate_or_throw() const {
    if (duration_s <= 0) throw std::invalid_argument("scenario spec: duration_s must be > 0");
    if (clients < 1) throw std::invalid_argument("scenario spec: clients must be >= 1");
    if (servers < 1) throw std::invalid_argument("scenario spec: servers must be >= 1");
    for (const auto& b : bursts) {
        if (!one_of(b.cause, kBurstCauses, 3))
            throw std::invalid_argument("scenario spec: bursts.cause '" + b.cause +
                                        "' is not a known cause");
        if (b.start_s < 0 || b.end_s > duration_s || b.start_s >= b.end_s)
            throw std::invalid_argument(
                "scenario spec: bursts.start_s/end_s must satisfy 0 <= start < end <= "
                "duration_s");
        if (b.magnitude_bps <= 0)
            throw std::invalid_argument("scenario spec: bursts.magnitude_bps must be > 0");
    }
    for (const auto& s : sick_tcp) {
        if (!one_of(s.kpi, kSickKpis, 7))
            throw std::invalid_argument("scenario spec: sick_tcp.kpi '" + s.kpi +
                                        "' is not a known KPI");
        bool is_time = s.kpi == "cet" || s.kpi == "rtt";
        if (!is_time && (s.level < 0 || s.level > 100))
            throw std::invalid_argument("scenario spec: sick_tcp.level must be a percentage");
        if (is_time && s.level <= 0)
            throw std::invalid_argument("scenario spec: sick_tcp.level must be > 0 seconds");
    }
    for (const auto& s : slow_http)
        if (s.median_rt_s <= 0)
            throw std::invalid_argument("scenario spec: slow_http.median_rt_s must be > 0");
    for (const auto& s : dns_errors)
        if (s.error_pct < 0 || s.error_pct > 100)
            throw std::invalid_argument("scenario spec: dns_errors.error_pct must be 0..100");
}

namespace {

std::string mac_of(const std::string& ip) {
    uint32_t h = 2166136261u;
    for (char c : ip) h = (h ^ static_cast<uint8_t>(c)) * 16777619u;
    char buf[18];
    std::snprintf(buf, sizeof(buf), "02:00:%02x:%02x:%02x:%02x", (h >> 24) & 0xff,
                  (h >> 16) & 0xff, (h >> 8) & 0xff, h & 0xff);
    return buf;
}

struct Generator {
    const ScenarioSpec& spec;
    Rng rng;
    std::vector<std::string> clients;
    std::vector<std::string> servers;
    std::vector<std::string> dns_servers;

    std::vector<TcpRecord> tcp;
    std::vector<ConversationRecord> udp;
    std::vector<HttpRecord> http;
    std::vector<DnsRecord> dns;
    std::vector<IcmpRecord> icmp;
    std::vector<ConversationRecord> ip;
    std::vector<ConversationRecord> mac;

    GenerateResult result;

    explicit Generator(const ScenarioSpec& s) : spec(s), rng(s.seed) {
        for (int i = 0; i < spec.clients; ++i)
            clients.push_back("10.0." + format_i64(i / 250) + "." + format_i64(1 + i % 250));
        for (int i = 0; i < spec.servers; ++i)
            servers.push_back("192.168.1." + format_i64(i + 1));
        int n_dns = std::max(2, spec.servers / 3);
        for (int i = 0; i < n_dns; ++i)
            dns_servers.push_back("192.168.2." + format_i64(i + 1));
    }

    double rate(const std::string& proto) const {
        auto it = spec.rates.find(proto);
        return it == spec.rates.end() ? 0.0 : it->second;
    }

    const std::string& pick(const std::vector<std::string>& pool) {
        return pool[rng.uniform_int(pool.size())];
    }

    void derive_ip_mac(double ts_start, double ts_end, const std::string& a,
                       const std::string& b, int64_t pkts_ab, int64_t pkts_ba, int64_t bytes_ab,
                       int64_t bytes_ba) {
        ConversationRecord r;
        r.layer = Protocol::ip;
        r.ts_start = ts_start;
        r.ts_end = ts_end;
        r.endpoint_a = a;
        r.endpoint_b = b;
        r.pkts_a2b = pkts_ab;
        r.pkts_b2a = pkts_ba;
        r.bytes_a2b = bytes_ab;
        r.bytes_b2a = bytes_ba;
        ip.push_back(r);
        r.layer = Protocol::mac;
        r.endpoint_a = mac_of(a);
        r.endpoint_b = mac_of(b);
        mac.push_back(std::move(r));
    }

    TcpRecord base_tcp_flow(double start, const std::string& client, const std::string& server,
                            int64_t port, double duration, double rate_bps) {
        TcpRecord r;
        r.ts_start = start;
        r.ts_end = start + duration;
        r.src_ip = client;
        r.dst_ip = server;
        r.src_port = static_cast<int64_t>(20000 + rng.uniform_int(40000));
        r.dst_port = port;
        auto total_bytes = static_cast<int64_t>(rate_bps * duration / 8.0);
        if (total_bytes < 400) total_bytes = 400;
        auto up = static_cast<int64_t>(static_cast<double>(total_bytes) *
                                       rng.uniform(0.05, 0.15));
        r.bytes_s2d = up;
        r.bytes_d2s = total_bytes - up;
        r.pkts_s2d = 3 + up / 600;
        r.pkts_d2s = 3 + r.bytes_d2s / 1400;
        r.data_pkts_s2d = std::max<int64_t>(1, r.pkts_s2d - 2);
        r.data_pkts_d2s = std::max<int64_t>(1, r.pkts_d2s - 2);
        r.syn_count = 1;
        r.synack_count = 1;
        r.ignored_syns = rng.uniform() < 0.01 ? 1 : 0;
        // Baseline pathology noise sits well below the 5% triggers.
        auto noise = [&](int64_t pkts) {
            return static_cast<int64_t>(static_cast<double>(pkts) * rng.uniform(0.0, 0.02));
        };
        r.retx_s2d = noise(r.pkts_s2d);
        r.retx_d2s = noise(r.pkts_d2s);
        r.dupack_s2d = noise(r.pkts_s2d);
        r.dupack_d2s = noise(r.pkts_d2s);
        r.zwin_s2d = 0;
        r.zwin_d2s = noise(r.pkts_d2s) / 2;
        r.cet_s = rng.lognormal(0.02, 0.5);
        r.rtt_s = rng.lognormal(0.03, 0.5);
        return r;
    }

    void push_tcp(const TcpRecord& r) {
        tcp.push_back(r);
        derive_ip_mac(r.ts_start, r.ts_end, r.src_ip, r.dst_ip, r.pkts_s2d, r.pkts_d2s,
                      r.bytes_s2d, r.bytes_d2s);
    }

    void gen_tcp_baseline() {
        double r = rate("tcp");
        if (r <= 0) return;
        const int64_t ports[] = {80, 443, 8080, 3306, 445};
        double t = rng.exponential(1.0 / r);
        while (t < spec.duration_s) {
            double dur = std::clamp(rng.lognormal(5.0, 0.8), 0.2, 30.0);
            double rate_bps = std::clamp(rng.lognormal(60e3, 1.2), 1e3, 8e6);
            push_tcp(base_tcp_flow(spec.start_epoch + t, pick(clients), pick(servers),
                                   ports[rng.uniform_int(5)], dur, rate_bps));
            t += rng.exponential(1.0 / r);
        }
    }

    void gen_sick_servers() {
        for (size_t i = 0; i < spec.sick_tcp.size(); ++i) {
            const SickTcpServer& sick = spec.sick_tcp[i];
            std::string server = "192.168.9." + format_i64(static_cast<int64_t>(i + 1));
            double extra_rate = 3.0;
            double t = rng.exponential(1.0 / extra_rate);
            while (t < spec.duration_s) {
                TcpRecord r = base_tcp_flow(spec.start_epoch + t, pick(clients), server, 443,
                                            std::clamp(rng.lognormal(4.0, 0.5), 0.5, 20.0),
                                            std::clamp(rng.lognormal(40e3, 0.8), 1e3, 1e6));
                // Exact-percentage planting: fixed packet counts so the
                // per-connection ratio equals the requested level.
                r.pkts_s2d = 200;
                r.pkts_d2s = 400;
                r.data_pkts_s2d = 198;
                r.data_pkts_d2s = 398;
                r.retx_s2d = r.retx_d2s = r.dupack_s2d = r.dupack_d2s = r.zwin_s2d =
                    r.zwin_d2s = 0;
                auto planted_s2d = static_cast<int64_t>(std::llround(sick.level * 2.0));
                auto planted_d2s = static_cast<int64_t>(std::llround(sick.level * 4.0));
                if (sick.kpi == "retx_s2d") r.retx_s2d = planted_s2d;
                else if (sick.kpi == "retx_d2s") r.retx_d2s = planted_d2s;
                else if (sick.kpi == "dupack_s2d") r.dupack_s2d = planted_s2d;
                else if (sick.kpi == "dupack_d2s") r.dupack_d2s = planted_d2s;
                else if (sick.kpi == "zwin_d2s") r.zwin_d2s = planted_d2s;
                else if (sick.kpi == "cet") r.cet_s = sick.level * rng.uniform(1.0, 1.3);
                else if (sick.kpi == "rtt") r.rtt_s = sick.level * rng.uniform(1.0, 1.3);
                push_tcp(r);
                t += rng.exponential(1.0 / extra_rate);
            }
            result.anomalies.push_back(
                {"sick_tcp_server", server, sick.kpi, 0, 0, sick.level});
        }
    }

    ConversationRecord base_udp_flow(double start, const std::string& client,
                                     const std::string& server, double duration,
                                     double rate_bps) {
        ConversationRecord r;
        r.layer = Protocol::udp;
        r.ts_start = start;
        r.ts_end = start + duration;
        r.endpoint_a = client;
        r.endpoint_b = server;
        r.port_a = static_cast<int64_t>(20000 + rng.uniform_int(40000));
        const int64_t ports[] = {53, 123, 443, 4500, 514};
        r.port_b = ports[rng.uniform_int(5)];
        auto total = static_cast<int64_t>(rate_bps * duration / 8.0);
        if (total < 200) total = 200;
        auto up = static_cast<int64_t>(static_cast<double>(total) * rng.uniform(0.3, 0.7));
        r.bytes_a2b = up;
        r.bytes_b2a = total - up;
        r.pkts_a2b = 1 + up / 500;
        r.pkts_b2a = 1 + r.bytes_b2a / 500;
        return r;
    }

    void push_udp(const ConversationRecord& r) {
        udp.push_back(r);
        derive_ip_mac(r.ts_start, r.ts_end, r.endpoint_a, r.endpoint_b, r.pkts_a2b, r.pkts_b2a,
                      r.bytes_a2b, r.bytes_b2a);
    }

    void gen_udp_baseline() {
        double r = rate("udp");
        if (r <= 0) return;
        double t = rng.exponential(1.0 / r);
        while (t < spec.duration_s) {
            push_udp(base_udp_flow(spec.start_epoch + t, pick(clients), pick(servers),
                                   std::clamp(rng.lognormal(3.0, 0.8), 0.1, 20.0),
                                   std::clamp(rng.lognormal(20e3, 1.0), 500.0, 2e6)));
            t += rng.exponential(1.0 / r);
        }
    }

    void gen_bursts() {
        for (const PlantedBurst& b : spec.bursts) {
            double span = b.end_s - b.start_s;
            double n_flows, mean_dur;
            if (b.cause == "connection_count") {
                n_flows = span * std::max(rate("tcp") * 4.0, 100.0);
                mean_dur = 1.8;
            } else if (b.cause == "bytes_per_connection") {
                n_flows = std::max(span * 0.5, 8.0);
                mean_dur = 10.0;
            } else {  // udp_flows
                n_flows = span * std::max(rate("udp") * 6.0, 120.0);
                mean_dur = 1.5;
            }
            double concurrency = n_flows * mean_dur / span;
            double per_flow_rate = b.magnitude_bps / concurrency;
            auto n = static_cast<size_t>(n_flows);
            for (size_t i = 0; i < n; ++i) {
                double dur = std::clamp(rng.uniform(0.5, 1.5) * mean_dur, 0.3, span);
                double start = b.start_s + rng.uniform() * (span - dur);
                double rate_bps = per_flow_rate * rng.uniform(0.7, 1.3);
                if (b.cause == "udp_flows") {
                    push_udp(base_udp_flow(spec.start_epoch + start, pick(clients),
                                           pick(servers), dur, rate_bps));
                } else {
                    push_tcp(base_tcp_flow(spec.start_epoch + start, pick(clients),
                                           pick(servers), 443, dur, rate_bps));
                }
            }
            result.anomalies.push_back({"burst", "", b.cause, spec.start_epoch + b.start_s,
                                        spec.start_epoch + b.end_s, b.magnitude_bps});
        }
    }

    HttpRecord base_http(double ts, const std::string& server, int64_t port) {
        static const char* urls[] = {"/",          "/api/v1/items", "/api/v1/users",
                                     "/static/app.js", "/login",    "/healthz",
                                     "/search",    "/images/logo.png"};
        static const char* methods[] = {"GET", "GET", "GET", "POST"};
        HttpRecord r;
        r.ts = ts;
        r.client_ip = pick(clients);
        r.server_ip = server;
        r.server_port = port;
        r.method = methods[rng.uniform_int(4)];
        r.url = urls[rng.uniform_int(8)];
        double u = rng.uniform();
        if (u < 0.015) {
            r.response_code = 500;
        } else if (u < 0.045) {
            r.response_code = 404;
        } else if (u < 0.05) {
            r.response_code = 0;  // no response seen
        } else {
            r.response_code = 200;
        }
        if (r.response_code != 0) r.response_time_s = rng.lognormal(0.03, 0.8);
        return r;
    }

    void gen_http() {
        double r = rate("http");
        if (r > 0) {
            double t = rng.exponential(1.0 / r);
            while (t < spec.duration_s) {
                const std::string& server = pick(servers);
                http.push_back(base_http(spec.start_epoch + t, server,
                                         rng.uniform() < 0.7 ? 80 : 443));
                t += rng.exponential(1.0 / r);
            }
        }
        for (size_t i = 0; i < spec.slow_http.size(); ++i) {
            const SlowHttpServer& slow = spec.slow_http[i];
            std::string server = "192.168.8." + format_i64(static_cast<int64_t>(i + 1));
            double extra_rate = 4.0;
            double t = rng.exponential(1.0 / extra_rate);
            uint64_t k = 0;
            while (t < spec.duration_s) {
                HttpRecord rec = base_http(spec.start_epoch + t, server, 80);
                // Alternate v / 1.2v keeps the empirical median at or above v.
                rec.response_time_s = k % 2 == 0 ? slow.median_rt_s : slow.median_rt_s * 1.2;
                ++k;
                http.push_back(rec);
                t += rng.exponential(1.0 / extra_rate);
            }
            result.anomalies.push_back(
                {"slow_http_server", server + ":80", "median_rt", 0, 0, slow.median_rt_s});
        }
    }

    DnsRecord base_dns(double ts, const std::string& server) {
        static const char* names[] = {"www.example.com",  "api.example.com",
                                      "cdn.example.net",  "db.internal.lan",
                                      "mail.example.com", "auth.example.org"};
        static const char* qtypes[] = {"A", "A", "A", "AAAA", "PTR", "MX"};
        DnsRecord r;
        r.ts = ts;
        r.client_ip = pick(clients);
        r.server_ip = server;
        r.query_name = names[rng.uniform_int(6)];
        r.qtype = qtypes[rng.uniform_int(6)];
        double u = rng.uniform();
        if (u < 0.005) {
            r.rcode = -1;  // no response
        } else if (u < 0.015) {
            r.rcode = 3;
            r.response_time_ms = rng.lognormal(20.0, 0.6);
        } else {
            r.rcode = 0;
            r.response_time_ms = rng.lognormal(20.0, 0.6);
        }
        return r;
    }

    void gen_dns() {
        double r = rate("dns");
        if (r > 0) {
            double t = rng.exponential(1.0 / r);
            while (t < spec.duration_s) {
                dns.push_back(base_dns(spec.start_epoch + t, pick(dns_servers)));
                t += rng.exponential(1.0 / r);
            }
        }
        for (size_t i = 0; i < spec.dns_errors.size(); ++i) {
            const DnsErrorServer& bad = spec.dns_errors[i];
            std::string server = "192.168.7." + format_i64(static_cast<int64_t>(i + 1));
            double extra_rate = 3.0;
            double t = rng.exponential(1.0 / extra_rate);
            uint64_t n = 0;
            double p = bad.error_pct / 100.0;
            while (t < spec.duration_s) {
                DnsRecord rec = base_dns(spec.start_epoch + t, server);
                // Proportional scheduling plants exactly floor(n*p) errors.
                bool err = std::floor(static_cast<double>(n + 1) * p) >
                           std::floor(static_cast<double>(n) * p);
                rec.rcode = err ? 2 : 0;
                if (!rec.response_time_ms) rec.response_time_ms = rng.lognormal(20.0, 0.6);
                ++n;
                dns.push_back(rec);
                t += rng.exponential(1.0 / extra_rate);
            }
            result.anomalies.push_back({"dns_error_server", server, "errors", 0, 0,
                                        bad.error_pct});
        }
    }

    void gen_icmp() {
        double r = rate("icmp");
        if (r <= 0) return;
        double t = rng.exponential(1.0 / r);
        while (t < spec.duration_s) {
            IcmpRecord rec;
            rec.ts = spec.start_epoch + t;
            rec.src_ip = pick(clients);
            rec.dst_ip = pick(servers);
            double u = rng.uniform();
            if (u < 0.45) {
                rec.icmp_type = 8;
                rec.icmp_code = 0;
            } else if (u < 0.9) {
                rec.icmp_type = 0;
                rec.icmp_code = 0;
            } else {
                rec.icmp_type = 3;
                rec.icmp_code = 3;
            }
            rec.count = 1 + static_cast<int64_t>(rng.uniform_int(4));
            icmp.push_back(rec);
            t += rng.exponential(1.0 / r);
        }
    }

    template <typename T, typename KeyFn>
    static void sort_records(std::vector<T>& records, KeyFn key) {
        std::stable_sort(records.begin(), records.end(),
                         [&](const T& a, const T& b) { return key(a) < key(b); });
    }

    template <typename T>
    uint64_t write_file(const std::filesystem::path& dir, Protocol proto,
                        const std::vector<T>& records) {
        std::string name = std::string(protocol_name(proto)) + ".records";
        if (spec.gzip) name += ".gz";
        RecordFileWriter writer(dir / name, mandatory_columns(proto));
        for (const T& r : records) writer.write_row(to_fields(r));
        writer.close();
        return records.size();
    }

    void run(const std::filesystem::path& out_dir) {
        gen_tcp_baseline();
        gen_sick_servers();
        gen_udp_baseline();
        gen_bursts();
        gen_http();
        gen_dns();
        gen_icmp();

        sort_records(tcp, [](const TcpRecord& r) { return r.ts_start; });
        sort_records(udp, [](const ConversationRecord& r) { return r.ts_start; });
        sort_records(ip, [](const ConversationRecord& r) { return r.ts_start; });
        sort_records(mac, [](const ConversationRecord& r) { return r.ts_start; });
        sort_records(http, [](const HttpRecord& r) { return r.ts; });
        sort_records(dns, [](const DnsRecord& r) { return r.ts; });
        sort_records(icmp, [](const IcmpRecord& r) { return r.ts; });

        std::filesystem::create_directories(out_dir);
        result.total_rows += write_file(out_dir, Protocol::mac, mac);
        result.total_rows += write_file(out_dir, Protocol::ip, ip);
        result.total_rows += write_file(out_dir, Protocol::udp, udp);
        result.total_rows += write_file(out_dir, Protocol::tcp, tcp);
        result.total_rows += write_file(out_dir, Protocol::http, http);
        result.total_rows += write_file(out_dir, Protocol::dns, dns);
        result.total_rows += write_file(out_dir, Protocol::icmp, icmp);

        ordered_json truth;
        truth["seed"] = spec.seed;
        truth["duration_s"] = spec.duration_s;
        truth["start_epoch"] = spec.start_epoch;
        truth["anomalies"] = ordered_json::array();
        for (const auto& a : result.anomalies) {
            ordered_json ja;
            ja["kind"] = a.kind;
            if (!a.entity.empty()) ja["entity"] = a.entity;
            ja["detail"] = a.detail;
            if (a.kind == "burst") {
                ja["start"] = a.start;
                ja["end"] = a.end;
            }
            ja["level"] = a.level;
            truth["anomalies"].push_back(ja);
        }
        std::ofstream tf(out_dir / "truth.json");
        tf << truth.dump(2) << '\n';
    }
};

}  // namespace

GenerateResult generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate_or_throw();
    Generator gen(spec);
    gen.run(out_dir);
    return gen.result;
}

CauseScenario make_cause_scenario(uint64_t seed) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0x51ed2701);
    CauseScenario sc;
    const size_t n = 900;
    const double res = 1.0;

    struct Metric { const char* name; double base; };
    const Metric metrics[] = {{"tcp_connections", 800.0},
                              {"udp_flows", 300.0},
                              {"http_transactions", 450.0},
                              {"dns_queries", 200.0},
                              {"mb_per_connection", 2.0}};
    size_t planted = rng.uniform_int(5);
    double start = std::floor(rng.uniform(120.0, 700.0));
    double end = start + 60.0;
    double surge = rng.uniform(4.0, 8.0);

    sc.bps.t0 = 0;
    sc.bps.resolution = res;
    sc.bps.unit = "bits/s";
    sc.bps.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i);
        double v = 55e6 * (1.0 + 0.10 * rng.uniform(-1.0, 1.0));
        if (t >= start && t < end) v += 150e6 * rng.uniform(0.9, 1.1);
        sc.bps.values[i] = v;
    }
    for (size_t m = 0; m < 5; ++m) {
        TimeSeries s;
        s.t0 = 0;
        s.resolution = res;
        s.unit = metrics[m].name;
        s.values.resize(n);
        for (size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i);
            double v = metrics[m].base * (1.0 + 0.15 * rng.uniform(-1.0, 1.0));
            if (m == planted && t >= start && t < end)
                v *= surge * rng.uniform(0.9, 1.1);
            s.values[i] = v;
        }
        sc.candidates.emplace(metrics[m].name, std::move(s));
    }
    sc.planted_metric = metrics[planted].name;
    sc.burst_start = start;
    sc.burst_end = end;
    return sc;
}

}  // namespace flowrep
