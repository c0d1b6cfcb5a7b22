#include "flowrep/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "flowrep/errors.hpp"
#include "flowrep/text.hpp"

namespace flowrep {

const char* schedule_policy_name(SchedulePolicy p) {
    switch (p) {
        case SchedulePolicy::sequential: return "sequential";
        case SchedulePolicy::parallel: return "parallel";
        case SchedulePolicy::smart: return "smart";
    }
    return "?";
}

namespace {

struct Binding {
    std::string key;
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&)> set;
};

double parse_num(const std::string& key, const std::string& v) {
    auto d = parse_f64(v);
    if (!d) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return *d;
}

uint64_t parse_count(const std::string& key, const std::string& v) {
    auto i = parse_i64(v);
    if (!i || *i < 0) throw ConfigError("key '" + key + "': '" + v + "' is not a count");
    return static_cast<uint64_t>(*i);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

#define NUM_KEY(KEY, FIELD)                                                     \
    Binding{KEY, [](const Config& c) { return format_f64(c.FIELD); },           \
            [](Config& c, const std::string& v) { c.FIELD = parse_num(KEY, v); }}
#define COUNT_KEY(KEY, FIELD)                                                   \
    Binding{KEY, [](const Config& c) { return format_i64(static_cast<int64_t>(c.FIELD)); }, \
            [](Config& c, const std::string& v) { c.FIELD = parse_count(KEY, v); }}
#define BOOL_KEY(KEY, FIELD)                                                    \
    Binding{KEY, [](const Config& c) { return c.FIELD ? "true" : "false"; },    \
            [](Config& c, const std::string& v) { c.FIELD = parse_bool(KEY, v); }}
#define PCT_RULE_KEYS(PREFIX, FIELD)                                            \
    NUM_KEY(PREFIX ".trigger_pct", FIELD.trigger_pct),                          \
    NUM_KEY(PREFIX ".score_per_unit", FIELD.score_per_unit)

const std::vector<Binding>& registry() {
    static const std::vector<Binding> bindings = {
        NUM_KEY("burst.threshold_bps", burst.threshold_bps),
        NUM_KEY("burst.min_duration_s", burst.min_duration_s),
        NUM_KEY("burst.min_avg_rate_bps", burst.min_avg_rate_bps),
        NUM_KEY("burst.max_gap_s", burst.max_gap_s),
        Binding{"burst.cause_score",
                [](const Config& c) {
                    return c.cause_score == CauseScoreMode::window_max ? "max" : "mean";
                },
                [](Config& c, const std::string& v) {
                    if (v == "max") c.cause_score = CauseScoreMode::window_max;
                    else if (v == "mean") c.cause_score = CauseScoreMode::window_mean;
                    else throw ConfigError("key 'burst.cause_score': expected max or mean");
                }},

        PCT_RULE_KEYS("rag.tcp.dupack_s2d", rag.tcp.dupack_s2d),
        PCT_RULE_KEYS("rag.tcp.dupack_d2s", rag.tcp.dupack_d2s),
        PCT_RULE_KEYS("rag.tcp.retx_s2d", rag.tcp.retx_s2d),
        PCT_RULE_KEYS("rag.tcp.retx_d2s", rag.tcp.retx_d2s),
        PCT_RULE_KEYS("rag.tcp.zwin_d2s", rag.tcp.zwin_d2s),
        NUM_KEY("rag.tcp.downtime.inactive_share", rag.tcp.downtime_inactive_share),
        NUM_KEY("rag.tcp.downtime.score", rag.tcp.downtime_score),
        NUM_KEY("rag.tcp.cet.threshold_s", rag.tcp.cet_threshold_s),
        NUM_KEY("rag.tcp.cet.score", rag.tcp.cet_score),
        NUM_KEY("rag.tcp.rtt.threshold_s", rag.tcp.rtt_threshold_s),
        NUM_KEY("rag.tcp.rtt.score", rag.tcp.rtt_score),
        COUNT_KEY("rag.tcp.sustained_buckets", rag.tcp.sustained_buckets),
        NUM_KEY("rag.tcp.spike_factor", rag.tcp.spike_factor),
        NUM_KEY("rag.tcp.score_per_ignored_syn", rag.tcp.score_per_ignored_syn),
        NUM_KEY("rag.tcp.score_per_connection", rag.tcp.score_per_connection),
        COUNT_KEY("rag.tcp.no_synack_min_syn_records", rag.tcp.no_synack_min_syn_records),
        NUM_KEY("rag.tcp.no_synack_fixed_score", rag.tcp.no_synack_fixed_score),
        NUM_KEY("rag.tcp.score_per_mbyte", rag.tcp.score_per_mbyte),

        NUM_KEY("rag.http.server_errors.trigger_pct", rag.http.server_error_trigger_pct),
        NUM_KEY("rag.http.server_errors.weight", rag.http.server_error_weight),
        NUM_KEY("rag.http.client_errors.trigger_pct", rag.http.client_error_trigger_pct),
        NUM_KEY("rag.http.client_errors.weight", rag.http.client_error_weight),
        NUM_KEY("rag.http.median_rt.threshold_s", rag.http.median_rt_threshold_s),
        NUM_KEY("rag.http.median_rt.score", rag.http.median_rt_score),
        NUM_KEY("rag.http.mean_rt.threshold_s", rag.http.mean_rt_threshold_s),
        NUM_KEY("rag.http.mean_rt.score", rag.http.mean_rt_score),
        NUM_KEY("rag.http.score_per_acc_time_pct", rag.http.score_per_acc_time_pct),
        NUM_KEY("rag.http.score_per_transaction", rag.http.score_per_transaction),

        NUM_KEY("rag.dns.errors.trigger_pct", rag.dns.error_trigger_pct),
        NUM_KEY("rag.dns.errors.score_per_pct", rag.dns.score_per_error_pct),
        NUM_KEY("rag.dns.median_rt.threshold_ms", rag.dns.median_rt_threshold_ms),
        NUM_KEY("rag.dns.median_rt.score", rag.dns.median_rt_score),
        NUM_KEY("rag.dns.mean_rt.threshold_ms", rag.dns.mean_rt_threshold_ms),
        NUM_KEY("rag.dns.mean_rt.score", rag.dns.mean_rt_score),
        NUM_KEY("rag.dns.score_per_acc_time_pct", rag.dns.score_per_acc_time_pct),
        NUM_KEY("rag.dns.score_per_transaction", rag.dns.score_per_transaction),
        BOOL_KEY("rag.dns.no_response_is_error", rag.dns.no_response_is_error),

        NUM_KEY("rag.bucket_width_s", rag.bucket_width_s),

        Binding{"schedule.policy",
                [](const Config& c) { return std::string(schedule_policy_name(c.schedule)); },
                [](Config& c, const std::string& v) {
                    if (v == "sequential") c.schedule = SchedulePolicy::sequential;
                    else if (v == "parallel") c.schedule = SchedulePolicy::parallel;
                    else if (v == "smart") c.schedule = SchedulePolicy::smart;
                    else
                        throw ConfigError(
                            "key 'schedule.policy': expected sequential, parallel or smart");
                }},
        Binding{"report.format",
                [](const Config& c) { return std::string(report_format_name(c.format)); },
                [](Config& c, const std::string& v) {
                    if (v == "markdown") c.format = ReportFormat::markdown;
                    else if (v == "latex") c.format = ReportFormat::latex;
                    else if (v == "text") c.format = ReportFormat::text;
                    else
                        throw ConfigError(
                            "key 'report.format': expected markdown, latex or text");
                }},
        Binding{"stages.heavy",
                [](const Config& c) {
                    std::string out;
                    for (size_t i = 0; i < c.heavy_stages.size(); ++i) {
                        if (i) out += ',';
                        out += c.heavy_stages[i];
                    }
                    return out;
                },
                [](Config& c, const std::string& v) {
                    c.heavy_stages.clear();
                    for (auto part : split(v, ','))
                        if (!part.empty()) c.heavy_stages.emplace_back(part);
                }},
        NUM_KEY("series.resolution_s", series_resolution_s),
        COUNT_KEY("series.variability_window_bins", variability_window_bins),
        COUNT_KEY("report.top_n", top_n),
        BOOL_KEY("report.gnuplot_scripts", gnuplot_scripts),
        COUNT_KEY("io.row_cap", row_cap),
        BOOL_KEY("io.skip_bad_rows", skip_bad_rows),
    };
    return bindings;
}

#undef NUM_KEY
#undef COUNT_KEY
#undef BOOL_KEY
#undef PCT_RULE_KEYS

const Binding& find_binding(const std::string& key) {
    for (const auto& b : registry())
        if (b.key == key) return b;
    throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

Config Config::from_string(const std::string& content) {
    Config cfg;
    std::istringstream in(content);
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        size_t vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t'))
            value.pop_back();
        find_binding(key).set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

std::string Config::dump() const {
    std::ostringstream out;
    out << "# flowreport configuration (all keys, effective values)\n";
    for (const auto& b : registry()) out << b.key << '=' << b.get(*this) << '\n';
    return out.str();
}

void Config::validate() const {
    struct Check { const char* name; double v; };
    const Check positives[] = {
        {"burst.threshold_bps", burst.threshold_bps},
        {"burst.min_duration_s", burst.min_duration_s},
        {"burst.min_avg_rate_bps", burst.min_avg_rate_bps},
        {"burst.max_gap_s", burst.max_gap_s},
        {"rag.bucket_width_s", rag.bucket_width_s},
        {"series.resolution_s", series_resolution_s},
        {"rag.tcp.spike_factor", rag.tcp.spike_factor},
    };
    for (const auto& c : positives)
        if (!(c.v > 0))
            throw ConfigError(std::string("key '") + c.name + "' must be positive");
    if (variability_window_bins == 0 || variability_window_bins % 2 == 0)
        throw ConfigError("key 'series.variability_window_bins' must be odd and >= 1");
    if (top_n == 0) throw ConfigError("key 'report.top_n' must be >= 1");
    if (row_cap == 0) throw ConfigError("key 'io.row_cap' must be >= 1");
}

}  // namespace flowrep
