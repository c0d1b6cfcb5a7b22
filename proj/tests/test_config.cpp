#include "doctest.h"
#include "flowrep/config.hpp"
#include "flowrep/errors.hpp"
#include "helpers.hpp"

using namespace flowrep;

TEST_CASE("config round-trips through dump and parse") {
    Config defaults = Config::defaults();
    Config reparsed = Config::from_string(defaults.dump());
    CHECK(reparsed == defaults);

    // A modified config round-trips too.
    Config tweaked = defaults;
    tweaked.burst.threshold_bps = 250e6;
    tweaked.schedule = SchedulePolicy::smart;
    tweaked.rag.http.median_rt_threshold_s = 0.2;
    tweaked.heavy_stages = {"tcp", "bursts", "http"};
    tweaked.gnuplot_scripts = true;
    Config back = Config::from_string(tweaked.dump());
    CHECK(back == tweaked);
    CHECK(back.burst.threshold_bps == 250e6);
    CHECK(back.heavy_stages.size() == 3);
}

TEST_CASE("the default config carries every KPI-table constant") {
    std::string dump = Config::defaults().dump();
    // TCP rows: 5% triggers scoring 2 per unit.
    for (const char* kpi : {"dupack_s2d", "dupack_d2s", "retx_s2d", "retx_d2s", "zwin_d2s"}) {
        CHECK(dump.find("rag.tcp." + std::string(kpi) + ".trigger_pct=5") != std::string::npos);
        CHECK(dump.find("rag.tcp." + std::string(kpi) + ".score_per_unit=2") !=
              std::string::npos);
    }
    CHECK(dump.find("rag.tcp.downtime.score=25") != std::string::npos);
    CHECK(dump.find("rag.tcp.downtime.inactive_share=0.9") != std::string::npos);
    CHECK(dump.find("rag.tcp.cet.threshold_s=0.1") != std::string::npos);
    CHECK(dump.find("rag.tcp.cet.score=50") != std::string::npos);
    CHECK(dump.find("rag.tcp.rtt.threshold_s=1") != std::string::npos);
    CHECK(dump.find("rag.tcp.rtt.score=50") != std::string::npos);
    CHECK(dump.find("rag.tcp.sustained_buckets=5") != std::string::npos);
    CHECK(dump.find("rag.tcp.spike_factor=10") != std::string::npos);
    CHECK(dump.find("rag.tcp.score_per_ignored_syn=0.1") != std::string::npos);
    CHECK(dump.find("rag.tcp.score_per_connection=0.01") != std::string::npos);
    CHECK(dump.find("rag.tcp.no_synack_min_syn_records=1000") != std::string::npos);
    CHECK(dump.find("rag.tcp.no_synack_fixed_score=10") != std::string::npos);
    CHECK(dump.find("rag.tcp.score_per_mbyte=0.1") != std::string::npos);
    // HTTP rows.
    CHECK(dump.find("rag.http.server_errors.trigger_pct=5") != std::string::npos);
    CHECK(dump.find("rag.http.server_errors.weight=3") != std::string::npos);
    CHECK(dump.find("rag.http.client_errors.trigger_pct=20") != std::string::npos);
    CHECK(dump.find("rag.http.client_errors.weight=1") != std::string::npos);
    CHECK(dump.find("rag.http.median_rt.threshold_s=0.1") != std::string::npos);
    CHECK(dump.find("rag.http.median_rt.score=50") != std::string::npos);
    CHECK(dump.find("rag.http.mean_rt.threshold_s=0.5") != std::string::npos);
    CHECK(dump.find("rag.http.mean_rt.score=50") != std::string::npos);
    CHECK(dump.find("rag.http.score_per_acc_time_pct=2") != std::string::npos);
    CHECK(dump.find("rag.http.score_per_transaction=1") != std::string::npos);
    // DNS rows.
    CHECK(dump.find("rag.dns.errors.trigger_pct=5") != std::string::npos);
    CHECK(dump.find("rag.dns.errors.score_per_pct=2") != std::string::npos);
    CHECK(dump.find("rag.dns.median_rt.threshold_ms=100") != std::string::npos);
    CHECK(dump.find("rag.dns.median_rt.score=50") != std::string::npos);
    CHECK(dump.find("rag.dns.mean_rt.threshold_ms=500") != std::string::npos);
    CHECK(dump.find("rag.dns.mean_rt.score=50") != std::string::npos);
    CHECK(dump.find("rag.dns.score_per_acc_time_pct=1") != std::string::npos);
    CHECK(dump.find("rag.dns.score_per_transaction=1") != std::string::npos);
    // Burst default threshold is the 100 Mbps from the detection examples.
    CHECK(dump.find("burst.threshold_bps=1e+08") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_WITH_AS(Config::from_string("no.such.key=1\n"),
                         doctest::Contains("unknown configuration key"), ConfigError);
}

TEST_CASE("malformed values and lines are rejected") {
    CHECK_THROWS_AS(Config::from_string("burst.threshold_bps=abc\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("just-some-text\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("report.gnuplot_scripts=yes\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("schedule.policy=fastest\n"), ConfigError);
}

TEST_CASE("comments, blank lines and whitespace are tolerated") {
    Config cfg = Config::from_string(
        "# a comment\n"
        "\n"
        "  burst.threshold_bps = 5e7  \n"
        "schedule.policy=smart\n");
    CHECK(cfg.burst.threshold_bps == 5e7);
    CHECK(cfg.schedule == SchedulePolicy::smart);
}

TEST_CASE("validation rejects non-positive required parameters") {
    CHECK_THROWS_WITH_AS(Config::from_string("burst.threshold_bps=-1\n"),
                         doctest::Contains("must be positive"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("series.variability_window_bins=4\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("report.top_n=0\n"), ConfigError);
}

TEST_CASE("the shipped default config file parses to the built-in defaults") {
    // configs/default.conf is generated from Config::defaults().dump(); this
    // guards against drift.
    auto path = std::filesystem::path(__FILE__).parent_path().parent_path() / "configs" /
                "default.conf";
    REQUIRE(std::filesystem::exists(path));
    Config from_file = Config::from_file(path);
    CHECK(from_file == Config::defaults());
}
