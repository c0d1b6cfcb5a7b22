#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include "doctest.h"
#include "flowrep/config.hpp"
#include "helpers.hpp"

using testutil::TempDir;
using testutil::read_text;
using testutil::write_text;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("FLOWREP_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "FLOWREP_BIN must point at the flowrep binary");
    std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string small_spec_json() {
    return R"({"seed": 5, "duration_s": 90,
               "rates": {"tcp": 15, "udp": 8, "http": 10, "dns": 6, "icmp": 1},
               "anomalies": [{"kind": "sick_tcp_server", "kpi": "zwin_d2s", "level": 9}]})";
}

}  // namespace

TEST_CASE("synth command: valid spec exits 0, invalid spec names the field") {
    TempDir dir("cli_synth");
    write_text(dir.path() / "spec.json", small_spec_json());
    RunResult ok = run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                           (dir.path() / "ds").string());
    CHECK(ok.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path() / "ds" / "tcp.records"));
    CHECK(std::filesystem::exists(dir.path() / "ds" / "truth.json"));

    write_text(dir.path() / "bad.json", R"({"duration_s": -5})");
    RunResult bad = run_cli("synth " + (dir.path() / "bad.json").string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("duration_s") != std::string::npos);
}

TEST_CASE("synth is reproducible across separate process invocations") {
    TempDir dir("cli_repro");
    write_text(dir.path() / "spec.json", small_spec_json());
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "a").string())
                .exit_code == 0);
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "b").string())
                .exit_code == 0);
    for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "a")) {
        std::string name = entry.path().filename().string();
        CHECK(read_text(entry.path()) == read_text(dir.path() / "b" / name));
    }
}

TEST_CASE("report command writes the full output tree and exits 0") {
    TempDir dir("cli_report");
    write_text(dir.path() / "spec.json", small_spec_json());
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "ds").string())
                .exit_code == 0);

    RunResult rep = run_cli("report " + (dir.path() / "ds").string() + " --out " +
                            (dir.path() / "out").string());
    CHECK(rep.exit_code == 0);
    std::string md = read_text(dir.path() / "out" / "report.md");
    for (const char* name :
         {"mac", "ip", "udp", "tcp", "http", "dns", "icmp", "bursts", "topology"})
        CHECK(md.find("\n## " + std::string(name) + "\n") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path() / "out" / "schedule_stats.csv"));
    CHECK(std::filesystem::exists(dir.path() / "out" / "charts" / "bursts_bps.svg"));
    CHECK(std::filesystem::exists(dir.path() / "out" / "tables" / "tcp_rag.csv"));
}

TEST_CASE("report on a missing dataset is fatal and leaves no output tree") {
    TempDir dir("cli_missing");
    RunResult rep = run_cli("report " + (dir.path() / "nope").string() + " --out " +
                            (dir.path() / "out").string());
    CHECK(rep.exit_code == 1);
    CHECK(rep.output.find("dataset directory not found") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir.path() / "out"));
}

TEST_CASE("report honors --format text by printing to stdout") {
    TempDir dir("cli_text");
    write_text(dir.path() / "spec.json",
               R"({"seed": 2, "duration_s": 30, "rates": {"tcp": 5}})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "ds").string())
                .exit_code == 0);
    RunResult rep = run_cli("report " + (dir.path() / "ds").string() + " --out " +
                            (dir.path() / "out").string() + " --format text");
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("TRAFFIC REPORT") != std::string::npos);
    CHECK(rep.output.find("SECTION: tcp") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path() / "out" / "report.txt"));
}

TEST_CASE("report rejects bad flag values") {
    TempDir dir("cli_badflag");
    write_text(dir.path() / "spec.json", R"({"seed": 2, "duration_s": 10, "rates": {"tcp": 5}})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "ds").string())
                .exit_code == 0);
    RunResult rep = run_cli("report " + (dir.path() / "ds").string() + " --schedule turbo");
    CHECK(rep.exit_code == 1);
    CHECK(rep.output.find("--schedule") != std::string::npos);
}

TEST_CASE("report reads configuration files and rejects unknown keys") {
    TempDir dir("cli_config");
    write_text(dir.path() / "spec.json", R"({"seed": 2, "duration_s": 20, "rates": {"tcp": 5}})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "ds").string())
                .exit_code == 0);

    write_text(dir.path() / "good.conf", "report.format=latex\nburst.threshold_bps=5e7\n");
    RunResult rep = run_cli("report " + (dir.path() / "ds").string() + " --out " +
                            (dir.path() / "out").string() + " --config " +
                            (dir.path() / "good.conf").string());
    CHECK(rep.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path() / "out" / "report.tex"));

    write_text(dir.path() / "bad.conf", "rag.tcp.retx_s2d.trigger=5\n");
    RunResult bad = run_cli("report " + (dir.path() / "ds").string() + " --config " +
                            (dir.path() / "bad.conf").string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("unknown configuration key") != std::string::npos);
}

TEST_CASE("bench prints per-protocol rows and handles gz variants equally") {
    TempDir dir("cli_bench");
    write_text(dir.path() / "spec.json",
               R"({"seed": 9, "duration_s": 45, "rates": {"tcp": 20, "dns": 5}})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "plain").string())
                .exit_code == 0);
    write_text(dir.path() / "spec_gz.json",
               R"({"seed": 9, "duration_s": 45, "rates": {"tcp": 20, "dns": 5}, "gzip": true})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec_gz.json").string() + " --out " +
                    (dir.path() / "gz").string())
                .exit_code == 0);

    RunResult plain = run_cli("bench " + (dir.path() / "plain").string());
    RunResult gz = run_cli("bench " + (dir.path() / "gz").string());
    CHECK(plain.exit_code == 0);
    CHECK(gz.exit_code == 0);

    // Row counts per protocol must match between plain and gz variants.
    auto extract_rows = [](const std::string& out, const std::string& proto) {
        size_t pos = out.find("\n" + proto);
        REQUIRE(pos != std::string::npos);
        unsigned long long rows = 0;
        REQUIRE(sscanf(out.c_str() + pos + 1 + proto.size(), " %llu", &rows) == 1);
        return rows;
    };
    CHECK(extract_rows(plain.output, "tcp") == extract_rows(gz.output, "tcp"));
    CHECK(extract_rows(plain.output, "dns") == extract_rows(gz.output, "dns"));
    CHECK(extract_rows(plain.output, "tcp") > 0);

    // Empty dataset: empty table, still exit 0.
    TempDir empty("cli_bench_empty");
    RunResult none = run_cli("bench " + empty.path().string());
    CHECK(none.exit_code == 0);
    CHECK(none.output.find("protocol") != std::string::npos);
}

TEST_CASE("skip-bad-rows flag lets a report survive malformed lines") {
    TempDir dir("cli_skip");
    write_text(dir.path() / "spec.json", R"({"seed": 4, "duration_s": 20, "rates": {"tcp": 5}})");
    REQUIRE(run_cli("synth " + (dir.path() / "spec.json").string() + " --out " +
                    (dir.path() / "ds").string())
                .exit_code == 0);
    auto tcp_path = dir.path() / "ds" / "tcp.records";
    write_text(tcp_path, read_text(tcp_path) + "broken\tline\n");

    RunResult strict = run_cli("report " + (dir.path() / "ds").string() + " --out " +
                               (dir.path() / "out1").string());
    CHECK(strict.exit_code == 2);  // tcp/bursts sections fail, the rest render

    RunResult lenient = run_cli("report " + (dir.path() / "ds").string() + " --out " +
                                (dir.path() / "out2").string() + " --skip-bad-rows");
    CHECK(lenient.exit_code == 0);
}
