#include "flowrep/scheduler.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "flowrep/errors.hpp"
#include "flowrep/text.hpp"

namespace flowrep {

uint64_t current_rss_bytes() {
    // /proc/self/statm: size resident shared ...
    std::FILE* f = std::fopen("/proc/self/statm", "r");
    if (!f) return 0;
    unsigned long long size = 0, resident = 0;
    int got = std::fscanf(f, "%llu %llu", &size, &resident);
    std::fclose(f);
    if (got != 2) return 0;
    static const long page = sysconf(_SC_PAGESIZE);
    return resident * static_cast<uint64_t>(page);
}

StagePlan build_plan(const std::vector<Stage>& stages, SchedulePolicy policy) {
    if (stages.empty()) throw ConfigError("cannot build a plan from an empty stage set");
    StagePlan plan;
    plan.policy = policy;
    switch (policy) {
        case SchedulePolicy::sequential: {
            std::vector<std::string> lane;
            for (const auto& s : stages) lane.push_back(s.name);
            plan.lanes.push_back(std::move(lane));
            break;
        }
        case SchedulePolicy::parallel: {
            for (const auto& s : stages) plan.lanes.push_back({s.name});
            break;
        }
        case SchedulePolicy::smart: {
            std::vector<const Stage*> heavy;
            std::vector<std::string> light;
            for (const auto& s : stages) {
                if (s.heavy) heavy.push_back(&s);
                else light.push_back(s.name);
            }
            std::sort(heavy.begin(), heavy.end(), [](const Stage* a, const Stage* b) {
                if (a->expected_cost != b->expected_cost)
                    return a->expected_cost > b->expected_cost;
                return a->name < b->name;
            });
            std::vector<std::string> heavy_lane;
            for (const Stage* s : heavy) heavy_lane.push_back(s->name);
            plan.lanes.push_back(std::move(heavy_lane));
            plan.lanes.push_back(std::move(light));
            break;
        }
    }
    return plan;
}

PlanRun execute_plan(const StagePlan& plan, const std::vector<Stage>& stages,
                     const Dataset& dataset, const Config& config) {
    // Staging buffers, one per stage, merged in canonical order at the end.
    struct Staged {
        StageOutput output;
        double wall_s = 0.0;
        std::atomic<uint64_t> peak_mem{0};
        uint64_t rows = 0;
        bool failed = false;
        std::string error;
        size_t lane = 0;
        bool executed = false;
    };
    std::map<std::string, Staged> staged;
    for (const auto& s : stages) staged[s.name];

    for (size_t lane = 0; lane < plan.lanes.size(); ++lane) {
        for (const auto& name : plan.lanes[lane]) {
            auto it = staged.find(name);
            if (it == staged.end()) throw ConfigError("plan names unknown stage '" + name + "'");
            it->second.lane = lane;
        }
    }

    auto plan_start = std::chrono::steady_clock::now();
    std::atomic<uint64_t> aggregate_peak{current_rss_bytes()};
    std::vector<std::atomic<Staged*>> lane_current(plan.lanes.size());
    for (auto& c : lane_current) c.store(nullptr);
    std::atomic<bool> done{false};

    auto bump = [](std::atomic<uint64_t>& slot, uint64_t v) {
        uint64_t cur = slot.load(std::memory_order_relaxed);
        while (cur < v && !slot.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
        }
    };

    // RSS sampler: attributes each sample to whatever stage each lane is
    // running at that moment, and tracks the process-wide peak.
    std::thread sampler([&] {
        while (!done.load(std::memory_order_relaxed)) {
            uint64_t rss = current_rss_bytes();
            bump(aggregate_peak, rss);
            for (auto& c : lane_current) {
                Staged* s = c.load(std::memory_order_relaxed);
                if (s) bump(s->peak_mem, rss);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(40));
        }
    });

    auto run_lane = [&](size_t lane_idx) {
        for (const auto& name : plan.lanes[lane_idx]) {
            Staged& s = staged[name];
            s.executed = true;
            bump(s.peak_mem, current_rss_bytes());
            lane_current[lane_idx].store(&s);
            auto t0 = std::chrono::steady_clock::now();
            try {
                s.output = run_stage(name, dataset, config);
                s.rows = s.output.rows;
            } catch (const std::exception& e) {
                s.failed = true;
                s.error = e.what();
            }
            s.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count();
            lane_current[lane_idx].store(nullptr);
            uint64_t rss = current_rss_bytes();
            bump(s.peak_mem, rss);
            bump(aggregate_peak, rss);
        }
    };

    if (plan.lanes.size() <= 1) {
        if (!plan.lanes.empty()) run_lane(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(plan.lanes.size());
        for (size_t i = 0; i < plan.lanes.size(); ++i)
            threads.emplace_back(run_lane, i);
        for (auto& t : threads) t.join();
    }
    done.store(true);
    sampler.join();

    // Deterministic merge: canonical stage order, not completion order.
    PlanRun run;
    for (const auto& s : stages) {
        Staged& st = staged[s.name];
        if (!st.executed) continue;
        if (st.failed) {
            run.partial_failure = true;
            ReportSection placeholder;
            placeholder.name = s.name;
            placeholder.items.push_back(
                TextItem{"Stage failed: " + st.error});
            run.sections.push_back(std::move(placeholder));
            continue;
        }
        for (auto& section : st.output.sections) run.sections.push_back(std::move(section));
        for (auto& table : st.output.exports) run.exports.push_back(std::move(table));
    }

    run.stats.makespan_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - plan_start).count();
    run.stats.aggregate_peak_bytes = aggregate_peak.load();
    for (const auto& s : stages) {
        Staged& st = staged[s.name];
        if (!st.executed) continue;
        run.stats.stages.push_back({s.name, st.lane, st.wall_s, st.peak_mem.load(), st.rows,
                                    st.failed});
    }
    return run;
}

void write_schedule_stats_csv(const StageRunStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "stage,lane,wall_s,peak_mem_bytes,rows\n";
    for (const auto& s : stats.stages)
        out << s.stage << ',' << s.lane << ',' << format_fixed(s.wall_s, 4) << ','
            << s.peak_mem_bytes << ',' << s.rows << '\n';
    out << "plan_makespan,," << format_fixed(stats.makespan_s, 4) << ",,\n";
    out << "plan_peak_mem,,," << stats.aggregate_peak_bytes << ",\n";
}

}  // namespace flowrep
