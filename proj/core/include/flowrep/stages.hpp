#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowrep/batch_cache.hpp"
#include "flowrep/config.hpp"
#include "flowrep/dataset.hpp"
#include "flowrep/report.hpp"

namespace flowrep {

// Report stage builders. Each stage reads its input protocols through
// op-chains, computes one report section plus the CSV exports backing its
// charts, and degrades to a short placeholder section when the dataset has
// no file for its protocol.

struct Stage {
    std::string name;
    bool heavy = false;
    double expected_cost = 1.0;  // orders the heavy lane
    std::vector<Protocol> inputs;
};

struct StageOutput {
    std::vector<ReportSection> sections;
    std::vector<ExportedTable> exports;
    uint64_t rows = 0;  // source rows consumed
};

/// Canonical stage set in canonical order:
/// mac, ip, udp, tcp, http, dns, icmp, bursts, topology.
std::vector<Stage> default_stages(const Config& config);

struct StageContext {
    const Dataset& dataset;
    const Config& config;
    BatchCache& batches;  // shared across the plan: one parse per file
};

/// Dispatches to the builder for `name`; throws on an unknown stage.
StageOutput run_stage(const std::string& name, StageContext& ctx);

/// Standalone convenience: runs one stage with a private cache.
StageOutput run_stage(const std::string& name, const Dataset& dataset, const Config& config);

}  // namespace flowrep
