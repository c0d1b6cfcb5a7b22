#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowrep/records.hpp"

namespace flowrep {

struct DatasetOptions {
    bool skip_bad_rows = false;       // count malformed rows instead of failing
    uint64_t row_cap = 50'000'000;    // out-of-memory guard for buffered steps
};

struct ProtocolFile {
    Protocol protocol = Protocol::ip;
    std::filesystem::path path;
    std::vector<ColumnSpec> schema;             // header order, mandatory + extras
    std::optional<uint64_t> row_count;          // filled once scanned
};

struct ScanStats {
    uint64_t row_count = 0;
    uint64_t byte_count = 0;        // source bytes consumed (compressed for .gz)
    double seconds = 0.0;
    double rows_per_second = 0.0;
    uint64_t skipped_rows = 0;
};

/// A directory of `<protocol>.records[.gz]` files. Opening builds the
/// manifest and reads header schemas only; row data stays on disk until a
/// chain materializes it.
class Dataset {
public:
    static Dataset open(const std::filesystem::path& root, DatasetOptions opts = {});

    const std::filesystem::path& root() const { return root_; }
    const DatasetOptions& options() const { return opts_; }

    bool has(Protocol p) const { return manifest_.count(p) > 0; }
    const ProtocolFile& file(Protocol p) const;  // throws DatasetError if absent
    const std::map<Protocol, ProtocolFile>& manifest() const { return manifest_; }

    /// Cumulative raw bytes read from disk by every scan of this dataset.
    uint64_t source_bytes_read() const { return counter_->load(); }
    std::atomic<uint64_t>* byte_counter() const { return counter_.get(); }

    /// Full single pass over one protocol file: counts rows, validates row
    /// arity and field coercion, measures parse throughput.
    ScanStats scan_stats(Protocol p) const;

private:
    Dataset() : counter_(std::make_shared<std::atomic<uint64_t>>(0)) {}

    std::filesystem::path root_;
    DatasetOptions opts_;
    std::map<Protocol, ProtocolFile> manifest_;
    std::shared_ptr<std::atomic<uint64_t>> counter_;
};

}  // namespace flowrep
