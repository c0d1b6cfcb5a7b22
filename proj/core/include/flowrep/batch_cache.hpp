#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>

#include "flowrep/op_chain.hpp"

namespace flowrep {

/// Per-report cache of fully materialized protocol batches. Enriched records
/// are heavily accessed while building the report, so each file is parsed
/// once and the columnar batch is shared by every stage that needs it;
/// release() drops a protocol once its last consumer is done, which keeps
/// the resident set bounded under lane scheduling.
class BatchCache {
public:
    explicit BatchCache(const Dataset& dataset) : dataset_(&dataset) {}

    /// Loads (once) and returns the full batch for a protocol. Concurrent
    /// callers block until the first load finishes. Throws what the
    /// materialization throws; a failed load is retried by the next caller.
    std::shared_ptr<const RecordBatch> acquire(Protocol p);

    /// Declares how many release() calls to expect per protocol; the cached
    /// batch is dropped when the count reaches zero. Without a declared
    /// budget the cache holds batches until destruction.
    void set_pending(const std::map<Protocol, int>& pending);
    void release(Protocol p);

    uint64_t rows_loaded(Protocol p) const;

private:
    struct Entry {
        std::shared_ptr<const RecordBatch> batch;
        bool loading = false;
        int pending = -1;  // -1: unbounded
        uint64_t rows = 0;
    };

    const Dataset* dataset_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<Protocol, Entry> entries_;
};

}  // namespace flowrep
