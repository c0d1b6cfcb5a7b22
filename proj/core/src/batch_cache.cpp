#include "flowrep/batch_cache.hpp"

namespace flowrep {

std::shared_ptr<const RecordBatch> BatchCache::acquire(Protocol p) {
    std::unique_lock lk(mu_);
    Entry& entry = entries_[p];
    while (entry.loading) cv_.wait(lk);
    if (entry.batch) return entry.batch;
    entry.loading = true;
    lk.unlock();

    std::shared_ptr<RecordBatch> batch;
    uint64_t rows = 0;
    std::exception_ptr error;
    try {
        OpChain chain(*dataset_, p);
        batch = std::make_shared<RecordBatch>(std::move(chain).into_batch());
        rows = chain.rows_scanned();
    } catch (...) {
        error = std::current_exception();
    }

    lk.lock();
    Entry& after = entries_[p];
    after.loading = false;
    if (batch) {
        after.batch = batch;
        after.rows = rows;
    }
    cv_.notify_all();
    if (error) std::rethrow_exception(error);
    return after.batch;
}

void BatchCache::set_pending(const std::map<Protocol, int>& pending) {
    std::lock_guard lk(mu_);
    for (const auto& [proto, count] : pending) entries_[proto].pending = count;
}

void BatchCache::release(Protocol p) {
    std::lock_guard lk(mu_);
    auto it = entries_.find(p);
    if (it == entries_.end() || it->second.pending < 0) return;
    if (--it->second.pending <= 0) it->second.batch.reset();
}

uint64_t BatchCache::rows_loaded(Protocol p) const {
    std::lock_guard lk(mu_);
    auto it = entries_.find(p);
    return it == entries_.end() ? 0 : it->second.rows;
}

}  // namespace flowrep
