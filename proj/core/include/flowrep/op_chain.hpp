#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowrep/batch.hpp"
#include "flowrep/dataset.hpp"

namespace flowrep {

// Chainable deferred operations over one protocol file. Steps are recorded
// and validated against the evolving schema; nothing is read until
// materialize(), which streams the source once. Filters and projections that
// precede the first buffering step run inside the scan loop; group/top steps
// buffer only their own state.

enum class Cmp { eq, ne, lt, le, gt, ge };

struct Predicate {
    std::string column;
    Cmp op = Cmp::eq;
    std::variant<double, std::string> value;

    // Predicates on absent cells evaluate false: a row with no value never
    // matches, whatever the comparison.
    static Predicate num(std::string column, Cmp op, double v) {
        return {std::move(column), op, v};
    }
    static Predicate text(std::string column, Cmp op, std::string v) {
        return {std::move(column), op, std::move(v)};
    }
};

enum class AggKind { sum, count, mean, min, max, median, stddev };

struct Aggregation {
    AggKind kind = AggKind::count;
    std::string column;  // ignored for count

    /// Output column name, e.g. "sum(bytes_s2d)" or "count".
    std::string output_name() const;
};

class OpChain {
public:
    OpChain(const Dataset& dataset, Protocol protocol);

    /// All predicates must hold (conjunction).
    OpChain& filter(std::vector<Predicate> all_of);
    OpChain& project(std::vector<std::string> columns);
    /// Groups sorted ascending by key tuple in the output (determinism).
    OpChain& group_aggregate(std::vector<std::string> keys, std::vector<Aggregation> aggs);
    OpChain& top_n(std::string key_column, size_t n, bool descending = true);

    /// Evaluates at most once; later calls return the cached batch with zero
    /// further source reads.
    const RecordBatch& materialize();
    bool materialized() const { return cache_.has_value(); }

    /// Materializes (if needed) and moves the result out of the chain.
    RecordBatch into_batch() && {
        materialize();
        RecordBatch out = std::move(*cache_);
        cache_.reset();
        return out;
    }

    /// Rows counted out of the source scan by the last materialization.
    uint64_t rows_scanned() const { return rows_scanned_; }
    uint64_t rows_skipped() const { return rows_skipped_; }

    /// Schema after the final step (names in output order).
    const std::vector<ColumnSpec>& output_schema() const;

private:
    struct FilterStep { std::vector<Predicate> all_of; };
    struct ProjectStep { std::vector<std::string> columns; };
    struct GroupStep { std::vector<std::string> keys; std::vector<Aggregation> aggs; };
    struct TopNStep { std::string key_column; size_t n; bool descending; };
    using Step = std::variant<FilterStep, ProjectStep, GroupStep, TopNStep>;

    void check_column(const std::string& name, const char* step) const;
    void push_schema_after(const Step& s);

    const Dataset* dataset_;
    Protocol protocol_;
    std::vector<Step> steps_;
    std::vector<ColumnSpec> schema_;  // schema after last pushed step
    std::optional<RecordBatch> cache_;
    uint64_t rows_scanned_ = 0;
    uint64_t rows_skipped_ = 0;
};

}  // namespace flowrep
