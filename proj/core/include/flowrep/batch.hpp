#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flowrep/errors.hpp"
#include "flowrep/records.hpp"

namespace flowrep {

/// One homogeneous column with an absence mask. Only the vector matching
/// `type` is populated. Absent cells keep a zero/empty slot so indices align.
struct Column {
    std::string name;
    ColumnType type = ColumnType::text;
    std::vector<double> f64;
    std::vector<int64_t> i64;
    std::vector<std::string> text;
    std::vector<uint8_t> present;

    size_t size() const { return present.size(); }
    bool is_present(size_t row) const { return present[row] != 0; }
    bool is_numeric() const { return type != ColumnType::text; }

    /// Numeric value as double (i64 promoted). Caller checks presence.
    double as_f64(size_t row) const {
        return type == ColumnType::f64 ? f64[row] : static_cast<double>(i64[row]);
    }
    int64_t as_i64(size_t row) const {
        return type == ColumnType::i64 ? i64[row] : static_cast<int64_t>(f64[row]);
    }
    std::string_view as_text(size_t row) const { return text[row]; }

    void push_f64(double v) { f64.push_back(v); present.push_back(1); }
    void push_i64(int64_t v) { i64.push_back(v); present.push_back(1); }
    void push_text(std::string_view v) { text.emplace_back(v); present.push_back(1); }
    void push_absent();
    void append_from(const Column& src, size_t row);
};

/// Immutable-after-materialization columnar batch. All columns have the
/// same row count.
struct RecordBatch {
    std::vector<Column> columns;
    size_t rows = 0;

    const Column* find(std::string_view name) const;
    const Column& at(std::string_view name) const;  // throws DatasetError
    bool empty() const { return rows == 0; }
};

}  // namespace flowrep
