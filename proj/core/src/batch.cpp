#include "flowrep/batch.hpp"

namespace flowrep {

void Column::push_absent() {
    switch (type) {
        case ColumnType::f64: f64.push_back(0.0); break;
        case ColumnType::i64: i64.push_back(0); break;
        case ColumnType::text: text.emplace_back(); break;
    }
    present.push_back(0);
}

void Column::append_from(const Column& src, size_t row) {
    if (!src.is_present(row)) {
        push_absent();
        return;
    }
    switch (type) {
        case ColumnType::f64: push_f64(src.as_f64(row)); break;
        case ColumnType::i64: push_i64(src.as_i64(row)); break;
        case ColumnType::text: push_text(src.as_text(row)); break;
    }
}

const Column* RecordBatch::find(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

const Column& RecordBatch::at(std::string_view name) const {
    const Column* c = find(name);
    if (!c) throw DatasetError("no column '" + std::string(name) + "' in batch");
    return *c;
}

}  // namespace flowrep
