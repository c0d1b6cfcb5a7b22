#include "flowrep/op_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "flowrep/scanner.hpp"
#include "flowrep/text.hpp"

namespace flowrep {

namespace {

/// One parsed cell during evaluation. Text views borrow from the row buffer
/// in the streaming phase and are copied on retention.
struct Cell {
    bool present = false;
    double num = 0.0;
    std::string_view text;
};

bool eval_predicate(const Predicate& p, ColumnType type, const Cell& cell) {
    if (!cell.present) return false;
    int rel;
    if (std::holds_alternative<double>(p.value)) {
        if (type == ColumnType::text) return false;
        double rhs = std::get<double>(p.value);
        rel = cell.num < rhs ? -1 : (cell.num > rhs ? 1 : 0);
    } else {
        if (type != ColumnType::text) return false;
        rel = cell.text.compare(std::get<std::string>(p.value));
        rel = rel < 0 ? -1 : (rel > 0 ? 1 : 0);
    }
    switch (p.op) {
        case Cmp::eq: return rel == 0;
        case Cmp::ne: return rel != 0;
        case Cmp::lt: return rel < 0;
        case Cmp::le: return rel <= 0;
        case Cmp::gt: return rel > 0;
        case Cmp::ge: return rel >= 0;
    }
    return false;
}

struct AggAcc {
    uint64_t n = 0;
    double sum = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::vector<double> buffered;  // median/stddev keep exact values

    void add(double v, bool keep) {
        ++n;
        sum += v;
        if (v < min) min = v;
        if (v > max) max = v;
        if (keep) buffered.push_back(v);
    }
};

double population_stddev(std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

double median_of(std::vector<double>& xs) {
    size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    double lo = *std::max_element(xs.begin(), xs.begin() + mid);
    return (lo + hi) / 2.0;
}

struct GroupState {
    uint64_t row_count = 0;
    std::vector<Cell> key_cells;       // first-seen typed key values
    std::vector<std::string> key_texts;  // owned copies for text keys
    std::vector<AggAcc> accs;
};

/// Shared by the streaming scan and the batch replay path.
class GroupCollector {
public:
    GroupCollector(std::vector<ColumnSpec> key_specs, std::vector<Aggregation> aggs,
                   uint64_t group_cap)
        : key_specs_(std::move(key_specs)), aggs_(std::move(aggs)), group_cap_(group_cap) {
        keep_.resize(aggs_.size());
        for (size_t i = 0; i < aggs_.size(); ++i)
            keep_[i] = aggs_[i].kind == AggKind::median || aggs_[i].kind == AggKind::stddev;
    }

    void add_row(const std::vector<Cell>& key_cells, const std::vector<Cell>& agg_cells) {
        key_.clear();
        for (size_t i = 0; i < key_cells.size(); ++i) {
            const Cell& c = key_cells[i];
            key_.push_back(c.present ? '1' : '0');
            if (c.present) {
                if (key_specs_[i].type == ColumnType::text)
                    key_.append(c.text);
                else
                    key_.append(format_f64(c.num));
            }
            key_.push_back('\t');
        }
        auto [it, inserted] = groups_.try_emplace(key_);
        GroupState& g = it->second;
        if (inserted) {
            if (groups_.size() > group_cap_)
                throw DatasetError("group cardinality exceeds row cap (" +
                                   std::to_string(group_cap_) + ")");
            g.key_cells.assign(key_cells.begin(), key_cells.end());
            g.key_texts.resize(key_cells.size());
            for (size_t i = 0; i < key_cells.size(); ++i) {
                if (key_cells[i].present && key_specs_[i].type == ColumnType::text) {
                    g.key_texts[i] = std::string(key_cells[i].text);
                    g.key_cells[i].text = g.key_texts[i];
                }
            }
            g.accs.resize(aggs_.size());
        }
        ++g.row_count;
        for (size_t i = 0; i < aggs_.size(); ++i) {
            if (aggs_[i].kind == AggKind::count) continue;
            const Cell& c = agg_cells[i];
            if (c.present) g.accs[i].add(c.num, keep_[i]);
        }
    }

    RecordBatch finalize() {
        std::vector<GroupState*> order;
        order.reserve(groups_.size());
        for (auto& [k, g] : groups_) order.push_back(&g);
        std::sort(order.begin(), order.end(), [&](const GroupState* a, const GroupState* b) {
            for (size_t i = 0; i < key_specs_.size(); ++i) {
                const Cell& ca = a->key_cells[i];
                const Cell& cb = b->key_cells[i];
                if (ca.present != cb.present) return !ca.present;  // absent first
                if (!ca.present) continue;
                if (key_specs_[i].type == ColumnType::text) {
                    if (ca.text != cb.text) return ca.text < cb.text;
                } else {
                    if (ca.num != cb.num) return ca.num < cb.num;
                }
            }
            return false;
        });

        RecordBatch out;
        for (const auto& spec : key_specs_) {
            Column col;
            col.name = spec.name;
            col.type = spec.type;
            out.columns.push_back(std::move(col));
        }
        for (const auto& agg : aggs_) {
            Column col;
            col.name = agg.output_name();
            col.type = agg.kind == AggKind::count ? ColumnType::i64 : ColumnType::f64;
            out.columns.push_back(std::move(col));
        }
        for (GroupState* g : order) {
            for (size_t i = 0; i < key_specs_.size(); ++i) {
                Column& col = out.columns[i];
                const Cell& c = g->key_cells[i];
                if (!c.present) { col.push_absent(); continue; }
                switch (col.type) {
                    case ColumnType::f64: col.push_f64(c.num); break;
                    case ColumnType::i64: col.push_i64(static_cast<int64_t>(c.num)); break;
                    case ColumnType::text: col.push_text(c.text); break;
                }
            }
            for (size_t i = 0; i < aggs_.size(); ++i) {
                Column& col = out.columns[key_specs_.size() + i];
                AggAcc& acc = g->accs[i];
                switch (aggs_[i].kind) {
                    case AggKind::count:
                        col.push_i64(static_cast<int64_t>(g->row_count));
                        break;
                    case AggKind::sum:
                        col.push_f64(acc.n ? acc.sum : 0.0);
                        break;
                    case AggKind::mean:
                        acc.n ? col.push_f64(acc.sum / static_cast<double>(acc.n))
                              : col.push_absent();
                        break;
                    case AggKind::min:
                        acc.n ? col.push_f64(acc.min) : col.push_absent();
                        break;
                    case AggKind::max:
                        acc.n ? col.push_f64(acc.max) : col.push_absent();
                        break;
                    case AggKind::median:
                        acc.n ? col.push_f64(median_of(acc.buffered)) : col.push_absent();
                        break;
                    case AggKind::stddev:
                        acc.n ? col.push_f64(population_stddev(acc.buffered))
                              : col.push_absent();
                        break;
                }
            }
        }
        out.rows = order.size();
        return out;
    }

private:
    std::vector<ColumnSpec> key_specs_;
    std::vector<Aggregation> aggs_;
    uint64_t group_cap_;
    std::vector<bool> keep_;
    std::unordered_map<std::string, GroupState> groups_;
    std::string key_;
};

/// Bounded selection of the n extreme rows by one column. Ties break toward
/// earlier arrival so the result is deterministic.
class TopNCollector {
public:
    TopNCollector(std::vector<ColumnSpec> schema, size_t key_index, size_t n, bool descending)
        : schema_(std::move(schema)), key_index_(key_index), n_(n), descending_(descending) {}

    void add_row(const std::vector<Cell>& cells) {
        const Cell& key = cells[key_index_];
        if (!key.present) return;  // rows without the key are not ranked
        Row row;
        row.arrival = arrival_++;
        row.cells.reserve(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) {
            OwnedCell c;
            c.present = cells[i].present;
            c.num = cells[i].num;
            if (schema_[i].type == ColumnType::text && cells[i].present)
                c.text = std::string(cells[i].text);
            row.cells.push_back(std::move(c));
        }
        rows_.push_back(std::move(row));
        if (rows_.size() > n_) {
            // Drop the single worst row; linear scan keeps state at n rows.
            size_t worst = 0;
            for (size_t i = 1; i < rows_.size(); ++i)
                if (ranks_before(rows_[worst], rows_[i])) worst = i;
            rows_.erase(rows_.begin() + static_cast<ptrdiff_t>(worst));
        }
    }

    RecordBatch finalize() {
        std::sort(rows_.begin(), rows_.end(),
                  [&](const Row& a, const Row& b) { return ranks_before(a, b); });
        RecordBatch out;
        for (const auto& spec : schema_) {
            Column col;
            col.name = spec.name;
            col.type = spec.type;
            out.columns.push_back(std::move(col));
        }
        for (const Row& row : rows_) {
            for (size_t i = 0; i < schema_.size(); ++i) {
                Column& col = out.columns[i];
                const OwnedCell& c = row.cells[i];
                if (!c.present) { col.push_absent(); continue; }
                switch (col.type) {
                    case ColumnType::f64: col.push_f64(c.num); break;
                    case ColumnType::i64: col.push_i64(static_cast<int64_t>(c.num)); break;
                    case ColumnType::text: col.push_text(c.text); break;
                }
            }
        }
        out.rows = rows_.size();
        return out;
    }

private:
    struct OwnedCell {
        bool present = false;
        double num = 0.0;
        std::string text;
    };
    struct Row {
        uint64_t arrival = 0;
        std::vector<OwnedCell> cells;
    };

    bool key_is_text() const { return schema_[key_index_].type == ColumnType::text; }

    bool ranks_before(const Row& a, const Row& b) const {
        const OwnedCell& ka = a.cells[key_index_];
        const OwnedCell& kb = b.cells[key_index_];
        int rel;
        if (key_is_text())
            rel = ka.text < kb.text ? -1 : (ka.text > kb.text ? 1 : 0);
        else
            rel = ka.num < kb.num ? -1 : (ka.num > kb.num ? 1 : 0);
        if (rel != 0) return descending_ ? rel > 0 : rel < 0;
        return a.arrival < b.arrival;
    }

    std::vector<ColumnSpec> schema_;
    size_t key_index_;
    size_t n_;
    bool descending_;
    uint64_t arrival_ = 0;
    std::vector<Row> rows_;
};

size_t index_of(const std::vector<ColumnSpec>& schema, std::string_view name) {
    for (size_t i = 0; i < schema.size(); ++i)
        if (schema[i].name == name) return i;
    throw DatasetError("no column '" + std::string(name) + "' in schema");
}

}  // namespace

std::string Aggregation::output_name() const {
    switch (kind) {
        case AggKind::count: return "count";
        case AggKind::sum: return "sum(" + column + ")";
        case AggKind::mean: return "mean(" + column + ")";
        case AggKind::min: return "min(" + column + ")";
        case AggKind::max: return "max(" + column + ")";
        case AggKind::median: return "median(" + column + ")";
        case AggKind::stddev: return "stddev(" + column + ")";
    }
    return "?";
}

OpChain::OpChain(const Dataset& dataset, Protocol protocol)
    : dataset_(&dataset), protocol_(protocol), schema_(dataset.file(protocol).schema) {}

void OpChain::check_column(const std::string& name, const char* step) const {
    for (const auto& spec : schema_)
        if (spec.name == name) return;
    throw DatasetError(std::string(step) + " references unknown column '" + name + "'");
}

OpChain& OpChain::filter(std::vector<Predicate> all_of) {
    for (const auto& p : all_of) check_column(p.column, "filter");
    steps_.push_back(FilterStep{std::move(all_of)});
    return *this;
}

OpChain& OpChain::project(std::vector<std::string> columns) {
    std::vector<ColumnSpec> next;
    for (const auto& name : columns) {
        check_column(name, "project");
        next.push_back(schema_[index_of(schema_, name)]);
    }
    steps_.push_back(ProjectStep{std::move(columns)});
    schema_ = std::move(next);
    return *this;
}

OpChain& OpChain::group_aggregate(std::vector<std::string> keys, std::vector<Aggregation> aggs) {
    std::vector<ColumnSpec> next;
    for (const auto& k : keys) {
        check_column(k, "group_aggregate");
        next.push_back(schema_[index_of(schema_, k)]);
    }
    for (const auto& a : aggs) {
        if (a.kind != AggKind::count) check_column(a.column, "group_aggregate");
        next.push_back({a.output_name(),
                        a.kind == AggKind::count ? ColumnType::i64 : ColumnType::f64});
    }
    steps_.push_back(GroupStep{std::move(keys), std::move(aggs)});
    schema_ = std::move(next);
    return *this;
}

OpChain& OpChain::top_n(std::string key_column, size_t n, bool descending) {
    check_column(key_column, "top_n");
    steps_.push_back(TopNStep{std::move(key_column), n, descending});
    return *this;
}

const std::vector<ColumnSpec>& OpChain::output_schema() const { return schema_; }

const RecordBatch& OpChain::materialize() {
    if (cache_) return *cache_;

    const ProtocolFile& pf = dataset_->file(protocol_);
    const DatasetOptions& opts = dataset_->options();

    // The streaming prefix runs filters/projections inside the scan; the
    // first buffering step (group/top) consumes the stream. Everything after
    // it replays on the in-memory batch.
    size_t collector_at = steps_.size();
    for (size_t i = 0; i < steps_.size(); ++i) {
        if (std::holds_alternative<GroupStep>(steps_[i]) ||
            std::holds_alternative<TopNStep>(steps_[i])) {
            collector_at = i;
            break;
        }
    }

    // Schema visible to the scan loop after in-stream projections.
    std::vector<ColumnSpec> stream_schema = pf.schema;
    std::vector<FilterStep> stream_filters;
    for (size_t i = 0; i < collector_at; ++i) {
        if (const auto* f = std::get_if<FilterStep>(&steps_[i])) {
            stream_filters.push_back(*f);
        } else if (const auto* prj = std::get_if<ProjectStep>(&steps_[i])) {
            std::vector<ColumnSpec> next;
            for (const auto& name : prj->columns)
                next.push_back(stream_schema[index_of(stream_schema, name)]);
            stream_schema = std::move(next);
        }
    }

    // Source columns that must actually be parsed.
    std::unordered_set<std::string> needed_names;
    for (const auto& f : stream_filters)
        for (const auto& p : f.all_of) needed_names.insert(p.column);
    std::unique_ptr<GroupCollector> group_collector;
    std::unique_ptr<TopNCollector> topn_collector;
    std::vector<size_t> group_key_src, group_agg_src;  // indices into parse slots
    const GroupStep* gstep = nullptr;
    const TopNStep* tstep = nullptr;
    if (collector_at < steps_.size()) {
        if ((gstep = std::get_if<GroupStep>(&steps_[collector_at]))) {
            for (const auto& k : gstep->keys) needed_names.insert(k);
            for (const auto& a : gstep->aggs)
                if (a.kind != AggKind::count) needed_names.insert(a.column);
        } else {
            tstep = std::get_if<TopNStep>(&steps_[collector_at]);
            for (const auto& spec : stream_schema) needed_names.insert(spec.name);
            needed_names.insert(tstep->key_column);
        }
    } else {
        for (const auto& spec : stream_schema) needed_names.insert(spec.name);
    }

    struct ParseSlot {
        size_t field_index;
        ColumnType type;
        std::string name;
    };
    std::vector<ParseSlot> slots;
    std::unordered_map<std::string, size_t> slot_of;
    for (size_t i = 0; i < pf.schema.size(); ++i) {
        if (needed_names.count(pf.schema[i].name)) {
            slot_of[pf.schema[i].name] = slots.size();
            slots.push_back({i, pf.schema[i].type, pf.schema[i].name});
        }
    }

    // Filter predicates bound to parse slots.
    struct BoundPredicate {
        Predicate pred;
        size_t slot;
        ColumnType type;
    };
    std::vector<BoundPredicate> bound;
    for (const auto& f : stream_filters)
        for (const auto& p : f.all_of)
            bound.push_back({p, slot_of.at(p.column), slots[slot_of.at(p.column)].type});

    if (gstep) {
        std::vector<ColumnSpec> key_specs;
        for (const auto& k : gstep->keys) {
            key_specs.push_back(pf.schema[index_of(pf.schema, k)]);
            group_key_src.push_back(slot_of.at(k));
        }
        for (const auto& a : gstep->aggs)
            group_agg_src.push_back(a.kind == AggKind::count ? SIZE_MAX : slot_of.at(a.column));
        group_collector =
            std::make_unique<GroupCollector>(std::move(key_specs), gstep->aggs, opts.row_cap);
    }
    std::vector<size_t> row_src;  // slots feeding direct/topn output, in schema order
    if (tstep) {
        for (const auto& spec : stream_schema) row_src.push_back(slot_of.at(spec.name));
        topn_collector = std::make_unique<TopNCollector>(
            stream_schema, index_of(stream_schema, tstep->key_column), tstep->n,
            tstep->descending);
    }

    RecordBatch direct;
    if (!gstep && !tstep) {
        for (const auto& spec : stream_schema) {
            row_src.push_back(slot_of.at(spec.name));
            Column col;
            col.name = spec.name;
            col.type = spec.type;
            direct.columns.push_back(std::move(col));
        }
    }

    // Single pass over the source.
    LineScanner scanner(open_byte_source(pf.path.string(), dataset_->byte_counter()),
                        pf.path.string());
    std::string_view line;
    if (!scanner.next(line))
        throw ParseError(pf.path.string(), 0, "missing header");

    const size_t arity = pf.schema.size();
    std::vector<std::string_view> fields;
    fields.reserve(arity);
    std::vector<Cell> cells(slots.size());
    std::vector<Cell> key_cells(group_key_src.size());
    std::vector<Cell> agg_cells(group_agg_src.size());
    std::vector<Cell> out_cells(row_src.size());
    rows_scanned_ = 0;
    rows_skipped_ = 0;

    while (scanner.next(line)) {
        fields.clear();
        size_t start_pos = 0;
        while (true) {
            size_t pos = line.find('\t', start_pos);
            if (pos == std::string_view::npos) {
                fields.push_back(line.substr(start_pos));
                break;
            }
            fields.push_back(line.substr(start_pos, pos - start_pos));
            start_pos = pos + 1;
        }
        if (fields.size() != arity) {
            if (opts.skip_bad_rows) { ++rows_skipped_; continue; }
            throw ParseError(pf.path.string(), scanner.line_number(),
                             "row has " + std::to_string(fields.size()) +
                                 " fields, header declares " + std::to_string(arity));
        }

        bool bad = false;
        for (size_t s = 0; s < slots.size() && !bad; ++s) {
            std::string_view raw = fields[slots[s].field_index];
            Cell& c = cells[s];
            if (raw.empty()) {
                c.present = false;
                continue;
            }
            c.present = true;
            switch (slots[s].type) {
                case ColumnType::f64: {
                    auto v = parse_f64(raw);
                    if (!v) {
                        if (opts.skip_bad_rows) { bad = true; break; }
                        throw ParseError(pf.path.string(), scanner.line_number(),
                                         "column '" + slots[s].name + "': cannot parse '" +
                                             std::string(raw) + "' as number");
                    }
                    c.num = *v;
                    break;
                }
                case ColumnType::i64: {
                    auto v = parse_i64(raw);
                    if (!v) {
                        if (opts.skip_bad_rows) { bad = true; break; }
                        throw ParseError(pf.path.string(), scanner.line_number(),
                                         "column '" + slots[s].name + "': cannot parse '" +
                                             std::string(raw) + "' as integer");
                    }
                    c.num = static_cast<double>(*v);
                    break;
                }
                case ColumnType::text:
                    c.text = raw;
                    break;
            }
        }
        if (bad) { ++rows_skipped_; continue; }
        ++rows_scanned_;

        bool pass = true;
        for (const auto& bp : bound) {
            if (!eval_predicate(bp.pred, bp.type, cells[bp.slot])) {
                pass = false;
                break;
            }
        }
        if (!pass) continue;

        if (group_collector) {
            for (size_t i = 0; i < group_key_src.size(); ++i) key_cells[i] = cells[group_key_src[i]];
            for (size_t i = 0; i < group_agg_src.size(); ++i)
                agg_cells[i] = group_agg_src[i] == SIZE_MAX ? Cell{} : cells[group_agg_src[i]];
            group_collector->add_row(key_cells, agg_cells);
        } else if (topn_collector) {
            for (size_t i = 0; i < row_src.size(); ++i) out_cells[i] = cells[row_src[i]];
            topn_collector->add_row(out_cells);
        } else {
            if (direct.rows >= opts.row_cap)
                throw DatasetError("materialized rows exceed row cap (" +
                                   std::to_string(opts.row_cap) + ")");
            for (size_t i = 0; i < row_src.size(); ++i) {
                Column& col = direct.columns[i];
                const Cell& c = cells[row_src[i]];
                if (!c.present) { col.push_absent(); continue; }
                switch (col.type) {
                    case ColumnType::f64: col.push_f64(c.num); break;
                    case ColumnType::i64: col.push_i64(static_cast<int64_t>(c.num)); break;
                    case ColumnType::text: col.push_text(c.text); break;
                }
            }
            ++direct.rows;
        }
    }

    RecordBatch batch;
    if (group_collector)
        batch = group_collector->finalize();
    else if (topn_collector)
        batch = topn_collector->finalize();
    else
        batch = std::move(direct);

    // Replay the remaining steps on the in-memory batch.
    for (size_t i = collector_at == steps_.size() ? steps_.size() : collector_at + 1;
         i < steps_.size(); ++i) {
        std::visit(
            [&](const auto& step) {
                using T = std::decay_t<decltype(step)>;
                if constexpr (std::is_same_v<T, FilterStep>) {
                    RecordBatch next;
                    for (const auto& col : batch.columns) {
                        Column c;
                        c.name = col.name;
                        c.type = col.type;
                        next.columns.push_back(std::move(c));
                    }
                    for (size_t row = 0; row < batch.rows; ++row) {
                        bool pass = true;
                        for (const auto& p : step.all_of) {
                            const Column& col = batch.at(p.column);
                            Cell cell;
                            cell.present = col.is_present(row);
                            if (cell.present) {
                                if (col.is_numeric())
                                    cell.num = col.as_f64(row);
                                else
                                    cell.text = col.as_text(row);
                            }
                            if (!eval_predicate(p, col.type, cell)) {
                                pass = false;
                                break;
                            }
                        }
                        if (!pass) continue;
                        for (size_t ci = 0; ci < batch.columns.size(); ++ci)
                            next.columns[ci].append_from(batch.columns[ci], row);
                        ++next.rows;
                    }
                    batch = std::move(next);
                } else if constexpr (std::is_same_v<T, ProjectStep>) {
                    RecordBatch next;
                    for (const auto& name : step.columns)
                        next.columns.push_back(batch.at(name));
                    next.rows = batch.rows;
                    batch = std::move(next);
                } else if constexpr (std::is_same_v<T, GroupStep>) {
                    std::vector<ColumnSpec> key_specs;
                    for (const auto& k : step.keys)
                        key_specs.push_back({k, batch.at(k).type});
                    GroupCollector collector(key_specs, step.aggs, opts.row_cap);
                    std::vector<const Column*> key_cols, agg_cols;
                    for (const auto& k : step.keys) key_cols.push_back(&batch.at(k));
                    for (const auto& a : step.aggs)
                        agg_cols.push_back(a.kind == AggKind::count ? nullptr
                                                                    : &batch.at(a.column));
                    std::vector<Cell> kc(key_cols.size()), ac(agg_cols.size());
                    for (size_t row = 0; row < batch.rows; ++row) {
                        for (size_t ci = 0; ci < key_cols.size(); ++ci) {
                            const Column& col = *key_cols[ci];
                            kc[ci].present = col.is_present(row);
                            if (kc[ci].present) {
                                if (col.is_numeric())
                                    kc[ci].num = col.as_f64(row);
                                else
                                    kc[ci].text = col.as_text(row);
                            }
                        }
                        for (size_t ci = 0; ci < agg_cols.size(); ++ci) {
                            if (!agg_cols[ci]) { ac[ci] = Cell{}; continue; }
                            const Column& col = *agg_cols[ci];
                            ac[ci].present = col.is_present(row) && col.is_numeric();
                            if (ac[ci].present) ac[ci].num = col.as_f64(row);
                        }
                        collector.add_row(kc, ac);
                    }
                    batch = collector.finalize();
                } else if constexpr (std::is_same_v<T, TopNStep>) {
                    std::vector<ColumnSpec> specs;
                    for (const auto& col : batch.columns) specs.push_back({col.name, col.type});
                    TopNCollector collector(specs, index_of(specs, step.key_column), step.n,
                                            step.descending);
                    std::vector<Cell> rc(batch.columns.size());
                    for (size_t row = 0; row < batch.rows; ++row) {
                        for (size_t ci = 0; ci < batch.columns.size(); ++ci) {
                            const Column& col = batch.columns[ci];
                            rc[ci].present = col.is_present(row);
                            if (rc[ci].present) {
                                if (col.is_numeric())
                                    rc[ci].num = col.as_f64(row);
                                else
                                    rc[ci].text = col.as_text(row);
                            }
                        }
                        collector.add_row(rc);
                    }
                    batch = collector.finalize();
                }
            },
            steps_[i]);
    }

    cache_ = std::move(batch);
    return *cache_;
}

}  // namespace flowrep
