#include "flowrep/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "flowrep/errors.hpp"
#include "flowrep/scanner.hpp"
#include "flowrep/text.hpp"

namespace flowrep {

namespace fs = std::filesystem;

namespace {

/// Header line: '#' + tab-separated column names.
std::vector<ColumnSpec> parse_header(std::string_view line, Protocol proto,
                                     const std::string& path) {
    if (line.empty() || line[0] != '#')
        throw DatasetError(path + ": missing '#' header line");
    std::vector<ColumnSpec> schema;
    std::set<std::string_view> seen;
    for (std::string_view name : split(line.substr(1), '\t')) {
        if (name.empty())
            throw DatasetError(path + ": empty column name in header");
        if (!seen.insert(name).second)
            throw DatasetError(path + ": duplicate column '" + std::string(name) + "'");
        schema.push_back({std::string(name), column_type(proto, name)});
    }
    for (const auto& required : mandatory_columns(proto)) {
        bool found = std::any_of(schema.begin(), schema.end(),
                                 [&](const ColumnSpec& c) { return c.name == required.name; });
        if (!found)
            throw DatasetError(path + ": missing mandatory column '" + required.name + "'");
    }
    return schema;
}

std::optional<Protocol> protocol_of_filename(const std::string& name) {
    std::string stem = name;
    if (stem.size() > 3 && stem.compare(stem.size() - 3, 3, ".gz") == 0)
        stem.resize(stem.size() - 3);
    const std::string suffix = ".records";
    if (stem.size() <= suffix.size() ||
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) != 0)
        return std::nullopt;
    stem.resize(stem.size() - suffix.size());
    return protocol_from_name(stem);
}

}  // namespace

Dataset Dataset::open(const fs::path& root, DatasetOptions opts) {
    if (!fs::is_directory(root))
        throw DatasetError("dataset directory not found: " + root.string());

    Dataset ds;
    ds.root_ = root;
    ds.opts_ = opts;

    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_regular_file()) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    for (const auto& path : entries) {
        auto proto = protocol_of_filename(path.filename().string());
        if (!proto) continue;  // unrelated file, e.g. truth.json
        if (ds.manifest_.count(*proto))
            throw DatasetError("duplicate files for protocol '" +
                               std::string(protocol_name(*proto)) + "' in " + root.string());
        LineScanner scanner(open_byte_source(path.string(), ds.counter_.get()), path.string());
        std::string_view header;
        if (!scanner.next(header))
            throw DatasetError(path.string() + ": empty file (no header line)");
        ProtocolFile pf;
        pf.protocol = *proto;
        pf.path = path;
        pf.schema = parse_header(header, *proto, path.string());
        ds.manifest_.emplace(*proto, std::move(pf));
    }
    return ds;
}

const ProtocolFile& Dataset::file(Protocol p) const {
    auto it = manifest_.find(p);
    if (it == manifest_.end())
        throw DatasetError(std::string("protocol '") + protocol_name(p) +
                           "' not present in dataset " + root_.string());
    return it->second;
}

ScanStats Dataset::scan_stats(Protocol p) const {
    const ProtocolFile& pf = file(p);
    ScanStats stats;

    auto start = std::chrono::steady_clock::now();
    LineScanner scanner(open_byte_source(pf.path.string(), counter_.get()), pf.path.string());
    std::string_view line;
    if (!scanner.next(line))
        throw ParseError(pf.path.string(), 0, "missing header");

    const size_t arity = pf.schema.size();
    std::vector<std::string_view> fields;
    fields.reserve(arity);
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
        bool bad = fields.size() != arity;
        if (!bad) {
            for (size_t i = 0; i < arity; ++i) {
                if (fields[i].empty()) continue;  // absent value
                switch (pf.schema[i].type) {
                    case ColumnType::f64:
                        if (!parse_f64(fields[i])) bad = true;
                        break;
                    case ColumnType::i64:
                        if (!parse_i64(fields[i])) bad = true;
                        break;
                    case ColumnType::text:
                        break;
                }
                if (bad) break;
            }
        }
        if (bad) {
            if (opts_.skip_bad_rows) {
                ++stats.skipped_rows;
                continue;
            }
            throw ParseError(pf.path.string(), scanner.line_number(),
                             fields.size() != arity
                                 ? "row has " + std::to_string(fields.size()) +
                                       " fields, header declares " + std::to_string(arity)
                                 : "malformed numeric field");
        }
        ++stats.row_count;
    }
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    stats.byte_count = scanner.source_bytes();
    stats.seconds = elapsed.count();
    stats.rows_per_second = stats.seconds > 0 ? stats.row_count / stats.seconds : 0.0;
    return stats;
}

}  // namespace flowrep
