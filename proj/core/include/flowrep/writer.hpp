#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flowrep/batch.hpp"
#include "flowrep/records.hpp"

namespace flowrep {

// Record file writing plus struct <-> row conversion.
//
// On-disk format: '#' + tab-separated header, one tab-separated record per
// line, UTF-8, LF endings, empty field = absent value. Seconds-typed fields
// are written with 6 decimals; integer fields verbatim.

class RecordFileWriter {
public:
    /// Opens path for writing; a ".gz" suffix selects gzip output.
    RecordFileWriter(const std::filesystem::path& path, const std::vector<ColumnSpec>& schema);
    ~RecordFileWriter();

    RecordFileWriter(const RecordFileWriter&) = delete;
    RecordFileWriter& operator=(const RecordFileWriter&) = delete;

    void write_row(const std::vector<std::string>& fields);
    void close();

private:
    void write_raw(std::string_view data);

    std::FILE* plain_ = nullptr;
    void* gz_ = nullptr;  // gzFile
    std::string path_;
    size_t arity_;
    std::string line_;
};

std::vector<std::string> to_fields(const ConversationRecord& r);
std::vector<std::string> to_fields(const TcpRecord& r);
std::vector<std::string> to_fields(const HttpRecord& r);
std::vector<std::string> to_fields(const DnsRecord& r);
std::vector<std::string> to_fields(const IcmpRecord& r);

ConversationRecord conversation_from_batch(const RecordBatch& b, size_t row, Protocol layer);
TcpRecord tcp_from_batch(const RecordBatch& b, size_t row);
HttpRecord http_from_batch(const RecordBatch& b, size_t row);
DnsRecord dns_from_batch(const RecordBatch& b, size_t row);
IcmpRecord icmp_from_batch(const RecordBatch& b, size_t row);

}  // namespace flowrep
