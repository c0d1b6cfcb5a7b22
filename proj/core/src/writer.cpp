#include "flowrep/writer.hpp"

#include <zlib.h>

#include <stdexcept>

#include "flowrep/text.hpp"

namespace flowrep {

namespace {

std::string opt_seconds(const std::optional<double>& v) {
    return v ? format_fixed(*v, 6) : std::string();
}

double req_f64(const RecordBatch& b, std::string_view col, size_t row) {
    return b.at(col).as_f64(row);
}

int64_t req_i64(const RecordBatch& b, std::string_view col, size_t row) {
    return b.at(col).as_i64(row);
}

std::string req_text(const RecordBatch& b, std::string_view col, size_t row) {
    return std::string(b.at(col).as_text(row));
}

std::optional<double> opt_f64(const RecordBatch& b, std::string_view col, size_t row) {
    const Column& c = b.at(col);
    if (!c.is_present(row)) return std::nullopt;
    return c.as_f64(row);
}

}  // namespace

RecordFileWriter::RecordFileWriter(const std::filesystem::path& path,
                                   const std::vector<ColumnSpec>& schema)
    : path_(path.string()), arity_(schema.size()) {
    if (path_.size() > 3 && path_.compare(path_.size() - 3, 3, ".gz") == 0) {
        gz_ = gzopen(path_.c_str(), "wb");
        if (!gz_) throw std::runtime_error("cannot open " + path_ + " for writing");
    } else {
        plain_ = std::fopen(path_.c_str(), "wb");
        if (!plain_) throw std::runtime_error("cannot open " + path_ + " for writing");
    }
    line_ = "#";
    for (size_t i = 0; i < schema.size(); ++i) {
        if (i) line_ += '\t';
        line_ += schema[i].name;
    }
    line_ += '\n';
    write_raw(line_);
}

RecordFileWriter::~RecordFileWriter() { close(); }

void RecordFileWriter::write_raw(std::string_view data) {
    if (gz_) {
        if (gzwrite(static_cast<gzFile>(gz_), data.data(), static_cast<unsigned>(data.size())) !=
            static_cast<int>(data.size()))
            throw std::runtime_error("write error on " + path_);
    } else if (plain_) {
        if (std::fwrite(data.data(), 1, data.size(), plain_) != data.size())
            throw std::runtime_error("write error on " + path_);
    }
}

void RecordFileWriter::write_row(const std::vector<std::string>& fields) {
    if (fields.size() != arity_)
        throw std::runtime_error(path_ + ": row arity " + std::to_string(fields.size()) +
                                 " does not match schema " + std::to_string(arity_));
    line_.clear();
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line_ += '\t';
        line_ += fields[i];
    }
    line_ += '\n';
    write_raw(line_);
}

void RecordFileWriter::close() {
    if (gz_) {
        gzclose(static_cast<gzFile>(gz_));
        gz_ = nullptr;
    }
    if (plain_) {
        std::fclose(plain_);
        plain_ = nullptr;
    }
}

std::vector<std::string> to_fields(const ConversationRecord& r) {
    std::vector<std::string> f = {
        format_fixed(r.ts_start, 6), format_fixed(r.ts_end, 6), r.endpoint_a, r.endpoint_b};
    if (r.layer == Protocol::udp) {
        f.push_back(r.port_a ? format_i64(*r.port_a) : "");
        f.push_back(r.port_b ? format_i64(*r.port_b) : "");
    }
    f.push_back(format_i64(r.pkts_a2b));
    f.push_back(format_i64(r.pkts_b2a));
    f.push_back(format_i64(r.bytes_a2b));
    f.push_back(format_i64(r.bytes_b2a));
    return f;
}

std::vector<std::string> to_fields(const TcpRecord& r) {
    return {format_fixed(r.ts_start, 6), format_fixed(r.ts_end, 6), r.src_ip, r.dst_ip,
            format_i64(r.src_port), format_i64(r.dst_port), format_i64(r.pkts_s2d),
            format_i64(r.pkts_d2s), format_i64(r.bytes_s2d), format_i64(r.bytes_d2s),
            format_i64(r.data_pkts_s2d), format_i64(r.data_pkts_d2s), format_i64(r.syn_count),
            format_i64(r.synack_count), format_i64(r.ignored_syns), format_i64(r.retx_s2d),
            format_i64(r.retx_d2s), format_i64(r.dupack_s2d), format_i64(r.dupack_d2s),
            format_i64(r.zwin_s2d), format_i64(r.zwin_d2s), opt_seconds(r.cet_s),
            opt_seconds(r.rtt_s)};
}

std::vector<std::string> to_fields(const HttpRecord& r) {
    return {format_fixed(r.ts, 6), r.client_ip, r.server_ip, format_i64(r.server_port),
            r.method, r.url, format_i64(r.response_code), opt_seconds(r.response_time_s)};
}

std::vector<std::string> to_fields(const DnsRecord& r) {
    return {format_fixed(r.ts, 6), r.client_ip, r.server_ip, r.query_name, r.qtype,
            format_i64(r.rcode), opt_seconds(r.response_time_ms)};
}

std::vector<std::string> to_fields(const IcmpRecord& r) {
    return {format_fixed(r.ts, 6), r.src_ip, r.dst_ip, format_i64(r.icmp_type),
            format_i64(r.icmp_code), format_i64(r.count)};
}

ConversationRecord conversation_from_batch(const RecordBatch& b, size_t row, Protocol layer) {
    ConversationRecord r;
    r.layer = layer;
    r.ts_start = req_f64(b, "ts_start", row);
    r.ts_end = req_f64(b, "ts_end", row);
    r.endpoint_a = req_text(b, "endpoint_a", row);
    r.endpoint_b = req_text(b, "endpoint_b", row);
    if (layer == Protocol::udp) {
        const Column& pa = b.at("port_a");
        const Column& pb = b.at("port_b");
        if (pa.is_present(row)) r.port_a = pa.as_i64(row);
        if (pb.is_present(row)) r.port_b = pb.as_i64(row);
    }
    r.pkts_a2b = req_i64(b, "pkts_a2b", row);
    r.pkts_b2a = req_i64(b, "pkts_b2a", row);
    r.bytes_a2b = req_i64(b, "bytes_a2b", row);
    r.bytes_b2a = req_i64(b, "bytes_b2a", row);
    return r;
}

TcpRecord tcp_from_batch(const RecordBatch& b, size_t row) {
    TcpRecord r;
    r.ts_start = req_f64(b, "ts_start", row);
    r.ts_end = req_f64(b, "ts_end", row);
    r.src_ip = req_text(b, "src_ip", row);
    r.dst_ip = req_text(b, "dst_ip", row);
    r.src_port = req_i64(b, "src_port", row);
    r.dst_port = req_i64(b, "dst_port", row);
    r.pkts_s2d = req_i64(b, "pkts_s2d", row);
    r.pkts_d2s = req_i64(b, "pkts_d2s", row);
    r.bytes_s2d = req_i64(b, "bytes_s2d", row);
    r.bytes_d2s = req_i64(b, "bytes_d2s", row);
    r.data_pkts_s2d = req_i64(b, "data_pkts_s2d", row);
    r.data_pkts_d2s = req_i64(b, "data_pkts_d2s", row);
    r.syn_count = req_i64(b, "syn_count", row);
    r.synack_count = req_i64(b, "synack_count", row);
    r.ignored_syns = req_i64(b, "ignored_syns", row);
    r.retx_s2d = req_i64(b, "retx_s2d", row);
    r.retx_d2s = req_i64(b, "retx_d2s", row);
    r.dupack_s2d = req_i64(b, "dupack_s2d", row);
    r.dupack_d2s = req_i64(b, "dupack_d2s", row);
    r.zwin_s2d = req_i64(b, "zwin_s2d", row);
    r.zwin_d2s = req_i64(b, "zwin_d2s", row);
    r.cet_s = opt_f64(b, "cet_s", row);
    r.rtt_s = opt_f64(b, "rtt_s", row);
    return r;
}

HttpRecord http_from_batch(const RecordBatch& b, size_t row) {
    HttpRecord r;
    r.ts = req_f64(b, "ts", row);
    r.client_ip = req_text(b, "client_ip", row);
    r.server_ip = req_text(b, "server_ip", row);
    r.server_port = req_i64(b, "server_port", row);
    r.method = req_text(b, "method", row);
    r.url = req_text(b, "url", row);
    r.response_code = req_i64(b, "response_code", row);
    r.response_time_s = opt_f64(b, "response_time_s", row);
    return r;
}

DnsRecord dns_from_batch(const RecordBatch& b, size_t row) {
    DnsRecord r;
    r.ts = req_f64(b, "ts", row);
    r.client_ip = req_text(b, "client_ip", row);
    r.server_ip = req_text(b, "server_ip", row);
    r.query_name = req_text(b, "query_name", row);
    r.qtype = req_text(b, "qtype", row);
    r.rcode = req_i64(b, "rcode", row);
    r.response_time_ms = opt_f64(b, "response_time_ms", row);
    return r;
}

IcmpRecord icmp_from_batch(const RecordBatch& b, size_t row) {
    IcmpRecord r;
    r.ts = req_f64(b, "ts", row);
    r.src_ip = req_text(b, "src_ip", row);
    r.dst_ip = req_text(b, "dst_ip", row);
    r.icmp_type = req_i64(b, "icmp_type", row);
    r.icmp_code = req_i64(b, "icmp_code", row);
    r.count = req_i64(b, "count", row);
    return r;
}

}  // namespace flowrep
