#include "flowrep/scanner.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace flowrep {

namespace {

class FileSource final : public ByteSource {
public:
    FileSource(const std::string& path, std::atomic<uint64_t>* counter)
        : file_(std::fopen(path.c_str(), "rb")), counter_(counter), path_(path) {
        if (!file_) throw std::runtime_error("cannot open " + path);
    }
    ~FileSource() override {
        if (file_) std::fclose(file_);
    }

    size_t read(char* dst, size_t n) override {
        size_t got = std::fread(dst, 1, n, file_);
        if (got < n && std::ferror(file_))
            throw std::runtime_error("read error on " + path_);
        bytes_ += got;
        if (counter_) counter_->fetch_add(got, std::memory_order_relaxed);
        return got;
    }

    uint64_t source_bytes() const override { return bytes_; }

private:
    std::FILE* file_;
    std::atomic<uint64_t>* counter_;
    std::string path_;
    uint64_t bytes_ = 0;
};

class GzipSource final : public ByteSource {
public:
    GzipSource(std::unique_ptr<ByteSource> raw, std::string path)
        : raw_(std::move(raw)), path_(std::move(path)) {
        std::memset(&strm_, 0, sizeof(strm_));
        // 15 + 32: zlib or gzip wrapper, auto-detected.
        if (inflateInit2(&strm_, 15 + 32) != Z_OK)
            throw std::runtime_error("inflateInit failed for " + path_);
        in_.resize(1 << 16);
    }
    ~GzipSource() override { inflateEnd(&strm_); }

    size_t read(char* dst, size_t n) override {
        strm_.next_out = reinterpret_cast<Bytef*>(dst);
        strm_.avail_out = static_cast<uInt>(n);
        while (strm_.avail_out > 0 && !done_) {
            if (strm_.avail_in == 0) {
                size_t got = raw_->read(in_.data(), in_.size());
                if (got == 0) {
                    if (strm_.avail_out == n)
                        break;  // clean EOF between members
                    throw std::runtime_error("truncated gzip stream: " + path_);
                }
                strm_.next_in = reinterpret_cast<Bytef*>(in_.data());
                strm_.avail_in = static_cast<uInt>(got);
            }
            int rc = inflate(&strm_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END) {
                if (strm_.avail_in > 0) {
                    // Concatenated gzip members: restart on the remaining input.
                    if (inflateReset2(&strm_, 15 + 32) != Z_OK)
                        throw std::runtime_error("inflateReset failed for " + path_);
                } else {
                    done_ = true;
                }
            } else if (rc != Z_OK) {
                throw std::runtime_error("corrupt gzip data in " + path_);
            }
        }
        return n - strm_.avail_out;
    }

    uint64_t source_bytes() const override { return raw_->source_bytes(); }

private:
    std::unique_ptr<ByteSource> raw_;
    std::string path_;
    z_stream strm_;
    std::string in_;
    bool done_ = false;
};

}  // namespace

std::unique_ptr<ByteSource> open_byte_source(const std::string& path,
                                             std::atomic<uint64_t>* counter) {
    auto raw = std::make_unique<FileSource>(path, counter);
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0)
        return std::make_unique<GzipSource>(std::move(raw), path);
    return raw;
}

LineScanner::LineScanner(std::unique_ptr<ByteSource> source, std::string name)
    : source_(std::move(source)), name_(std::move(name)), cap_(1 << 20) {
    buf_ = std::make_unique<char[]>(cap_);
}

LineScanner::~LineScanner() = default;

bool LineScanner::refill() {
    if (eof_) return false;
    if (begin_ > 0) {
        std::memmove(buf_.get(), buf_.get() + begin_, end_ - begin_);
        end_ -= begin_;
        begin_ = 0;
    }
    if (end_ == cap_) {
        size_t new_cap = cap_ * 2;
        auto grown = std::make_unique<char[]>(new_cap);
        std::memcpy(grown.get(), buf_.get(), end_);
        buf_ = std::move(grown);
        cap_ = new_cap;
    }
    size_t got = source_->read(buf_.get() + end_, cap_ - end_);
    if (got == 0) {
        eof_ = true;
        return false;
    }
    end_ += got;
    return true;
}

bool LineScanner::next(std::string_view& line) {
    while (true) {
        const char* base = buf_.get() + begin_;
        size_t avail = end_ - begin_;
        const char* nl = static_cast<const char*>(std::memchr(base, '\n', avail));
        if (nl) {
            size_t len = static_cast<size_t>(nl - base);
            if (len > 0 && base[len - 1] == '\r') --len;
            line = std::string_view(base, len);
            begin_ += static_cast<size_t>(nl - base) + 1;
            ++line_number_;
            return true;
        }
        if (!refill()) {
            if (avail == 0) return false;
            size_t len = avail;
            if (len > 0 && base[len - 1] == '\r') --len;
            line = std::string_view(base, len);
            begin_ = end_;
            ++line_number_;
            return true;
        }
    }
}

}  // namespace flowrep
