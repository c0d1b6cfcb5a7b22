#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace flowrep {

/// Raw byte stream with an exact read-byte counter. The counter is the hook
/// for the single-pass invariant: one full scan must report <= file size.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    /// Reads up to n bytes; returns 0 at EOF. Throws std::runtime_error on I/O failure.
    virtual size_t read(char* dst, size_t n) = 0;
    /// Bytes consumed from the underlying file so far (compressed size for .gz).
    virtual uint64_t source_bytes() const = 0;
};

/// Opens path as a counted source; paths ending in ".gz" are inflated
/// transparently. `counter`, when given, is bumped by every raw read.
std::unique_ptr<ByteSource> open_byte_source(const std::string& path,
                                             std::atomic<uint64_t>* counter = nullptr);

/// Buffered line splitter over a ByteSource. Lines are LF-terminated;
/// a trailing CR is stripped. Returned views stay valid until the next call.
class LineScanner {
public:
    LineScanner(std::unique_ptr<ByteSource> source, std::string name);
    ~LineScanner();

    /// False at EOF. The final line may lack a trailing LF.
    bool next(std::string_view& line);

    uint64_t line_number() const { return line_number_; }
    uint64_t source_bytes() const { return source_->source_bytes(); }
    const std::string& name() const { return name_; }

private:
    bool refill();

    std::unique_ptr<ByteSource> source_;
    std::string name_;
    std::unique_ptr<char[]> buf_;
    size_t cap_;
    size_t begin_ = 0;   // start of unconsumed data
    size_t end_ = 0;     // one past last valid byte
    bool eof_ = false;
    uint64_t line_number_ = 0;
};

}  // namespace flowrep
