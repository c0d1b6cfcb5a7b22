#pragma once

#include <stdexcept>
#include <string>

namespace flowrep {

/// Dataset-level failures: missing directory, bad manifest, bad header.
class DatasetError : public std::runtime_error {
public:
    explicit DatasetError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Row-level failures during materialization. Carries file/line context in the message.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, uint64_t line, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
          line_(line) {}
    uint64_t line() const { return line_; }

private:
    uint64_t line_;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace flowrep
