#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace portagrad {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Audio file problems. Kind distinguishes the failure classes callers branch on.
class IngestError : public Error {
public:
    enum class Kind { unreadable, unsupported, empty, channels };

    IngestError(Kind kind, std::string path, const std::string& detail)
        : Error(detail + ": " + path), kind_(kind), path_(std::move(path)) {}

    Kind kind() const { return kind_; }
    const std::string& path() const { return path_; }

private:
    Kind kind_;
    std::string path_;
};

// CSV corpus problems, reported with the 1-based file line (header is line 1).
class CorpusError : public Error {
public:
    CorpusError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace portagrad
