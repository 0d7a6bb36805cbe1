#pragma once

#include <stdexcept>
#include <string>

namespace cflow {

// Malformed input documents. `path` is a JSON-pointer-like location.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AllocationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Plan and spec disagree, or the plan cannot be mapped onto units.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value exceeded its worst-case width.
class OverflowError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace cflow
