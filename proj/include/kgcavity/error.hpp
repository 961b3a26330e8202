#pragma once

#include <stdexcept>
#include <string>

namespace kgcavity {

// Every error the library raises derives from Error so callers (and the CLI)
// can report a machine-readable kind alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& what) : Error("IndexError", what) {}
};

class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error("GridMismatch", what) {}
};

class CacheIOError : public Error {
public:
    explicit CacheIOError(const std::string& what) : Error("CacheIOError", what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error("DimensionError", what) {}
};

class ThresholdUnreachable : public Error {
public:
    ThresholdUnreachable(const std::string& what, double captured)
        : Error("ThresholdUnreachable", what), captured_(captured) {}
    [[nodiscard]] double captured() const noexcept { return captured_; }

private:
    double captured_;
};

}  // namespace kgcavity
