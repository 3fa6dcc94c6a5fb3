#pragma once

#include <stdexcept>
#include <string>

namespace aif {

// Base for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Parameter transform applied outside its domain, config/data inconsistency, etc.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// All particle weights collapsed to -inf at some observation time.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, int time_index, int iteration = -1)
        : Error(what), time_index(time_index), iteration(iteration) {}

    int time_index;  // 1-based observation index n
    int iteration;   // estimation iteration m, -1 outside an estimation loop
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace aif
