#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ghs {

// Error classes map one-to-one onto CLI exit codes (see README).
enum class ErrorKind {
  shape,
  config,
  format,
  numeric,
  degenerate,
  statistic,
  registry,
  generation,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape_error";
    case ErrorKind::config: return "config_error";
    case ErrorKind::format: return "format_error";
    case ErrorKind::numeric: return "numeric_error";
    case ErrorKind::degenerate: return "degenerate_error";
    case ErrorKind::statistic: return "statistic_error";
    case ErrorKind::registry: return "registry_error";
    case ErrorKind::generation: return "generation_error";
    case ErrorKind::io: return "io_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorKind::shape, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

/// Malformed GHSR/GHSM payload. `offset()` is the byte position where
/// decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& w, std::uint64_t offset)
      : Error(ErrorKind::format,
              w + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

// Batch too small for batch statistics, or a single-class training set.
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& w)
      : Error(ErrorKind::degenerate, w) {}
};

// Undefined statistic (zero variance, empty class row, empty sample set).
struct StatisticError : Error {
  explicit StatisticError(const std::string& w)
      : Error(ErrorKind::statistic, w) {}
};

struct RegistryError : Error {
  explicit RegistryError(const std::string& w) : Error(ErrorKind::registry, w) {}
};

struct GenerationError : Error {
  explicit GenerationError(const std::string& w)
      : Error(ErrorKind::generation, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace ghs
