#pragma once

#include <stdexcept>
#include <string>

namespace ersim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or numerical argument is outside its allowed domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string section, int line)
      : Error(format(message, section, line)), section_(std::move(section)), line_(line) {}

  const std::string& section() const noexcept { return section_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& message, const std::string& section, int line) {
    std::string where;
    if (line > 0) where += "line " + std::to_string(line);
    if (!section.empty()) where += (where.empty() ? "" : ", ") + std::string("section [") + section + "]";
    return where.empty() ? message : where + ": " + message;
  }

  std::string section_;
  int line_;
};

/// Unreadable, truncated or corrupt click-stream / CSV data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (cannot open, cannot write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Analysis input that cannot produce a result (e.g. mismatched scan grids).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace ersim
