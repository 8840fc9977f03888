#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace readcx {

enum class ErrorKind {
  Parse,
  Structure,
  Range,
  Schema,
  Mapping,
  Ordering,
  MissingData,
  DegenerateInput,
  DegenerateScale,
  DegenerateTarget,
  Dimension,
  Value,
  Duplication,
  Alignment,
  Argument,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Validation errors are caused by bad inputs; everything else is a runtime
// failure. The CLI maps the two onto exit codes 1 and 2.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Dependency annotation that does not form a single rooted tree.
class StructureError : public Error {
 public:
  StructureError(std::string sentence_id, const std::string& message);

  const std::string& sentence_id() const noexcept { return sentence_id_; }

 private:
  std::string sentence_id_;
};

}  // namespace readcx
