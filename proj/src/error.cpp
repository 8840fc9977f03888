#include "readcx/error.hpp"

namespace readcx {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Structure: return "structure error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Mapping: return "mapping error";
    case ErrorKind::Ordering: return "ordering error";
    case ErrorKind::MissingData: return "missing-data error";
    case ErrorKind::DegenerateInput: return "degenerate-input error";
    case ErrorKind::DegenerateScale: return "degenerate-scale error";
    case ErrorKind::DegenerateTarget: return "degenerate-target error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Value: return "value error";
    case ErrorKind::Duplication: return "duplication error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::MissingData:
    case ErrorKind::DegenerateInput:
    case ErrorKind::DegenerateScale:
    case ErrorKind::DegenerateTarget:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

StructureError::StructureError(std::string sentence_id, const std::string& message)
    : Error(ErrorKind::Structure, "sentence '" + sentence_id + "': " + message),
      sentence_id_(std::move(sentence_id)) {}

}  // namespace readcx
