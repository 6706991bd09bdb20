#pragma once

#include <stdexcept>
#include <string>

namespace metadecomp {

/// Classifies failures so the command-line driver can map them to exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kDisconnected,
  kNotAcyclic,
  kWidthOverflow,
  kUnknownCardinality,
  kCapExceeded,
  kSchema,
  kInternal,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kParse: return "parse-error";
    case ErrorKind::kDisconnected: return "disconnected";
    case ErrorKind::kNotAcyclic: return "not-acyclic";
    case ErrorKind::kWidthOverflow: return "width-overflow";
    case ErrorKind::kUnknownCardinality: return "unknown-cardinality";
    case ErrorKind::kCapExceeded: return "cap-exceeded";
    case ErrorKind::kSchema: return "schema-mismatch";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace metadecomp
