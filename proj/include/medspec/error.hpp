#pragma once

#include <stdexcept>
#include <string>

namespace medspec {

/// Error classes surfaced by the library. The CLI maps each one to its own
/// process exit code (see exit_code()).
enum class ErrorCode {
  format,
  empty_input,
  index_range,
  shape,
  domain,
  precondition,
  voxelization,
  connectivity,
  convergence,
  data,
  io,
  validation,
  dependency,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::format: return "format";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::index_range: return "index-range";
    case ErrorCode::shape: return "shape";
    case ErrorCode::domain: return "domain";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::voxelization: return "voxelization";
    case ErrorCode::connectivity: return "connectivity";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::data: return "data";
    case ErrorCode::io: return "io";
    case ErrorCode::validation: return "validation";
    case ErrorCode::dependency: return "dependency";
  }
  return "unknown";
}

inline int exit_code(ErrorCode code) { return 2 + static_cast<int>(code); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace medspec
