#pragma once

#include <stdexcept>
#include <string>

namespace tpn {

// Mirrors the status codes of the C API; the CLI maps them onto exit codes.
enum class ErrorCode {
  invalid_argument = 1,
  invalid_config = 2,
  non_finite = 3,
  not_converged = 4,
  grid_mismatch = 5,
  io = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace tpn
