#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carbomarket {

// Categories map one-to-one onto CLI exit codes (see tools/).
enum class ErrorKind {
  kUsage = 2,
  kData = 3,
  kInfeasible = 4,
  kNumeric = 5,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  // Stable, machine-parsable identifier such as "E_SINGULAR_BASIS".
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kNumeric:
      return "numeric";
  }
  return "unknown";
}

[[noreturn]] inline void ThrowData(std::string code, const std::string& msg) {
  throw Error(ErrorKind::kData, std::move(code), msg);
}
[[noreturn]] inline void ThrowNumeric(std::string code, const std::string& msg) {
  throw Error(ErrorKind::kNumeric, std::move(code), msg);
}
[[noreturn]] inline void ThrowInfeasible(std::string code,
                                         const std::string& msg) {
  throw Error(ErrorKind::kInfeasible, std::move(code), msg);
}

}  // namespace carbomarket
