#ifndef FSS_ERROR_HPP
#define FSS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fss {

// Error categories, aligned with the CLI exit codes and the C API status
// codes: usage = 1, data = 2, numeric = 3.
enum class ErrorKind { usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& msg) {
  throw Error(ErrorKind::usage, msg);
}
[[noreturn]] inline void fail_data(const std::string& msg) {
  throw Error(ErrorKind::data, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::numeric, msg);
}

}  // namespace fss

#endif
