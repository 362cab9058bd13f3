#ifndef PIVALIGN_ERROR_H_
#define PIVALIGN_ERROR_H_

#include <stdexcept>
#include <string>

namespace pivalign {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind {
  kConfig = 2,
  kIo = 3,
  kBackend = 4,
  kData = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline Error ConfigError(const std::string& what) { return Error(ErrorKind::kConfig, what); }
inline Error IoError(const std::string& what) { return Error(ErrorKind::kIo, what); }
inline Error BackendError(const std::string& what) { return Error(ErrorKind::kBackend, what); }
inline Error DataError(const std::string& what) { return Error(ErrorKind::kData, what); }

}  // namespace pivalign

#endif  // PIVALIGN_ERROR_H_
