#pragma once

#include <stdexcept>
#include <string>

namespace heal {

enum class ErrorKind { InvalidArgument, Range, Numerical, Io };

class HealError : public std::runtime_error {
 public:
  HealError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw HealError(kind, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace heal
