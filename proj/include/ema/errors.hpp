#pragma once

#include <stdexcept>
#include <string>

namespace ema {

// Base of every error raised by the library. `kind()` is the stable
// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EMA_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

EMA_DEFINE_ERROR(DomainError)
EMA_DEFINE_ERROR(QuadratureError)
EMA_DEFINE_ERROR(SingularInput)
EMA_DEFINE_ERROR(ConfigError)
EMA_DEFINE_ERROR(FlowSingular)
EMA_DEFINE_ERROR(BisectionError)
EMA_DEFINE_ERROR(IoError)

#undef EMA_DEFINE_ERROR

}  // namespace ema
