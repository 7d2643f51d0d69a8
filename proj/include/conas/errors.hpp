#pragma once

#include <stdexcept>

namespace conas {

/// Invalid or unreadable run configuration. The CLI maps it to exit code 2;
/// every other exception is a runtime error (exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conas
