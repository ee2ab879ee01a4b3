#pragma once
// Error taxonomy shared across the library. The CLI maps these to exit codes:
// ConfigError -> 2 (usage / configuration), DataError -> 3 (data integrity).

#include <stdexcept>
#include <string>

namespace pcfnet {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcfnet
