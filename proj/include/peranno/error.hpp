#pragma once

#include <stdexcept>
#include <string>

namespace peranno {

// Single exception type for all toolkit errors. Messages carry enough
// context (instance id, field, file) to act on from a CLI diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace peranno
