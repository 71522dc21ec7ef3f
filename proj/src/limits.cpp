#include "absaudit/limits.hpp"

#include <cstdlib>
#include <string>

namespace absaudit {

EnumerationLimits limits_from_environment() {
  EnumerationLimits limits;
  if (const char* raw = std::getenv("ABSAUDIT_ENUM_CAP")) {
    try {
      std::size_t pos = 0;
      unsigned long long cap = std::stoull(raw, &pos);
      if (pos == std::string(raw).size() && cap > 0) {
        limits.max_states = static_cast<std::size_t>(cap);
        limits.max_morphisms = static_cast<std::size_t>(cap);
      }
    } catch (const std::exception&) {
      // malformed values fall back to the defaults
    }
  }
  return limits;
}

}  // namespace absaudit
