#pragma once

#include <string>
#include <vector>

namespace absaudit {

enum class Severity { Error, Warning };

struct Defect {
  Severity severity = Severity::Error;
  std::string message;
};

/// Collected defects of a validation pass. Empty iff the object is well-formed.
struct ValidationReport {
  std::vector<Defect> defects;

  bool clean() const noexcept { return defects.empty(); }
  bool has_errors() const noexcept {
    for (const auto& d : defects)
      if (d.severity == Severity::Error) return true;
    return false;
  }
  bool mentions(const std::string& text) const {
    for (const auto& d : defects)
      if (d.message.find(text) != std::string::npos) return true;
    return false;
  }
  void error(std::string message) { defects.push_back({Severity::Error, std::move(message)}); }
  void warning(std::string message) { defects.push_back({Severity::Warning, std::move(message)}); }
};

}  // namespace absaudit
