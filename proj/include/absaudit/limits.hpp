#pragma once

#include <cstddef>

namespace absaudit {

/// Probability comparison tolerance used throughout.
inline constexpr double kTolerance = 1e-9;

struct EnumerationLimits {
  std::size_t max_states = 10'000'000;  // joint exogenous / endogenous states
  std::size_t max_morphisms = 100'000;  // paths in a single hom-set
};

/// Default limits, with both caps replaced by ABSAUDIT_ENUM_CAP when it is set
/// to a positive integer.
EnumerationLimits limits_from_environment();

}  // namespace absaudit
