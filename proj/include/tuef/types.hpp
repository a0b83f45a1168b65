#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tuef {

using PostId = std::int64_t;
using UserId = std::int64_t;
/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sentinel used for features that have no defined value (missing trace, no interval).
inline constexpr double kFeatureSentinel = 1e6;

}  // namespace tuef
