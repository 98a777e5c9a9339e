#pragma once

#include <stdexcept>
#include <string>

namespace cbandits {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph validation.
struct CycleDetected : Error { using Error::Error; };
struct RewardNotLast : Error { using Error::Error; };
struct BadEdge : Error { using Error::Error; };

// Model validation.
struct BadModel : Error { using Error::Error; };
struct LatentSingleChild : Error { using Error::Error; };

// Exact oracles.
struct TooLargeForExactOracle : Error { using Error::Error; };
struct ArmOutsideFamily : Error { using Error::Error; };

// Covering construction.
struct CoverConstructionFailed : Error { using Error::Error; };

// Inference.
struct InsufficientCoverage : Error { using Error::Error; };
struct TreewidthCapExceeded : Error { using Error::Error; };

// Agents and harness.
struct HorizonTooSmall : Error { using Error::Error; };
struct EmptyReport : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace cbandits
