#pragma once

#include <stdexcept>
#include <string>

namespace pinlab {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Exponent exactly 1 is outside the supported power-law family (marginal case).
struct ExponentOne : Error { using Error::Error; };
struct NonPositiveExponent : Error { using Error::Error; };
// A request walked past the end of a cached pmf/survival table.
struct HorizonExceedsCache : Error { using Error::Error; };
struct NotEnoughGaps : Error { using Error::Error; };
// n_step_law cap below the minimum reachable support point.
struct CapTooSmall : Error { using Error::Error; };
struct SetOutOfRange : Error { using Error::Error; };
struct TooLargeForBruteForce : Error { using Error::Error; };
// contact_distribution cap larger than the system size.
struct CapExceedsSize : Error { using Error::Error; };
struct InconsistentTable : Error { using Error::Error; };
// Disorder stretch exponent <= 1: stretch lengths would have no finite mean,
// so the environment loses its ergodic averages.
struct StretchMeanDiverges : Error { using Error::Error; };
struct WrongConstruction : Error { using Error::Error; };
struct BadPartition : Error { using Error::Error; };
// Fit rejected because the data are noise-dominated inside the window.
struct InsufficientSignal : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };

}  // namespace pinlab
