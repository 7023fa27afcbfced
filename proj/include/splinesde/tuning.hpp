#pragma once

#include <cstddef>

namespace splinesde {

/// MALA step sizes and chain length. delta1/delta3 scale the gradient drift of
/// the ξ and θ proposals, delta2/delta4 are their standard deviations.
struct TuningSpec {
  double delta1 = 8e-4;
  double delta2 = 4e-2;
  double delta3 = 5e-5;
  double delta4 = 1e-2;
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  /// Robbins–Monro scaling during burn-in only: delta2/delta4 by s and
  /// delta1/delta3 by s².
  bool adapt = false;
  double target_acceptance = 0.57;

  /// Throws ConfigError on non-positive proposal scales, negative drift
  /// scales, thin = 0 or burn_in ≥ iterations (when iterations > 0).
  void validate() const;
};

}  // namespace splinesde
