#pragma once

#include "splinesde/model.hpp"
#include "splinesde/observations.hpp"
#include "splinesde/random.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace splinesde {

/// Affine interpolation m_i(t) between consecutive transformed observations.
struct CenteringLine {
  std::size_t interval = 0;
  double x_start = 0.0;
  double x_end = 0.0;
  double delta = 0.0;

  double operator()(double t) const noexcept {
    return x_start + (t / delta) * (x_end - x_start);
  }
};

struct TransformedObservations {
  std::vector<double> x;
  std::vector<CenteringLine> lines;
};

/// x_i = η(v_{t_i}) and the centering line of every interval.
TransformedObservations transform_observations(const Model& model,
                                               const ObservationSeries& obs);

/// Accepted skeleton for one observation interval. Innovations are values of
/// a Brownian bridge from 0 to 0 over [0, delta]; the path itself is
/// z + m(t), so it can be re-centred under a different ξ without resampling.
struct IntervalSkeleton {
  double delta = 0.0;
  double x_start = 0.0;  // endpoints under the params that generated it
  double x_end = 0.0;
  std::vector<double> times;        // Poisson times ψ, sorted, in (0, delta)
  std::vector<double> marks;        // χ, one per time
  std::vector<double> innovations;  // Z at ψ
  /// Extra bridge points revealed after acceptance. They condition later
  /// bridge draws but are not Poisson points and do not enter the density.
  std::vector<double> revealed_times;
  std::vector<double> revealed_innovations;

  std::size_t count() const noexcept { return times.size(); }
};

struct Skeleton {
  std::vector<IntervalSkeleton> intervals;
  std::size_t total_points() const noexcept;
};

struct SamplerOptions {
  std::size_t max_attempts = 1'000'000;
  unsigned threads = 1;
};

/// Path-space rejection sampling of one interval: Poisson(r_plus Δ) times,
/// uniform marks, bridge innovations at the times, accepted iff every mark
/// exceeds (G(z + m(ψ)) − r)/r_plus. Throws RejectionStall after
/// `max_attempts` rejections and DomainExceeded if the proposal leaves the
/// drift-potential domain.
IntervalSkeleton sample_interval(const DriftPotential& drift, const GBounds& bounds,
                                 const CenteringLine& line, Engine& rng,
                                 std::size_t max_attempts);

/// One independent interval sampler per observation interval, each driven by
/// make_stream(seed, iteration, interval).
Skeleton sample_skeleton(const Model& model, const ObservationSeries& obs,
                         const GBounds& bounds, std::uint64_t seed,
                         std::uint64_t iteration, const SamplerOptions& options = {});

/// True when every mark of the interval clears its thinning threshold.
bool certificate_holds(const IntervalSkeleton& skeleton, const DriftPotential& drift,
                       const GBounds& bounds, const CenteringLine& line);

/// Draws Z_t from the bridge law given the two neighbouring revealed points
/// (or the zero endpoints), stores it as a revealed point and returns it.
double bridge_interpolate(IntervalSkeleton& skeleton, double t, Engine& rng);

/// Fresh Poisson/bridge draws without thinning marks: returns the product
/// ∏ (1 − (G(z_j + m(ψ_j)) − r)/r_plus), an unbiased estimate of
/// E[exp(−∫ (G − r) dt)] under the Brownian bridge.
double thinning_survival_estimate(const DriftPotential& drift, const GBounds& bounds,
                                  const CenteringLine& line, Engine& rng);

}  // namespace splinesde
