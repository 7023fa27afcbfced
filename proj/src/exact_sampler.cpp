#include "splinesde/exact_sampler.hpp"

#include "splinesde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace splinesde {

std::size_t Skeleton::total_points() const noexcept {
  std::size_t n = 0;
  for (const auto& s : intervals) n += s.count();
  return n;
}

TransformedObservations transform_observations(const Model& model,
                                               const ObservationSeries& obs) {
  TransformedObservations out;
  out.x.reserve(obs.size());
  for (double v : obs.values) out.x.push_back(model.lamperti(v));
  out.lines.reserve(obs.intervals());
  for (std::size_t i = 0; i < obs.intervals(); ++i)
    out.lines.push_back({i, out.x[i], out.x[i + 1], obs.delta(i)});
  return out;
}

namespace {

// Poisson times on (0, delta), sorted.
void draw_times(std::size_t count, double delta, Engine& rng, std::vector<double>& times) {
  std::uniform_real_distribution<double> uniform(0.0, delta);
  times.resize(count);
  for (auto& t : times) t = uniform(rng);
  std::sort(times.begin(), times.end());
}

std::size_t draw_count(double mean, Engine& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long long> poisson(mean);
  return static_cast<std::size_t>(poisson(rng));
}

}  // namespace

IntervalSkeleton sample_interval(const DriftPotential& drift, const GBounds& bounds,
                                 const CenteringLine& line, Engine& rng,
                                 std::size_t max_attempts) {
  IntervalSkeleton out;
  out.delta = line.delta;
  out.x_start = line.x_start;
  out.x_end = line.x_end;
  if (!(bounds.r_plus > 0.0)) return out;

  const double delta = line.delta;
  const double rate = bounds.r_plus * delta;
  std::poisson_distribution<long long> poisson(rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const auto count = static_cast<std::size_t>(poisson(rng));
    draw_times(count, delta, rng, out.times);
    out.marks.resize(count);
    for (auto& c : out.marks) c = unit(rng);
    out.innovations.resize(count);

    bool accepted = true;
    double t_prev = 0.0;
    double z_prev = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double t = out.times[j];
      const double span = delta - t_prev;
      const double mean = z_prev * (delta - t) / span;
      const double sd = std::sqrt(std::max(0.0, (t - t_prev) * (delta - t) / span));
      const double z = mean + sd * normal(rng);
      out.innovations[j] = z;
      const double phi = (drift.phase(z + line(t)) - bounds.r) / bounds.r_plus;
      if (!(out.marks[j] > phi)) {
        accepted = false;
        break;
      }
      t_prev = t;
      z_prev = z;
    }
    if (accepted) return out;
  }
  throw RejectionStall(line.interval, max_attempts, bounds.r, bounds.r_plus);
}

Skeleton sample_skeleton(const Model& model, const ObservationSeries& obs,
                         const GBounds& bounds, std::uint64_t seed,
                         std::uint64_t iteration, const SamplerOptions& options) {
  const TransformedObservations transformed = transform_observations(model, obs);
  Skeleton skeleton;
  skeleton.intervals.resize(obs.intervals());
  parallel_for(obs.intervals(), options.threads, [&](std::size_t i) {
    Engine rng = make_stream(seed, iteration, i);
    skeleton.intervals[i] = sample_interval(model.drift(), bounds, transformed.lines[i], rng,
                                            options.max_attempts);
  });
  return skeleton;
}

bool certificate_holds(const IntervalSkeleton& skeleton, const DriftPotential& drift,
                       const GBounds& bounds, const CenteringLine& line) {
  if (skeleton.count() == 0) return true;
  if (!(bounds.r_plus > 0.0)) return false;
  for (std::size_t j = 0; j < skeleton.count(); ++j) {
    const double t = skeleton.times[j];
    const double phi =
        (drift.phase(skeleton.innovations[j] + line(t)) - bounds.r) / bounds.r_plus;
    if (!(skeleton.marks[j] > phi)) return false;
  }
  return true;
}

double bridge_interpolate(IntervalSkeleton& skeleton, double t, Engine& rng) {
  const double delta = skeleton.delta;
  if (!(t > 0.0 && t < delta))
    throw ArgumentError("bridge_interpolate: time " + std::to_string(t) +
                        " outside the open interval (0, " + std::to_string(delta) + ")");
  double t_left = 0.0;
  double z_left = 0.0;
  double t_right = delta;
  double z_right = 0.0;
  auto consider = [&](double s, double z) {
    if (s == t) throw ArgumentError("bridge_interpolate: time already revealed");
    if (s < t && s > t_left) {
      t_left = s;
      z_left = z;
    } else if (s > t && s < t_right) {
      t_right = s;
      z_right = z;
    }
  };
  for (std::size_t j = 0; j < skeleton.times.size(); ++j)
    consider(skeleton.times[j], skeleton.innovations[j]);
  for (std::size_t j = 0; j < skeleton.revealed_times.size(); ++j)
    consider(skeleton.revealed_times[j], skeleton.revealed_innovations[j]);

  const double span = t_right - t_left;
  const double mean = z_left + (t - t_left) / span * (z_right - z_left);
  const double var = (t - t_left) * (t_right - t) / span;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = mean + std::sqrt(var) * normal(rng);

  auto pos = std::upper_bound(skeleton.revealed_times.begin(), skeleton.revealed_times.end(), t);
  const auto offset = pos - skeleton.revealed_times.begin();
  skeleton.revealed_times.insert(pos, t);
  skeleton.revealed_innovations.insert(skeleton.revealed_innovations.begin() + offset, z);
  return z;
}

double thinning_survival_estimate(const DriftPotential& drift, const GBounds& bounds,
                                  const CenteringLine& line, Engine& rng) {
  const double delta = line.delta;
  const std::size_t count = draw_count(bounds.r_plus * delta, rng);
  if (count == 0) return 1.0;
  std::vector<double> times;
  draw_times(count, delta, rng, times);
  std::normal_distribution<double> normal(0.0, 1.0);
  double product = 1.0;
  double t_prev = 0.0;
  double z_prev = 0.0;
  for (double t : times) {
    const double span = delta - t_prev;
    const double mean = z_prev * (delta - t) / span;
    const double sd = std::sqrt(std::max(0.0, (t - t_prev) * (delta - t) / span));
    const double z = mean + sd * normal(rng);
    product *= 1.0 - (drift.phase(z + line(t)) - bounds.r) / bounds.r_plus;
    t_prev = t;
    z_prev = z;
  }
  return product;
}

}  // namespace splinesde
