#include "oracles.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/exact_sampler.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace splinesde;

namespace {

std::shared_ptr<const SplineBasis> drift_basis() {
  return std::make_shared<const SplineBasis>(KnotVector::uniform(15, -4.0, 4.0, 5, 4),
                                             SplineKind::B);
}

std::shared_ptr<const SplineBasis> lamperti_basis() {
  return std::make_shared<const SplineBasis>(KnotVector::uniform(15, -2.0, 2.0, 4, 3),
                                             SplineKind::I);
}

// θ with A(x) = c x on the whole domain, so G ≡ c²/2.
Eigen::VectorXd linear_potential(const SplineBasis& b, double c) {
  const int n_grid = 2000;
  Eigen::MatrixXd design(n_grid + 1, b.size());
  for (int g = 0; g <= n_grid; ++g)
    design.row(g) = b.eval_all(b.lower() + (b.upper() - b.lower()) * g / n_grid, 1).transpose();
  return design.colPivHouseholderQr().solve(Eigen::VectorXd::Constant(n_grid + 1, c));
}

ObservationSeries short_series() {
  ObservationSeries obs;
  obs.times = {0.0, 0.5, 1.2, 1.3, 2.0};
  obs.values = {0.1, -0.4, 0.3, 0.25, 0.9};
  return obs;
}

Model model_with(const Eigen::VectorXd& theta, const Eigen::VectorXd& xi) {
  ModelParams p;
  p.theta = theta;
  p.xi = xi;
  p.basis_u = drift_basis();
  p.basis_h = lamperti_basis();
  return Model(p);
}

// Brownian bridge 0 → 0 on [0, 1] sampled on a uniform grid of `steps` steps.
std::vector<double> fine_bridge(Engine& rng, int steps) {
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / steps));
  std::vector<double> w(static_cast<std::size_t>(steps) + 1, 0.0);
  for (int k = 1; k <= steps; ++k) w[k] = w[k - 1] + normal(rng);
  const double end = w.back();
  for (int k = 0; k <= steps; ++k) w[k] -= end * k / steps;
  return w;
}

}  // namespace

TEST_CASE("zero drift gives empty skeletons") {
  const auto bu = drift_basis();
  const auto bh = lamperti_basis();
  const Model m = model_with(Eigen::VectorXd::Zero(bu->size()), identity_log_weights(*bh));
  const ObservationSeries obs = short_series();
  const Skeleton s = sample_skeleton(m, obs, m.g_bounds(), 1, 0);
  REQUIRE(s.intervals.size() == obs.intervals());
  CHECK(s.total_points() == 0);
  for (std::size_t i = 0; i < obs.intervals(); ++i) {
    CHECK(s.intervals[i].delta == doctest::Approx(obs.delta(i)));
    CHECK(s.intervals[i].x_start == doctest::Approx(obs.values[i]));
  }
}

TEST_CASE("constant G: acceptance probability exp(-g delta)") {
  const auto bu = drift_basis();
  const DriftPotential drift(bu, linear_potential(*bu, 0.6));
  const double level = 0.18;  // c²/2
  const double g = 0.7;
  const double delta = 1.3;
  GBounds b;
  b.r = level - g;
  b.r_plus = 2.0 * g;
  const CenteringLine line{0, -0.2, 0.4, delta};
  const int n = 100000;
  int accepted = 0;
  for (int k = 0; k < n; ++k) {
    Engine e = make_stream(3, static_cast<std::uint64_t>(k), 0);
    try {
      (void)sample_interval(drift, b, line, e, 1);
      ++accepted;
    } catch (const RejectionStall& err) {
      CHECK(err.attempts() == 1);
    }
  }
  const double p = std::exp(-g * delta);
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(accepted) / n - p) <= 3.0 * se);
}

TEST_CASE("Poisson count mean r_plus delta") {
  // G − r ≡ 0: every proposal is accepted, so counts are Poisson(r_plus Δ).
  const auto bu = drift_basis();
  const DriftPotential drift(bu, linear_potential(*bu, 0.6));
  GBounds b;
  b.r = 0.18;
  b.r_plus = 2.5;
  const CenteringLine line{0, 0.0, 0.0, 0.8};
  const int n = 100000;
  std::vector<double> counts;
  counts.reserve(n);
  for (int k = 0; k < n; ++k) {
    Engine e = make_stream(4, static_cast<std::uint64_t>(k), 0);
    counts.push_back(static_cast<double>(sample_interval(drift, b, line, e, 1).count()));
  }
  const auto mom = oracle::moments(counts);
  CHECK(std::abs(mom.mean - 2.0) <= 3.0 * mom.se_mean());
}

TEST_CASE("bridge marginals at theta = 0") {
  const double delta = 2.0;
  const double t = 0.6;
  const int n = 100000;
  std::vector<double> z;
  z.reserve(n);
  for (int k = 0; k < n; ++k) {
    IntervalSkeleton s;
    s.delta = delta;
    Engine e = make_stream(5, static_cast<std::uint64_t>(k), 0);
    z.push_back(bridge_interpolate(s, t, e));
  }
  const auto mom = oracle::moments(z);
  const double var = t * (delta - t) / delta;
  CHECK(std::abs(mom.mean) <= 3.0 * mom.se_mean());
  CHECK(std::abs(mom.var - var) <= 3.0 * oracle::se_variance(z));
}

TEST_CASE("bridge_interpolate") {
  SUBCASE("midpoint of an empty interval has variance delta/4") {
    const int n = 100000;
    std::vector<double> z;
    for (int k = 0; k < n; ++k) {
      IntervalSkeleton s;
      s.delta = 1.5;
      Engine e = make_stream(6, static_cast<std::uint64_t>(k), 0);
      z.push_back(bridge_interpolate(s, 0.75, e));
    }
    CHECK(std::abs(oracle::moments(z).var - 1.5 / 4.0) <= 3.0 * oracle::se_variance(z));
  }
  SUBCASE("conditional mean is the linear interpolation") {
    const int n = 100000;
    std::vector<double> z;
    for (int k = 0; k < n; ++k) {
      IntervalSkeleton s;
      s.delta = 2.0;
      s.times = {0.4, 1.4};
      s.innovations = {0.3, -0.5};
      s.marks = {0.5, 0.5};
      Engine e = make_stream(7, static_cast<std::uint64_t>(k), 0);
      z.push_back(bridge_interpolate(s, 0.65, e));
    }
    const auto mom = oracle::moments(z);
    const double mean = 0.3 + (0.65 - 0.4) / 1.0 * (-0.8);
    const double var = 0.25 * 0.75 / 1.0;
    CHECK(std::abs(mom.mean - mean) <= 3.0 * mom.se_mean());
    CHECK(std::abs(mom.var - var) <= 3.0 * oracle::se_variance(z));
  }
  SUBCASE("repeated insertion matches a fine-grid bridge") {
    const int steps = 1000;
    std::mt19937_64 pick(8);
    std::vector<int> grid(steps - 1);
    std::iota(grid.begin(), grid.end(), 1);
    std::shuffle(grid.begin(), grid.end(), pick);
    std::vector<int> order(grid.begin(), grid.begin() + 100);
    for (int must : {300, 370, 600})
      if (std::find(order.begin(), order.end(), must) == order.end()) order.push_back(must);

    const int reps = 10000;
    std::vector<double> at_point, increment, ref_point, ref_increment;
    for (int k = 0; k < reps; ++k) {
      IntervalSkeleton s;
      s.delta = 1.0;
      Engine e = make_stream(9, static_cast<std::uint64_t>(k), 0);
      double z300 = 0.0, z370 = 0.0, z600 = 0.0;
      for (int g : order) {
        const double z = bridge_interpolate(s, g / static_cast<double>(steps), e);
        if (g == 300) z300 = z;
        if (g == 370) z370 = z;
        if (g == 600) z600 = z;
      }
      CHECK(std::is_sorted(s.revealed_times.begin(), s.revealed_times.end()));
      at_point.push_back(z370);
      increment.push_back(z600 - z300);
      Engine f = make_stream(10, static_cast<std::uint64_t>(k), 0);
      const auto w = fine_bridge(f, steps);
      ref_point.push_back(w[370]);
      ref_increment.push_back(w[600] - w[300]);
    }
    CHECK(oracle::ks_two_sample_pvalue(at_point, ref_point) > 0.001);
    CHECK(oracle::ks_two_sample_pvalue(increment, ref_increment) > 0.001);
  }
  SUBCASE("errors") {
    IntervalSkeleton s;
    s.delta = 1.0;
    Engine e(1);
    CHECK_THROWS_AS(bridge_interpolate(s, 0.0, e), ArgumentError);
    CHECK_THROWS_AS(bridge_interpolate(s, 1.2, e), ArgumentError);
    (void)bridge_interpolate(s, 0.5, e);
    CHECK_THROWS_AS(bridge_interpolate(s, 0.5, e), ArgumentError);
  }
}

TEST_CASE("transform_observations") {
  const auto bh = lamperti_basis();
  const auto bu = drift_basis();
  ModelParams p;
  p.theta = Eigen::VectorXd::Zero(bu->size());
  p.xi = identity_log_weights(*bh);
  p.v_bar = 0.2;
  p.basis_u = bu;
  p.basis_h = bh;
  const ObservationSeries obs = short_series();
  const TransformedObservations t = transform_observations(Model(p), obs);
  for (std::size_t i = 0; i < obs.size(); ++i)
    CHECK(t.x[i] == doctest::Approx(obs.values[i] - 0.2).epsilon(1e-12));
  for (const auto& line : t.lines) {
    CHECK(line(0.0) == line.x_start);
    CHECK(line(line.delta) == doctest::Approx(line.x_end).epsilon(1e-15));
    CHECK(line(0.5 * line.delta) == doctest::Approx(0.5 * (line.x_start + line.x_end)));
  }
}

TEST_CASE("certificates, determinism and stalls") {
  const auto bu = drift_basis();
  const auto bh = lamperti_basis();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 0.5);
  Eigen::VectorXd theta(bu->size());
  for (auto& t : theta) t = normal(rng);
  const Model m = model_with(theta, identity_log_weights(*bh));
  const ObservationSeries obs = short_series();
  const GBounds b = m.g_bounds();
  const TransformedObservations tr = transform_observations(m, obs);

  std::size_t points = 0;
  for (std::uint64_t it = 0; it < 200; ++it) {
    const Skeleton s = sample_skeleton(m, obs, b, 12, it);
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
      CHECK(certificate_holds(s.intervals[i], m.drift(), b, tr.lines[i]));
      CHECK(std::is_sorted(s.intervals[i].times.begin(), s.intervals[i].times.end()));
    }
    points += s.total_points();
  }
  CHECK(points > 0);

  const Skeleton a = sample_skeleton(m, obs, b, 13, 5, {1'000'000, 1});
  const Skeleton c = sample_skeleton(m, obs, b, 13, 5, {1'000'000, 3});
  for (std::size_t i = 0; i < a.intervals.size(); ++i) {
    CHECK(a.intervals[i].times == c.intervals[i].times);
    CHECK(a.intervals[i].marks == c.intervals[i].marks);
    CHECK(a.intervals[i].innovations == c.intervals[i].innovations);
  }

  // Bounds far above G make acceptance essentially impossible.
  GBounds loose = b;
  loose.r = b.r - 50.0;
  loose.r_plus = b.r_plus + 100.0;
  Engine e(14);
  const CenteringLine line{0, 0.0, 0.0, 10.0};
  CHECK_THROWS_AS(sample_interval(m.drift(), loose, line, e, 3), RejectionStall);
}
