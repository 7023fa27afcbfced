#pragma once

#include "splinesde/observations.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace splinesde {

/// Polynomial or rational function of the state, written as
/// "poly(c0, c1, ...)" (ascending powers) or "rational(n0, n1, ...; d0, d1, ...)".
struct Coefficient {
  std::vector<double> numerator{0.0};
  std::vector<double> denominator{1.0};

  double operator()(double v) const;
  std::string to_string() const;
  static Coefficient parse(const std::string& text);
};

struct SdeSpec {
  std::string name;
  Coefficient drift;
  Coefficient volatility;
};

/// dV = −V(V² − 1) dt + 1/(1 + V²) dW.
SdeSpec double_well_sde();
/// Built-in models by name: "double-well", "brownian".
SdeSpec builtin_sde(const std::string& name);

struct SimulationSettings {
  std::size_t n_obs = 2001;
  double dt = 0.1;
  std::size_t substeps = 1000;
  double v0 = 1.0;
  std::uint64_t seed = 1;
};

/// Euler–Maruyama with step dt/substeps, recorded every dt starting at t = 0.
/// A test-data generator only; throws NumericalFailure naming the fine step
/// at which |V| exceeds 1e8.
ObservationSeries simulate_sde(const SdeSpec& sde, const SimulationSettings& settings);

std::vector<std::pair<std::string, std::string>> simulation_header(
    const SdeSpec& sde, const SimulationSettings& settings);

}  // namespace splinesde
