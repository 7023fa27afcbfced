#pragma once

#include "splinesde/spline_basis.hpp"
#include "splinesde/tuning.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace splinesde {

/// Either an explicit knot list or `count` equidistant knots on [lo, hi] with
/// the end knots repeated `end_multiplicity` times.
///
/// Text form: "uniform(count, lo, hi, end_multiplicity)" or a comma-separated
/// list of knots.
struct KnotSpec {
  std::vector<double> explicit_knots;
  int count = 15;
  double lo = -4.0;
  double hi = 4.0;
  int end_multiplicity = 5;

  bool is_explicit() const noexcept { return !explicit_knots.empty(); }
  KnotVector build(int order) const;
  /// Half-width R of the symmetric span [−R, R] that contains the knots.
  double radius() const;
  /// Knots scaled by two about the origin, interior count and end
  /// multiplicities preserved.
  KnotSpec doubled() const;

  std::string to_string() const;
  static KnotSpec parse(const std::string& text);
};

struct GridSpec {
  double vmin = -1.0;
  double vmax = 1.0;
  std::size_t points = 101;

  std::vector<double> values() const;
  std::string to_string() const;
  /// "vmin,vmax,npoints"
  static GridSpec parse(const std::string& text);
};

/// Everything needed to reproduce a fit. Serialised as flat `key = value`
/// text; see `RunConfig::keys()` for the accepted keys.
struct RunConfig {
  // data
  std::string observations;
  std::size_t train_count = 0;  // 0: use every observation for training

  // bases
  int u_order = 4;
  KnotSpec u_knots{{}, 15, -4.0, 4.0, 5};
  int h_order = 3;
  KnotSpec h_knots{{}, 15, -2.0, 2.0, 4};
  std::optional<double> v_bar;  // unset: mean of the training observations

  // prior
  std::map<int, double> lambda_theta{{3, 0.1}};
  std::map<int, double> lambda_xi{{2, 0.1}};
  double edge_theta = 1e4;
  std::optional<int> edge_theta_count;  // unset: u_order
  double edge_xi = 1e4;
  std::optional<int> edge_xi_count;  // unset: h_order

  // sampler
  TuningSpec tuning;
  std::uint64_t seed = 1;
  bool auto_expand = true;
  int max_doublings = 10;
  std::size_t max_attempts = 1'000'000;
  unsigned threads = 0;  // 0: SPLINESDE_THREADS or 1

  // output
  std::string chain_path;
  std::string grid_path;
  std::string test_path;
  GridSpec grid;

  static const std::vector<std::string>& keys();

  /// Applies one `key = value` assignment; throws ConfigError for unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Orders ≥ 3, positive step sizes, consistent counts.
  void validate() const;

  std::string to_text() const;
  /// Parses key = value lines ('#' starts a comment). A `preset` key is
  /// applied before every other assignment regardless of its position.
  static RunConfig from_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  unsigned effective_threads() const;
};

/// Built-in settings: "illustrative", "finance", "paleo", "astro".
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace splinesde
