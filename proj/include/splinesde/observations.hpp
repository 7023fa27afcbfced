#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace splinesde {

/// Discrete observations v_{t_0}, …, v_{t_N} at strictly increasing times.
struct ObservationSeries {
  std::vector<double> times;
  std::vector<double> values;
  /// Index of the first test observation when the series carries a split.
  std::optional<std::size_t> split;

  std::size_t size() const noexcept { return times.size(); }
  /// N, the number of inter-observation intervals.
  std::size_t intervals() const noexcept { return times.empty() ? 0 : times.size() - 1; }
  double delta(std::size_t i) const { return times[i + 1] - times[i]; }
  double duration() const { return times.back() - times.front(); }
  double mean() const;

  /// Throws ArgumentError unless there are ≥ 2 finite points with Δ_i > 0.
  void validate() const;

  /// Observations [0, split] (the boundary point is shared) and [split, N].
  ObservationSeries head(std::size_t last_index) const;
  ObservationSeries tail(std::size_t first_index) const;
};

/// Two numeric columns (time, value), comma- or whitespace-separated. Blank
/// lines and lines starting with '#' are skipped; a non-numeric first data
/// line is treated as a header. Errors name the 1-based line number.
ObservationSeries load_observations(const std::filesystem::path& path);
ObservationSeries parse_observations(const std::string& text,
                                     const std::string& source = "<memory>");

/// Writes "time,value" rows at 17 significant digits, preceded by
/// `# key=value` lines for each entry of `header`.
void write_observations(const ObservationSeries& obs, const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, std::string>>& header = {});

/// %.17g formatting, enough to round-trip any double.
std::string format_double(double v);

}  // namespace splinesde
