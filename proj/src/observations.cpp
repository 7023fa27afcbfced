#include "splinesde/observations.hpp"

#include "splinesde/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace splinesde {

double ObservationSeries::mean() const {
  if (values.empty()) throw ArgumentError("mean of an empty observation series");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void ObservationSeries::validate() const {
  if (times.size() != values.size())
    throw ArgumentError("observation series: times and values differ in length");
  if (times.size() < 2) throw ArgumentError("observation series: need at least two points");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw ArgumentError("observation series: non-finite entry at index " + std::to_string(i));
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ArgumentError("observation series: times not strictly increasing at index " +
                          std::to_string(i));
  }
  if (split && *split >= times.size())
    throw ArgumentError("observation series: split index out of range");
}

ObservationSeries ObservationSeries::head(std::size_t last_index) const {
  if (last_index >= size()) throw ArgumentError("head: index out of range");
  ObservationSeries out;
  out.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(last_index) + 1);
  out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(last_index) + 1);
  return out;
}

ObservationSeries ObservationSeries::tail(std::size_t first_index) const {
  if (first_index >= size()) throw ArgumentError("tail: index out of range");
  ObservationSeries out;
  out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(first_index), times.end());
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first_index), values.end());
  return out;
}

namespace {

bool parse_number(const std::string& token, double& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size() && errno != ERANGE;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::string normalized = line;
  for (char& c : normalized)
    if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
  std::istringstream in(normalized);
  std::vector<std::string> out;
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

}  // namespace

ObservationSeries parse_observations(const std::string& text, const std::string& source) {
  ObservationSeries obs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = fields_of(line);
    const std::string where = source + ":" + std::to_string(lineno);
    double t = 0.0;
    double v = 0.0;
    const bool numeric = fields.size() >= 2 && parse_number(fields[0], t) &&
                         parse_number(fields[1], v);
    if (!numeric) {
      if (!seen_data) {  // header line
        seen_data = true;
        continue;
      }
      throw IoError(where + ": expected two numeric columns (time, value)");
    }
    seen_data = true;
    if (fields.size() != 2) throw IoError(where + ": expected exactly two columns");
    if (!std::isfinite(t) || !std::isfinite(v)) throw IoError(where + ": non-finite value");
    if (!obs.times.empty() && !(t > obs.times.back()))
      throw IoError(where + ": time " + fields[0] + " does not exceed the previous time");
    obs.times.push_back(t);
    obs.values.push_back(v);
  }
  if (obs.times.size() < 2) throw IoError(source + ": need at least two observations");
  return obs;
}

ObservationSeries load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open observation file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_observations(buffer.str(), path.string());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_observations(const ObservationSeries& obs, const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write observation file " + path.string());
  for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
  out << "time,value\n";
  for (std::size_t i = 0; i < obs.size(); ++i)
    out << format_double(obs.times[i]) << "," << format_double(obs.values[i]) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace splinesde
