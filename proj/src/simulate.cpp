#include "splinesde/simulate.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/random.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

namespace splinesde {

namespace {

double horner(const std::vector<double>& c, double v) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * v + *it;
  return acc;
}

std::vector<double> parse_list(const std::string& text, const std::string& whole) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty coefficient in '" + whole + "'");
    const std::string t = item.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
      throw ConfigError("bad coefficient '" + t + "' in '" + whole + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no coefficients in '" + whole + "'");
  return out;
}

std::string join(const std::vector<double>& c) {
  std::string out;
  for (double v : c) {
    if (!out.empty()) out += ", ";
    out += format_double(v);
  }
  return out;
}

}  // namespace

double Coefficient::operator()(double v) const {
  return horner(numerator, v) / horner(denominator, v);
}

std::string Coefficient::to_string() const {
  if (denominator.size() == 1 && denominator[0] == 1.0) return "poly(" + join(numerator) + ")";
  return "rational(" + join(numerator) + "; " + join(denominator) + ")";
}

Coefficient Coefficient::parse(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("expected poly(...) or rational(...; ...), got '" + text + "'");
  std::string kind = text.substr(0, open);
  kind.erase(0, kind.find_first_not_of(" \t"));
  kind.erase(kind.find_last_not_of(" \t") + 1);
  const std::string body = text.substr(open + 1, close - open - 1);
  Coefficient c;
  if (kind == "poly") {
    c.numerator = parse_list(body, text);
  } else if (kind == "rational") {
    const auto semi = body.find(';');
    if (semi == std::string::npos)
      throw ConfigError("rational(...) needs numerator; denominator in '" + text + "'");
    c.numerator = parse_list(body.substr(0, semi), text);
    c.denominator = parse_list(body.substr(semi + 1), text);
  } else {
    throw ConfigError("unknown coefficient form '" + kind + "'");
  }
  return c;
}

SdeSpec double_well_sde() {
  return {"double-well", Coefficient{{0.0, 1.0, 0.0, -1.0}, {1.0}},
          Coefficient{{1.0}, {1.0, 0.0, 1.0}}};
}

SdeSpec builtin_sde(const std::string& name) {
  if (name == "double-well") return double_well_sde();
  if (name == "brownian") return {"brownian", Coefficient{{0.0}, {1.0}}, Coefficient{{1.0}, {1.0}}};
  throw ConfigError("unknown model '" + name + "' (choose double-well or brownian)");
}

ObservationSeries simulate_sde(const SdeSpec& sde, const SimulationSettings& s) {
  if (s.n_obs < 2) throw ConfigError("simulate: need at least two observations");
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ConfigError("simulate: dt must be positive");
  if (s.substeps == 0) throw ConfigError("simulate: substeps must be positive");
  Engine rng = make_stream(s.seed, 0, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = s.dt / static_cast<double>(s.substeps);
  const double sqrt_h = std::sqrt(h);

  ObservationSeries obs;
  obs.times.reserve(s.n_obs);
  obs.values.reserve(s.n_obs);
  double v = s.v0;
  obs.times.push_back(0.0);
  obs.values.push_back(v);
  std::size_t step = 0;
  for (std::size_t i = 1; i < s.n_obs; ++i) {
    for (std::size_t k = 0; k < s.substeps; ++k) {
      ++step;
      v += sde.drift(v) * h + sde.volatility(v) * sqrt_h * normal(rng);
      if (!(std::abs(v) <= 1e8))
        throw NumericalFailure("simulate: |V| exceeded 1e8 at fine step " + std::to_string(step) +
                               " (t = " + format_double(static_cast<double>(step) * h) + ")");
    }
    obs.times.push_back(static_cast<double>(i) * s.dt);
    obs.values.push_back(v);
  }
  return obs;
}

std::vector<std::pair<std::string, std::string>> simulation_header(const SdeSpec& sde,
                                                                   const SimulationSettings& s) {
  return {{"model", sde.name},
          {"drift", sde.drift.to_string()},
          {"volatility", sde.volatility.to_string()},
          {"n_obs", std::to_string(s.n_obs)},
          {"dt", format_double(s.dt)},
          {"substeps", std::to_string(s.substeps)},
          {"v0", format_double(s.v0)},
          {"seed", std::to_string(s.seed)}};
}

}  // namespace splinesde
