#include "splinesde/config.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/observations.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace splinesde {

void TuningSpec::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(delta1) || !finite_nonneg(delta3))
    throw ConfigError("mcmc.delta1 and mcmc.delta3 must be finite and non-negative");
  if (!(std::isfinite(delta2) && delta2 > 0.0) || !(std::isfinite(delta4) && delta4 > 0.0))
    throw ConfigError("mcmc.delta2 and mcmc.delta4 must be finite and positive");
  if (thin == 0) throw ConfigError("mcmc.thin must be at least 1");
  if (iterations > 0 && burn_in >= iterations)
    throw ConfigError("mcmc.burn_in (" + std::to_string(burn_in) +
                      ") must be smaller than mcmc.iterations (" + std::to_string(iterations) +
                      ")");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw ConfigError("mcmc.target_acceptance must lie in (0, 1)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

// "3:0.1, 2:5" → {3: 0.1, 2: 5}; empty or "none" → {}.
std::map<int, double> parse_lambdas(const std::string& key, const std::string& text) {
  std::map<int, double> out;
  const std::string t = trim(text);
  if (t.empty() || t == "none") return out;
  for (const auto& item : split(t, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError(key + ": expected order:weight pairs, got '" + item + "'");
    const long long k = parse_integer(key, item.substr(0, colon));
    const double w = parse_double(key, item.substr(colon + 1));
    if (k < 1) throw ConfigError(key + ": penalty order must be at least 1");
    if (w < 0.0) throw ConfigError(key + ": penalty weight must be non-negative");
    out[static_cast<int>(k)] = w;
  }
  return out;
}

std::string format_lambdas(const std::map<int, double>& m) {
  if (m.empty()) return "none";
  std::string out;
  for (const auto& [k, w] : m) {
    if (!out.empty()) out += ", ";
    out += std::to_string(k) + ":" + format_double(w);
  }
  return out;
}

std::string format_optional_int(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "auto";
}

std::optional<int> parse_optional_int(const std::string& key, const std::string& text) {
  if (trim(text) == "auto") return std::nullopt;
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<int>(v);
}

}  // namespace

KnotVector KnotSpec::build(int order) const {
  try {
    if (is_explicit()) return KnotVector(explicit_knots, order);
    return KnotVector::uniform(count, lo, hi, end_multiplicity, order);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid knots: ") + e.what());
  }
}

double KnotSpec::radius() const {
  if (is_explicit())
    return std::max(std::abs(explicit_knots.front()), std::abs(explicit_knots.back()));
  return std::max(std::abs(lo), std::abs(hi));
}

KnotSpec KnotSpec::doubled() const {
  KnotSpec out = *this;
  for (auto& k : out.explicit_knots) k *= 2.0;
  out.lo *= 2.0;
  out.hi *= 2.0;
  return out;
}

std::string KnotSpec::to_string() const {
  if (is_explicit()) {
    std::string out;
    for (double k : explicit_knots) {
      if (!out.empty()) out += ", ";
      out += format_double(k);
    }
    return out;
  }
  return "uniform(" + std::to_string(count) + ", " + format_double(lo) + ", " +
         format_double(hi) + ", " + std::to_string(end_multiplicity) + ")";
}

KnotSpec KnotSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  KnotSpec out;
  if (t.rfind("uniform", 0) == 0) {
    const auto open = t.find('(');
    const auto close = t.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw ConfigError("knots: expected uniform(count, lo, hi, end_multiplicity)");
    const auto fields = split(t.substr(open + 1, close - open - 1), ',');
    if (fields.size() != 4)
      throw ConfigError("knots: uniform(...) takes count, lo, hi, end_multiplicity");
    out.count = static_cast<int>(parse_integer("knots", fields[0]));
    out.lo = parse_double("knots", fields[1]);
    out.hi = parse_double("knots", fields[2]);
    out.end_multiplicity = static_cast<int>(parse_integer("knots", fields[3]));
    if (out.count < 2 || out.end_multiplicity < 1 || !(out.lo < out.hi))
      throw ConfigError("knots: uniform(...) needs count ≥ 2, lo < hi, multiplicity ≥ 1");
    return out;
  }
  for (const auto& item : split(t, ',')) out.explicit_knots.push_back(parse_double("knots", item));
  if (out.explicit_knots.size() < 2) throw ConfigError("knots: need at least two knots");
  return out;
}

std::vector<double> GridSpec::values() const {
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = points == 1 ? vmin
                         : vmin + (vmax - vmin) * static_cast<double>(i) /
                                      static_cast<double>(points - 1);
  return out;
}

std::string GridSpec::to_string() const {
  return format_double(vmin) + "," + format_double(vmax) + "," + std::to_string(points);
}

GridSpec GridSpec::parse(const std::string& text) {
  const auto fields = split(text, ',');
  if (fields.size() != 3) throw ConfigError("grid: expected vmin,vmax,npoints");
  GridSpec g;
  g.vmin = parse_double("grid", fields[0]);
  g.vmax = parse_double("grid", fields[1]);
  g.points = parse_count("grid", fields[2]);
  if (g.points > 0 && !(g.vmin <= g.vmax)) throw ConfigError("grid: vmin must not exceed vmax");
  return g;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "data.observations", "data.train_count",  "u.order",           "u.knots",
      "h.order",           "h.knots",           "v_bar",             "prior.lambda_theta",
      "prior.lambda_xi",   "prior.edge_theta",  "prior.edge_theta_count",
      "prior.edge_xi",     "prior.edge_xi_count", "mcmc.iterations", "mcmc.burn_in",
      "mcmc.thin",         "mcmc.delta1",       "mcmc.delta2",       "mcmc.delta3",
      "mcmc.delta4",       "mcmc.adapt",        "mcmc.target_acceptance", "mcmc.seed",
      "mcmc.auto_expand",  "mcmc.max_doublings", "mcmc.max_attempts", "mcmc.threads",
      "output.chain",      "output.grid",       "output.test",       "grid"};
  return k;
}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "preset") {
    *this = preset(value);
  } else if (key == "data.observations") {
    observations = value;
  } else if (key == "data.train_count") {
    train_count = parse_count(key, value);
  } else if (key == "u.order") {
    u_order = static_cast<int>(parse_integer(key, value));
  } else if (key == "u.knots") {
    u_knots = KnotSpec::parse(value);
  } else if (key == "h.order") {
    h_order = static_cast<int>(parse_integer(key, value));
  } else if (key == "h.knots") {
    h_knots = KnotSpec::parse(value);
  } else if (key == "v_bar") {
    if (value == "mean")
      v_bar.reset();
    else
      v_bar = parse_double(key, value);
  } else if (key == "prior.lambda_theta") {
    lambda_theta = parse_lambdas(key, value);
  } else if (key == "prior.lambda_xi") {
    lambda_xi = parse_lambdas(key, value);
  } else if (key == "prior.edge_theta") {
    edge_theta = parse_double(key, value);
  } else if (key == "prior.edge_theta_count") {
    edge_theta_count = parse_optional_int(key, value);
  } else if (key == "prior.edge_xi") {
    edge_xi = parse_double(key, value);
  } else if (key == "prior.edge_xi_count") {
    edge_xi_count = parse_optional_int(key, value);
  } else if (key == "mcmc.iterations") {
    tuning.iterations = parse_count(key, value);
  } else if (key == "mcmc.burn_in") {
    tuning.burn_in = parse_count(key, value);
  } else if (key == "mcmc.thin") {
    tuning.thin = parse_count(key, value);
  } else if (key == "mcmc.delta1") {
    tuning.delta1 = parse_double(key, value);
  } else if (key == "mcmc.delta2") {
    tuning.delta2 = parse_double(key, value);
  } else if (key == "mcmc.delta3") {
    tuning.delta3 = parse_double(key, value);
  } else if (key == "mcmc.delta4") {
    tuning.delta4 = parse_double(key, value);
  } else if (key == "mcmc.adapt") {
    tuning.adapt = parse_bool(key, value);
  } else if (key == "mcmc.target_acceptance") {
    tuning.target_acceptance = parse_double(key, value);
  } else if (key == "mcmc.seed") {
    const std::string t = value;
    char* end = nullptr;
    errno = 0;
    const unsigned long long s = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
      throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
    seed = s;
  } else if (key == "mcmc.auto_expand") {
    auto_expand = parse_bool(key, value);
  } else if (key == "mcmc.max_doublings") {
    max_doublings = static_cast<int>(parse_integer(key, value));
  } else if (key == "mcmc.max_attempts") {
    max_attempts = parse_count(key, value);
  } else if (key == "mcmc.threads") {
    threads = static_cast<unsigned>(parse_count(key, value));
  } else if (key == "output.chain") {
    chain_path = value;
  } else if (key == "output.grid") {
    grid_path = value;
  } else if (key == "output.test") {
    test_path = value;
  } else if (key == "grid") {
    grid = GridSpec::parse(value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "data.observations") return observations;
  if (key == "data.train_count") return std::to_string(train_count);
  if (key == "u.order") return std::to_string(u_order);
  if (key == "u.knots") return u_knots.to_string();
  if (key == "h.order") return std::to_string(h_order);
  if (key == "h.knots") return h_knots.to_string();
  if (key == "v_bar") return v_bar ? format_double(*v_bar) : "mean";
  if (key == "prior.lambda_theta") return format_lambdas(lambda_theta);
  if (key == "prior.lambda_xi") return format_lambdas(lambda_xi);
  if (key == "prior.edge_theta") return format_double(edge_theta);
  if (key == "prior.edge_theta_count") return format_optional_int(edge_theta_count);
  if (key == "prior.edge_xi") return format_double(edge_xi);
  if (key == "prior.edge_xi_count") return format_optional_int(edge_xi_count);
  if (key == "mcmc.iterations") return std::to_string(tuning.iterations);
  if (key == "mcmc.burn_in") return std::to_string(tuning.burn_in);
  if (key == "mcmc.thin") return std::to_string(tuning.thin);
  if (key == "mcmc.delta1") return format_double(tuning.delta1);
  if (key == "mcmc.delta2") return format_double(tuning.delta2);
  if (key == "mcmc.delta3") return format_double(tuning.delta3);
  if (key == "mcmc.delta4") return format_double(tuning.delta4);
  if (key == "mcmc.adapt") return tuning.adapt ? "true" : "false";
  if (key == "mcmc.target_acceptance") return format_double(tuning.target_acceptance);
  if (key == "mcmc.seed") return std::to_string(seed);
  if (key == "mcmc.auto_expand") return auto_expand ? "true" : "false";
  if (key == "mcmc.max_doublings") return std::to_string(max_doublings);
  if (key == "mcmc.max_attempts") return std::to_string(max_attempts);
  if (key == "mcmc.threads") return std::to_string(threads);
  if (key == "output.chain") return chain_path;
  if (key == "output.grid") return grid_path;
  if (key == "output.test") return test_path;
  if (key == "grid") return grid.to_string();
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  auto check_order = [](const char* name, int order) {
    if (order < 3)
      throw ConfigError(std::string(name) + " = " + std::to_string(order) +
                        " is below 3; exact sampling needs orders >= 3 so that the drift "
                        "potential is C^2 and the Lamperti map is C^3");
  };
  check_order("u.order", u_order);
  check_order("h.order", h_order);
  (void)u_knots.build(u_order);
  (void)h_knots.build(h_order);
  if (v_bar && !std::isfinite(*v_bar)) throw ConfigError("v_bar must be finite");
  if (edge_theta < 0.0 || edge_xi < 0.0)
    throw ConfigError("prior edge shrinkage must be non-negative");
  if (max_doublings < 0) throw ConfigError("mcmc.max_doublings must be non-negative");
  if (max_attempts == 0) throw ConfigError("mcmc.max_attempts must be positive");
  tuning.validate();
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  for (; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno + 1) + ": expected key = value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  RunConfig cfg;
  for (const auto& [k, v] : entries)
    if (k == "preset") cfg = preset(v);
  for (const auto& [k, v] : entries)
    if (k != "preset") cfg.set(k, v);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << to_text();
  if (!out) throw IoError("write failed: " + path.string());
}

unsigned RunConfig::effective_threads() const {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("SPLINESDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

std::vector<std::string> preset_names() { return {"illustrative", "finance", "paleo", "astro"}; }

namespace {

std::vector<double> with_ends(double lo, int lo_mult, std::vector<double> interior, double hi,
                              int hi_mult) {
  std::vector<double> out(static_cast<std::size_t>(lo_mult), lo);
  out.insert(out.end(), interior.begin(), interior.end());
  out.insert(out.end(), static_cast<std::size_t>(hi_mult), hi);
  return out;
}

std::vector<double> arithmetic(double first, double step, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(first + step * i);
  return out;
}

}  // namespace

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.u_order = 4;
  c.h_order = 3;
  c.lambda_theta = {{3, 0.1}};
  c.lambda_xi = {{2, 0.1}};
  if (name == "illustrative") {
    c.u_knots = KnotSpec{{}, 15, -4.0, 4.0, 5};
    c.h_knots = KnotSpec{{}, 15, -2.0, 2.0, 4};
    c.v_bar = 0.0;
    c.tuning.iterations = 600'000;
    c.tuning.burn_in = 300'000;
    c.grid = GridSpec{-1.6, 1.6, 161};
  } else if (name == "finance") {
    c.u_knots.explicit_knots = with_ends(-15.0, 4, arithmetic(-10.5, 4.5, 9), 30.0, 4);
    c.h_knots.explicit_knots = with_ends(0.0, 4, arithmetic(2.0, 2.0, 9), 20.0, 4);
    c.v_bar = 5.0;
    c.lambda_theta = {{3, 6000.0}};
    c.lambda_xi = {{2, 1.0}};
    c.tuning.iterations = 200'000;
    c.tuning.burn_in = 100'000;
    c.grid = GridSpec{0.0, 20.0, 201};
  } else if (name == "paleo") {
    c.u_knots.explicit_knots = with_ends(-15.0, 5, arithmetic(-12.5, 2.5, 15), 25.0, 5);
    c.h_knots.explicit_knots = with_ends(-49.0, 4, arithmetic(-47.0, 2.0, 9), -29.0, 4);
    c.v_bar = -40.0;
    c.lambda_theta = {{3, 5000.0}};
    c.lambda_xi = {{2, 1.0}};
    c.tuning.iterations = 300'000;
    c.tuning.burn_in = 150'000;
    c.grid = GridSpec{-49.0, -29.0, 201};
  } else if (name == "astro") {
    c.u_knots.explicit_knots = with_ends(
        -4.3, 5, {-3.44, -2.58, -1.72, -0.86, 0.0, 0.86, 1.72, 2.58, 3.44}, 4.3, 5);
    c.h_knots.explicit_knots = with_ends(
        4.0, 4, {5.4, 6.8, 8.2, 9.6, 11.0, 12.4, 13.8, 15.2, 16.6}, 18.0, 4);
    // An anchor of −40 would lie outside the h-domain [4, 18]; use the data mean.
    c.v_bar.reset();
    c.lambda_theta = {{3, 100.0}};
    c.lambda_xi = {{2, 1.0}};
    c.tuning.iterations = 400'000;
    c.tuning.burn_in = 200'000;
    c.grid = GridSpec{4.0, 18.0, 141};
  } else {
    throw ConfigError("unknown preset '" + name + "' (choose illustrative, finance, paleo or astro)");
  }
  return c;
}

}  // namespace splinesde
