#include "splinesde/chain_io.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/observations.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace splinesde {

bool is_execution_key(const std::string& key) {
  return key == "mcmc.threads" || key.rfind("output.", 0) == 0;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_config_header(std::ostream& out, const RunConfig& cfg) {
  for (const auto& key : RunConfig::keys())
    if (!is_execution_key(key)) out << "# " << key << "=" << cfg.get(key) << "\n";
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

double parse_field(const std::string& s, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw IoError(where + ": cannot parse '" + s + "' as a number");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) {
    if (!item.empty() && item.back() == '\r') item.pop_back();
    out.push_back(item);
  }
  return out;
}

}  // namespace

void write_chain(const ChainOutput& output, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  RunConfig cfg = output.config;
  cfg.v_bar = output.v_bar;
  write_config_header(out, cfg);
  out << "# doublings=" << output.doublings << "\n";
  out << "# acceptance_rate=" << format_double(output.acceptance_rate) << "\n";
  out << "# undefined_proposals=" << output.undefined << "\n";
  out << "# final_delta1=" << format_double(output.final_tuning.delta1) << "\n";
  out << "# final_delta2=" << format_double(output.final_tuning.delta2) << "\n";
  out << "# final_delta3=" << format_double(output.final_tuning.delta3) << "\n";
  out << "# final_delta4=" << format_double(output.final_tuning.delta4) << "\n";

  const int nt = output.setup.basis_u ? output.setup.basis_u->size() : 0;
  const int nx = output.setup.basis_h ? output.setup.basis_h->size() : 0;
  out << "iter";
  for (int k = 1; k <= nt; ++k) out << ",theta_" << k;
  for (int k = 1; k <= nx; ++k) out << ",xi_" << k;
  out << ",log_joint,accepted\n";
  for (const Draw& d : output.draws) {
    out << d.iteration;
    for (Eigen::Index k = 0; k < d.theta.size(); ++k) out << "," << format_double(d.theta(k));
    for (Eigen::Index k = 0; k < d.xi.size(); ++k) out << "," << format_double(d.xi(k));
    out << "," << format_double(d.log_joint) << "," << (d.accepted ? 1 : 0) << "\n";
  }
  finish(out, path);
}

ChainFile read_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open chain file " + path.string());
  ChainFile chain;
  const auto& keys = RunConfig::keys();
  std::string config_text;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(eq + 1);
      if (std::find(keys.begin(), keys.end(), key) != keys.end())
        config_text += key + " = " + value + "\n";
      else
        chain.metadata[key] = value;
      continue;
    }
    if (columns.empty()) {
      columns = split_csv(line);
      if (columns.size() < 3 || columns.front() != "iter" || columns.back() != "accepted")
        throw IoError(where + ": unexpected chain header");
      for (const auto& c : columns) {
        if (c.rfind("theta_", 0) == 0) ++chain.n_theta;
        if (c.rfind("xi_", 0) == 0) ++chain.n_xi;
      }
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != columns.size())
      throw IoError(where + ": expected " + std::to_string(columns.size()) + " columns");
    Draw d;
    d.iteration = static_cast<std::size_t>(parse_field(fields[0], where));
    d.theta.resize(static_cast<Eigen::Index>(chain.n_theta));
    d.xi.resize(static_cast<Eigen::Index>(chain.n_xi));
    std::size_t c = 1;
    for (std::size_t k = 0; k < chain.n_theta; ++k)
      d.theta(static_cast<Eigen::Index>(k)) = parse_field(fields[c++], where);
    for (std::size_t k = 0; k < chain.n_xi; ++k)
      d.xi(static_cast<Eigen::Index>(k)) = parse_field(fields[c++], where);
    d.log_joint = parse_field(fields[c++], where);
    d.accepted = parse_field(fields[c], where) != 0.0;
    chain.draws.push_back(std::move(d));
  }
  if (columns.empty()) throw IoError(path.string() + ": missing chain header");
  chain.config = RunConfig::from_text(config_text);
  return chain;
}

void write_diagnostics(const ChainOutput& output, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "# doublings=" << output.doublings << "\n";
  out << "# acceptance_rate=" << format_double(output.acceptance_rate) << "\n";
  out << "# undefined_proposals=" << output.undefined << "\n";
  out << "iter,log_joint,kappa,accepted\n";
  for (std::size_t i = 0; i < output.log_joint_trace.size(); ++i)
    out << (i + 1) << "," << format_double(output.log_joint_trace[i]) << ","
        << output.kappa_trace[i] << "," << static_cast<int>(output.accepted_trace[i]) << "\n";
  finish(out, path);
}

void write_function_grid(const std::vector<ModelParams>& draws, const std::vector<double>& grid,
                         const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
  out << "draw_id,v,x,b,sigma,alpha,eta,in_domain\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const Model model(draws[d]);
    const LampertiMap& eta = model.lamperti_map();
    const DriftPotential& drift = model.drift();
    for (double v : grid) {
      double x = nan, b = nan, sigma = nan, alpha = nan;
      bool ok = false;
      if (v >= eta.lower() && v <= eta.upper()) {
        x = eta(v);
        const double d1 = eta.value(v, 1);
        sigma = 1.0 / d1;
        if (x >= drift.lower() && x <= drift.upper()) {
          alpha = drift.alpha(x);
          b = model.original_coefficients(v).drift;
          ok = true;
        }
      }
      out << d << "," << format_double(v) << "," << format_double(x) << "," << format_double(b)
          << "," << format_double(sigma) << "," << format_double(alpha) << ","
          << format_double(x) << "," << (ok ? 1 : 0) << "\n";
    }
  }
  finish(out, path);
}

std::vector<ModelParams> chain_params(const ChainFile& chain) {
  const RunConfig& cfg = chain.config;
  if (!cfg.v_bar) throw ConfigError("chain file does not record the anchor v_bar");
  auto bu = std::make_shared<const SplineBasis>(cfg.u_knots.build(cfg.u_order), SplineKind::B);
  auto bh = std::make_shared<const SplineBasis>(cfg.h_knots.build(cfg.h_order), SplineKind::I);
  if (static_cast<std::size_t>(bu->size()) != chain.n_theta ||
      static_cast<std::size_t>(bh->size()) != chain.n_xi)
    throw ConfigError("chain columns do not match the basis sizes of its configuration");
  std::vector<ModelParams> out;
  out.reserve(chain.draws.size());
  for (const Draw& d : chain.draws) {
    ModelParams p;
    p.theta = d.theta;
    p.xi = d.xi;
    p.v_bar = *cfg.v_bar;
    p.basis_u = bu;
    p.basis_h = bh;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace splinesde
