#include "splinesde/cli.hpp"

#include "splinesde/chain_io.hpp"
#include "splinesde/config.hpp"
#include "splinesde/errors.hpp"
#include "splinesde/mcmc.hpp"
#include "splinesde/observations.hpp"
#include "splinesde/simulate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>

namespace splinesde {

namespace fs = std::filesystem;

namespace {

// Relative data and output paths in a config file are taken relative to it.
void resolve_paths(RunConfig& cfg, const fs::path& base) {
  auto fix = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  fix(cfg.observations);
  fix(cfg.chain_path);
  fix(cfg.grid_path);
  fix(cfg.test_path);
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
}

// Creates the parent directory of an output file if needed.
void prepare_output(const fs::path& p) {
  if (p.empty() || !p.has_parent_path()) return;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + suffix);
  return out;
}

int cmd_simulate(const std::string& model, const std::string& drift, const std::string& vol,
                 const SimulationSettings& settings, const std::string& path, std::ostream& out) {
  SdeSpec sde = builtin_sde(model);
  if (!drift.empty()) {
    sde.drift = Coefficient::parse(drift);
    sde.name = "custom";
  }
  if (!vol.empty()) {
    sde.volatility = Coefficient::parse(vol);
    sde.name = "custom";
  }
  const ObservationSeries obs = simulate_sde(sde, settings);
  prepare_output(path);
  write_observations(obs, path, simulation_header(sde, settings));
  double lo = obs.values.front();
  double hi = lo;
  for (double v : obs.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out << "wrote " << obs.size() << " observations to " << path << " (range "
      << format_double(lo) << " to " << format_double(hi) << ")\n";
  return kExitOk;
}

int cmd_fit(const std::string& config_path, const std::string& preset_name,
            const std::vector<std::string>& sets, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = RunConfig::load(config_path);
    resolve_paths(cfg, fs::path(config_path).parent_path());
  } else if (!preset_name.empty()) {
    cfg = preset(preset_name);
  }
  apply_overrides(cfg, sets);
  cfg.validate();
  if (cfg.observations.empty()) throw ConfigError("data.observations is not set");
  if (cfg.chain_path.empty()) cfg.chain_path = "chain.csv";
  for (const auto& p : {cfg.chain_path, cfg.grid_path, cfg.test_path}) prepare_output(p);

  const ObservationSeries all = load_observations(cfg.observations);
  ObservationSeries train = all;
  if (cfg.train_count > 0 && cfg.train_count < all.size()) {
    train = all.head(cfg.train_count - 1);
    if (!cfg.test_path.empty()) {
      const ObservationSeries test = all.tail(cfg.train_count - 1);
      write_observations(test, cfg.test_path, {{"source", cfg.observations}});
    }
  }
  if (train.intervals() < 1) throw ConfigError("need at least two training observations");

  const ChainOutput result =
      run_chain(train, cfg, [&](const std::string& msg) { err << msg << "\n"; });
  write_chain(result, cfg.chain_path);
  write_diagnostics(result, sibling(cfg.chain_path, ".diag.csv"));
  if (!cfg.grid_path.empty()) {
    ChainFile chain;
    chain.config = result.config;
    chain.config.v_bar = result.v_bar;
    chain.n_theta = static_cast<std::size_t>(result.setup.basis_u->size());
    chain.n_xi = static_cast<std::size_t>(result.setup.basis_h->size());
    chain.draws = result.draws;
    write_function_grid(chain_params(chain), cfg.grid.values(), cfg.grid_path);
  }
  out << "iterations=" << cfg.tuning.iterations << " retained=" << result.draws.size()
      << " acceptance_rate=" << format_double(result.acceptance_rate)
      << " doublings=" << result.doublings << "\n";
  out << "chain written to " << cfg.chain_path << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& chain_path, const std::string& config_path,
                 const std::string& grid_text, const std::string& out_path, std::ostream& out) {
  const ChainFile chain = read_chain(chain_path);
  GridSpec grid = chain.config.grid;
  if (!config_path.empty()) grid = RunConfig::load(config_path).grid;
  if (!grid_text.empty()) grid = GridSpec::parse(grid_text);
  prepare_output(out_path);
  write_function_grid(chain_params(chain), grid.values(), out_path);
  out << "wrote " << chain.draws.size() << " draws x " << grid.points << " grid points to "
      << out_path << "\n";
  return kExitOk;
}

int cmd_score(const std::string& chain_path, const std::string& test_path, std::size_t skeletons,
              std::uint64_t seed, unsigned threads, std::ostream& out) {
  const ChainFile chain = read_chain(chain_path);
  const ObservationSeries test = load_observations(test_path);
  if (chain.draws.empty()) throw ConfigError("chain file " + chain_path + " holds no draws");
  if (threads == 0) threads = chain.config.effective_threads();
  const HeldoutEstimate est =
      estimate_heldout_loglik(chain_params(chain), test, skeletons, seed, threads);
  double var = 0.0;
  for (double v : est.per_draw) var += (v - est.mean) * (v - est.mean);
  const double n = static_cast<double>(est.per_draw.size());
  const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
  out << "heldout_loglik=" << format_double(est.mean) << " draws=" << est.per_draw.size()
      << " se=" << format_double(se) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Bayesian semi-parametric inference for scalar diffusions", "splinesde"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Simulate observations by Euler-Maruyama");
  std::string model = "double-well", drift, vol, sim_out;
  SimulationSettings settings;
  sim->add_option("--model", model, "Built-in model: double-well or brownian")
      ->capture_default_str();
  sim->add_option("--drift", drift, "Drift as poly(c0,c1,...) or rational(n...; d...)");
  sim->add_option("--volatility", vol, "Volatility in the same form");
  sim->add_option("--n", settings.n_obs, "Number of observations")->capture_default_str();
  sim->add_option("--dt", settings.dt, "Observation spacing")->capture_default_str();
  sim->add_option("--substeps", settings.substeps, "Euler steps per observation interval")
      ->capture_default_str();
  sim->add_option("--v0", settings.v0, "Initial value")->capture_default_str();
  sim->add_option("--seed", settings.seed, "Random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output file")->required();

  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler");
  std::string fit_config, fit_preset;
  std::vector<std::string> sets;
  fit->add_option("--config", fit_config, "Config file (key = value lines)");
  fit->add_option("--preset", fit_preset, "Start from a built-in preset");
  fit->add_option("--set", sets, "Override a config key: key=value")->take_all();

  auto* eval = app.add_subcommand("evaluate", "Evaluate posterior function grids");
  std::string eval_chain, eval_config, eval_grid, eval_out;
  eval->add_option("--chain", eval_chain, "Chain file")->required();
  eval->add_option("--config", eval_config, "Config file supplying the grid");
  eval->add_option("--grid", eval_grid, "vmin,vmax,npoints");
  eval->add_option("--out", eval_out, "Output grid file")->required();

  auto* score = app.add_subcommand("score", "Held-out log likelihood of chain draws");
  std::string score_chain, score_test;
  std::size_t skeletons = 1000;
  std::uint64_t score_seed = 1;
  unsigned score_threads = 0;
  score->add_option("--chain", score_chain, "Chain file")->required();
  score->add_option("--test", score_test, "Test observations")->required();
  score->add_option("--skeletons", skeletons, "Skeletons per interval")->capture_default_str();
  score->add_option("--seed", score_seed, "Random seed")->capture_default_str();
  score->add_option("--threads", score_threads, "Worker threads (0: SPLINESDE_THREADS or 1)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(model, drift, vol, settings, sim_out, out);
    if (fit->parsed()) return cmd_fit(fit_config, fit_preset, sets, out, err);
    if (eval->parsed()) return cmd_evaluate(eval_chain, eval_config, eval_grid, eval_out, out);
    if (score->parsed())
      return cmd_score(score_chain, score_test, skeletons, score_seed, score_threads, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainExceeded& e) {
    err << "domain error: " << e.what() << "\n";
    return e.kind() == DomainKind::Potential ? kExitNumerical : kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace splinesde
