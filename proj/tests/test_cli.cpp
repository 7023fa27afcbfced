#include "oracles.hpp"

#include "splinesde/cli.hpp"
#include "splinesde/observations.hpp"
#include "splinesde/simulate.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace splinesde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "splinesde_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

double field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    rows.push_back(f);
  }
  return rows;
}

double gaussian_loglik(const ObservationSeries& s) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.intervals(); ++i) {
    const double d = s.delta(i);
    const double dv = s.values[i + 1] - s.values[i];
    ll += -0.5 * dv * dv / d - 0.5 * std::log(2.0 * std::numbers::pi * d);
  }
  return ll;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({"simulate"}).code == kExitConfig);
  CHECK(run({"--help"}).code == kExitOk);

  const fs::path data = scratch("exit_obs.csv");
  REQUIRE(run({"simulate", "--n", "50", "--out", data.string()}).code == kExitOk);
  const Result order2 = run({"fit", "--set", "data.observations=" + data.string(), "--set",
                             "u.order=2", "--set", "output.chain=" + scratch("x.csv").string()});
  CHECK(order2.code == kExitConfig);
  CHECK(order2.err.find("orders >= 3") != std::string::npos);
  CHECK(run({"fit", "--set", "data.observations=" + scratch("absent.csv").string()}).code ==
        kExitConfig);
  CHECK(run({"fit", "--set", "bogus.key=1"}).code == kExitConfig);
  CHECK(run({"simulate", "--model", "nope", "--out", data.string()}).code == kExitConfig);
  CHECK(run({"score", "--chain", scratch("absent.csv").string(), "--test", data.string()}).code ==
        kExitConfig);

  // a tiny domain without doubling cannot hold the data
  const Result no_expand =
      run({"fit", "--set", "data.observations=" + data.string(), "--set",
           "u.knots=uniform(15, -0.25, 0.25, 5)", "--set", "v_bar=-1.9", "--set",
           "mcmc.auto_expand=false", "--set",
           "mcmc.iterations=3", "--set", "output.chain=" + scratch("y.csv").string()});
  CHECK(no_expand.code == kExitNumerical);
}

TEST_CASE("simulate") {
  SUBCASE("double well, default seed") {
    const fs::path p = scratch("dw.csv");
    const Result r = run({"simulate", "--model", "double-well", "--n", "2001", "--dt", "0.1",
                          "--seed", "1", "--out", p.string()});
    REQUIRE(r.code == kExitOk);
    const ObservationSeries s = load_observations(p);
    CHECK(s.size() == 2001);
    for (std::size_t i = 0; i < s.intervals(); ++i)
      CHECK(s.delta(i) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(s.values.front() == 1.0);
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    CHECK(*lo >= -2.5);
    CHECK(*hi <= 2.5);
  }
  SUBCASE("Brownian increments") {
    const fs::path p = scratch("bm.csv");
    REQUIRE(run({"simulate", "--model", "brownian", "--n", "5001", "--dt", "0.2", "--substeps",
                 "50", "--out", p.string()})
                .code == kExitOk);
    const ObservationSeries s = load_observations(p);
    std::vector<double> inc;
    for (std::size_t i = 0; i < s.intervals(); ++i) inc.push_back(s.values[i + 1] - s.values[i]);
    const auto m = oracle::moments(inc);
    CHECK(std::abs(m.var - 0.2) <= 3.0 * oracle::se_variance(inc));
    CHECK(std::abs(m.mean) <= 3.0 * m.se_mean());
  }
  SUBCASE("custom coefficients and explosion") {
    const fs::path p = scratch("custom.csv");
    CHECK(run({"simulate", "--drift", "poly(0, -1)", "--volatility", "rational(1; 2)", "--n",
               "20", "--out", p.string()})
              .code == kExitOk);
    const Result boom = run({"simulate", "--drift", "poly(0, 0, 0, 5)", "--volatility", "poly(1)",
                             "--v0", "3", "--n", "20", "--out", p.string()});
    CHECK(boom.code == kExitNumerical);
    CHECK(boom.err.find("step") != std::string::npos);
  }
  SUBCASE("halving dt with the same fine step") {
    // V at t = 1 from dt = 0.1 × 1000 substeps and dt = 0.05 × 2000.
    std::vector<double> a, b;
    for (std::uint64_t k = 0; k < 1500; ++k) {
      SimulationSettings s;
      s.n_obs = 11;
      s.dt = 0.1;
      s.substeps = 1000;
      s.seed = 1000 + k;
      a.push_back(simulate_sde(double_well_sde(), s).values.back());
      s.n_obs = 21;
      s.dt = 0.05;
      s.substeps = 500;
      s.seed = 5000 + k;
      b.push_back(simulate_sde(double_well_sde(), s).values.back());
    }
    CHECK(oracle::ks_two_sample_pvalue(a, b) > 0.001);
  }
}

TEST_CASE("fit, evaluate and score") {
  const fs::path data = scratch("fit_obs.csv");
  REQUIRE(run({"simulate", "--n", "500", "--seed", "2", "--out", data.string()}).code == kExitOk);

  SUBCASE("smoke run") {
    const fs::path chain = scratch("smoke_chain.csv");
    const auto start = std::chrono::steady_clock::now();
    const Result r =
        run({"fit", "--preset", "illustrative", "--set", "data.observations=" + data.string(),
             "--set", "mcmc.iterations=10", "--set", "mcmc.burn_in=0", "--set",
             "output.chain=" + chain.string()});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(r.code == kExitOk);
    CHECK(secs < 10.0);
    CHECK(field(r.out, "iterations") == 10.0);
    CHECK(field(r.out, "retained") == 11.0);
    CHECK(csv_rows(chain).size() == 12);
    CHECK(fs::exists(scratch("smoke_chain.diag.csv")));
  }

  SUBCASE("identity draws") {
    const fs::path chain = scratch("identity_chain.csv");
    const fs::path test = scratch("identity_test.csv");
    const Result r = run({"fit", "--set", "data.observations=" + data.string(), "--set",
                          "data.train_count=400", "--set", "mcmc.iterations=0", "--set",
                          "output.chain=" + chain.string(), "--set", "output.test=" + test.string()});
    REQUIRE(r.code == kExitOk);

    const fs::path grid = scratch("identity_grid.csv");
    REQUIRE(run({"evaluate", "--chain", chain.string(), "--grid", "-1,1,9", "--out", grid.string()})
                .code == kExitOk);
    const auto rows = csv_rows(grid);
    REQUIRE(rows.size() == 10);
    for (std::size_t k = 1; k < rows.size(); ++k)
      CHECK(std::stod(rows[k][4]) == doctest::Approx(1.0).epsilon(1e-12));

    REQUIRE(run({"evaluate", "--chain", chain.string(), "--grid", "0,0,0", "--out", grid.string()})
                .code == kExitOk);
    CHECK(csv_rows(grid).size() == 1);

    const Result s = run({"score", "--chain", chain.string(), "--test", test.string(),
                          "--skeletons", "50"});
    REQUIRE(s.code == kExitOk);
    const ObservationSeries test_obs = load_observations(test);
    CHECK(test_obs.size() == 101);
    CHECK(std::abs(field(s.out, "heldout_loglik") - gaussian_loglik(test_obs)) < 1e-8);
  }

  SUBCASE("config file with relative paths") {
    const fs::path dir = scratch("cfgdir");
    fs::create_directories(dir);
    fs::copy_file(data, dir / "obs.csv", fs::copy_options::overwrite_existing);
    {
      std::ofstream c(dir / "run.conf");
      c << "preset = illustrative\n"
        << "data.observations = obs.csv\n"
        << "mcmc.iterations = 4\nmcmc.burn_in = 0\n"
        << "output.chain = out/chain.csv\noutput.grid = out/grid.csv\ngrid = -1,1,3\n";
    }
    const Result r = run({"fit", "--config", (dir / "run.conf").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(csv_rows(dir / "out" / "chain.csv").size() == 6);
    CHECK(csv_rows(dir / "out" / "grid.csv").size() == 1 + 5 * 3);
  }

  SUBCASE("domain doubling is logged") {
    const fs::path chain = scratch("double_chain.csv");
    const Result r =
        run({"fit", "--preset", "illustrative", "--set", "data.observations=" + data.string(),
             "--set", "u.knots=uniform(15, -0.5, 0.5, 5)", "--set", "mcmc.iterations=5", "--set",
             "mcmc.burn_in=0", "--set", "output.chain=" + chain.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(field(r.out, "doublings") >= 1.0);
    CHECK(r.err.find("doubling") != std::string::npos);
  }
}
