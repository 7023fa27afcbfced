#include "splinesde/chain_io.hpp"
#include "splinesde/config.hpp"
#include "splinesde/errors.hpp"
#include "splinesde/mcmc.hpp"
#include "splinesde/observations.hpp"
#include "splinesde/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace splinesde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "splinesde_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++n;
  return n - 1;  // column header
}

ObservationSeries small_data() {
  SimulationSettings s;
  s.n_obs = 21;
  s.substeps = 100;
  s.seed = 4;
  return simulate_sde(double_well_sde(), s);
}

RunConfig small_config(std::size_t iterations) {
  RunConfig cfg;
  cfg.tuning.iterations = iterations;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("observation parsing") {
  SUBCASE("two rows") {
    const ObservationSeries s = parse_observations("0,1\n0.1,1.2\n");
    CHECK(s.intervals() == 1);
    CHECK(s.delta(0) == doctest::Approx(0.1));
    CHECK(s.values[1] == 1.2);
  }
  SUBCASE("header, comments and whitespace separators") {
    const ObservationSeries s = parse_observations("# note\ntime value\n\n0 1\n0.5\t2\n1.0;3\n");
    CHECK(s.size() == 3);
    CHECK(s.mean() == doctest::Approx(2.0));
  }
  SUBCASE("errors name the line") {
    try {
      (void)parse_observations("t,v\n0,1\n0.1,2\n0.1,3\n", "data.csv");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("data.csv:4") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_observations("0,1\n0.1,nan\n"), IoError);
    CHECK_THROWS_AS(parse_observations("0,1\n0.1,inf\n"), IoError);
    CHECK_THROWS_AS(parse_observations("0,1\n0.1\n"), IoError);
    CHECK_THROWS_AS(parse_observations("0,1\n0.1,x\n"), IoError);
    CHECK_THROWS_AS(parse_observations("0,1\n"), IoError);
    CHECK_THROWS_AS(load_observations(scratch("missing.csv")), IoError);
  }
  SUBCASE("write and reload is bitwise") {
    const ObservationSeries s = small_data();
    const fs::path p = scratch("obs.csv");
    write_observations(s, p, {{"seed", "4"}});
    const ObservationSeries r = load_observations(p);
    CHECK(r.times == s.times);
    CHECK(r.values == s.values);
    write_observations(r, scratch("obs2.csv"), {{"seed", "4"}});
    CHECK(slurp(p) == slurp(scratch("obs2.csv")));
  }
  SUBCASE("head and tail share the boundary point") {
    const ObservationSeries s = small_data();
    const ObservationSeries h = s.head(10);
    const ObservationSeries t = s.tail(10);
    CHECK(h.size() == 11);
    CHECK(t.size() == s.size() - 10);
    CHECK(h.values.back() == t.values.front());
  }
}

TEST_CASE("knot and grid text forms") {
  const KnotSpec u = KnotSpec::parse("uniform(15, -4, 4, 5)");
  const KnotVector ku = u.build(4);
  CHECK(ku.knots().size() == 15 + 8);
  CHECK(ku.knots().front() == -4.0);
  CHECK(ku.knots()[4] == -4.0);
  CHECK(ku.knots()[5] == doctest::Approx(-4.0 + 8.0 / 14.0));
  CHECK(u.radius() == 4.0);
  const KnotSpec d = u.doubled();
  CHECK(d.radius() == 8.0);
  CHECK(d.count == 15);
  CHECK(d.end_multiplicity == 5);
  CHECK(KnotSpec::parse(u.to_string()).to_string() == u.to_string());

  const KnotSpec ex = KnotSpec::parse("-1, -1, -1, -1, 0, 3, 3, 3, 3");
  CHECK(ex.is_explicit());
  CHECK(ex.radius() == 3.0);
  CHECK(ex.doubled().explicit_knots.back() == 6.0);
  CHECK(ex.doubled().explicit_knots.front() == -2.0);
  CHECK_THROWS_AS(KnotSpec::parse("uniform(15, -4)"), ConfigError);
  CHECK_THROWS_AS(KnotSpec::parse("2, 1, 0").build(3), ConfigError);

  const GridSpec g = GridSpec::parse("-1,1,5");
  CHECK(g.values() == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(GridSpec::parse("0,0,0").values().empty());
  CHECK_THROWS_AS(GridSpec::parse("1,0,3"), ConfigError);
}

TEST_CASE("config round trip") {
  RunConfig c = preset("finance");
  c.observations = "rates.csv";
  c.train_count = 100;
  c.v_bar = 2.5;
  c.lambda_theta = {{1, 0.25}, {3, 1e-3}};
  c.edge_xi_count = 2;
  c.tuning.adapt = true;
  c.tuning.delta3 = 1.25e-7;
  c.seed = 99;
  c.threads = 2;
  c.grid = GridSpec::parse("0,20,11");
  const RunConfig r = RunConfig::from_text(c.to_text());
  for (const auto& key : RunConfig::keys()) CHECK_MESSAGE(r.get(key) == c.get(key), key);

  const fs::path p = scratch("run.conf");
  c.save(p);
  CHECK(RunConfig::load(p).to_text() == c.to_text());

  const RunConfig withp = RunConfig::from_text("mcmc.seed = 3\npreset = paleo  # comment\n");
  CHECK(withp.seed == 3);
  CHECK(withp.v_bar == preset("paleo").v_bar);
  CHECK_THROWS_AS(RunConfig::from_text("nonsense = 1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_text("mcmc.delta2 = abc\n"), ConfigError);
  CHECK_THROWS_AS(preset("unknown"), ConfigError);
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.u_order = 2;
  try {
    c.validate();
    FAIL("order 2 accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(">= 3") != std::string::npos);
  }
  c = RunConfig{};
  c.h_order = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.tuning.delta2 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.tuning.burn_in = c.tuning.iterations;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.tuning.thin = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("presets use the documented bases") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
  const RunConfig c = preset("illustrative");
  CHECK(c.u_order == 4);
  CHECK(c.h_order == 3);
  CHECK(c.v_bar == 0.0);
  CHECK(c.lambda_theta == std::map<int, double>{{3, 0.1}});
  CHECK(c.lambda_xi == std::map<int, double>{{2, 0.1}});
  // 15 equidistant knots on [-2, 2], four copies of each end knot
  const KnotVector kh = c.h_knots.build(c.h_order);
  CHECK(kh.knots().size() == 21);
  CHECK(std::count(kh.knots().begin(), kh.knots().end(), -2.0) == 4);
  CHECK(std::count(kh.knots().begin(), kh.knots().end(), 2.0) == 4);
  // and on [-4, 4] with five copies
  const KnotVector ku = c.u_knots.build(c.u_order);
  CHECK(ku.knots().size() == 23);
  CHECK(std::count(ku.knots().begin(), ku.knots().end(), -4.0) == 5);
}

TEST_CASE("chain files") {
  const ObservationSeries obs = small_data();
  RunConfig cfg = small_config(12);
  cfg.tuning.burn_in = 2;
  cfg.tuning.thin = 3;
  const ChainOutput out = run_chain(obs, cfg);
  REQUIRE(out.draws.size() == 4);

  SUBCASE("round trip is bitwise") {
    const fs::path p = scratch("chain.csv");
    write_chain(out, p);
    const ChainFile f = read_chain(p);
    CHECK(f.n_theta == static_cast<std::size_t>(out.setup.basis_u->size()));
    CHECK(f.n_xi == static_cast<std::size_t>(out.setup.basis_h->size()));
    REQUIRE(f.draws.size() == out.draws.size());
    for (std::size_t k = 0; k < f.draws.size(); ++k) {
      CHECK(f.draws[k].iteration == out.draws[k].iteration);
      CHECK(f.draws[k].theta == out.draws[k].theta);
      CHECK(f.draws[k].xi == out.draws[k].xi);
      CHECK(f.draws[k].log_joint == out.draws[k].log_joint);
      CHECK(f.draws[k].accepted == out.draws[k].accepted);
    }
    CHECK(f.config.v_bar.has_value());
    CHECK(*f.config.v_bar == out.v_bar);
    CHECK(f.metadata.at("doublings") == "0");
    const auto params = chain_params(f);
    CHECK(params.size() == f.draws.size());
    CHECK(params[0].basis_u->size() == out.setup.basis_u->size());

    // execution keys do not reach the file
    RunConfig other = cfg;
    other.threads = 3;
    other.chain_path = "elsewhere.csv";
    ChainOutput out2 = run_chain(obs, other);
    out2.config = other;
    write_chain(out2, scratch("chain2.csv"));
    ChainOutput out1 = out;
    out1.config = cfg;
    write_chain(out1, scratch("chain1.csv"));
    CHECK(slurp(scratch("chain1.csv")) == slurp(scratch("chain2.csv")));
  }

  SUBCASE("zero draws give header-only files") {
    ChainOutput empty = out;
    empty.draws.clear();
    const fs::path p = scratch("empty_chain.csv");
    write_chain(empty, p);
    CHECK(data_rows(p) == 0);
    CHECK(read_chain(p).draws.empty());
    const fs::path g = scratch("empty_grid.csv");
    write_function_grid({}, {-1.0, 0.0, 1.0}, g);
    CHECK(data_rows(g) == 0);
    write_function_grid(chain_params(read_chain(scratch("chain.csv"))), {}, g);
    CHECK(data_rows(g) == 0);
  }

  SUBCASE("diagnostics") {
    const fs::path p = scratch("chain.diag.csv");
    write_diagnostics(out, p);
    CHECK(data_rows(p) == 12);
  }

  CHECK_THROWS_AS(read_chain(scratch("no_such_chain.csv")), IoError);
}

TEST_CASE("function grid") {
  const ObservationSeries obs = small_data();
  const ChainOutput out = run_chain(obs, small_config(0));
  const ModelParams identity = out.setup.initial_params();
  const fs::path p = scratch("grid.csv");
  write_function_grid({identity}, {-1.0, 0.0, 0.5, 3.0}, p);
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
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"draw_id", "v", "x", "b", "sigma", "alpha", "eta",
                                             "in_domain"});
  for (int r = 1; r <= 3; ++r) {
    CHECK(std::stod(rows[r][4]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(rows[r][3]) == doctest::Approx(0.0));
    CHECK(rows[r][7] == "1");
  }
  // v = 3 lies outside the h-domain [-2, 2]: flagged, not extrapolated
  CHECK(rows[4][7] == "0");
  CHECK(rows[4][4] == "nan");
}
