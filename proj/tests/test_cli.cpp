#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jcarray/experiment.hpp"
#include "jcarray/output.hpp"

namespace fs = std::filesystem;
using namespace jcarray;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "jcarray_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + JCARRAY_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path preset(const std::string& name) { return fs::path(JCARRAY_PRESET_DIR) / (name + ".json"); }

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto c = parse_config(R"({"engine": "meanfield", "M": 2})");
  CHECK(c.engine == Engine::meanfield);
  CHECK(c.lattice.M == 2);
  CHECK(c.lattice.J == 1.0);
  CHECK(c.lattice.delta_c == 0.01);
  CHECK(c.lattice.delta_q == 0.01);
  CHECK(c.lattice.kappa == 0.0);
  CHECK(c.lattice.gamma == 0.0);
  CHECK(c.lattice.g == std::vector<double>{0.0, 0.0});
  CHECK(c.lattice.d == std::vector<double>{0.0, 0.0});
}

TEST_CASE("validation errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"engine": "meanfield", "M": 2, "g": [1, 2, 3]})").rfind("g", 0) == 0);
  CHECK(message(R"({"engine": "meanfield", "M": 2, "colour": 1})").find("colour") != std::string::npos);
  CHECK(message(R"({"engine": "meanfield", "M": "two"})").rfind("M", 0) == 0);
  CHECK(message(R"({"engine": "warp", "M": 2})").rfind("engine", 0) == 0);
  CHECK(message(R"({"engine": "trajectories", "M": 2, "n_max": 3})").find("n_traj") != std::string::npos);
  CHECK(message(R"({"engine": "phase_sweep", "M": 2})").find("count") != std::string::npos);
  CHECK(message(R"({"engine": "meanfield", "M": 2, "kappa": -1})").rfind("kappa", 0) == 0);
  CHECK(message(R"({"engine": "meanfield", "M": 2, "g": 1, "g_gc": 2, "gc_N": 20})").find("g") != std::string::npos);
  CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
}

TEST_CASE("engineered trapping preset values") {
  const auto c = load_config(preset("fig2g-i"));
  CHECK(c.engine == Engine::master);
  CHECK(c.lattice.g[0] == 0.0);
  CHECK(c.lattice.g[1] == doctest::Approx(2.0 * 2.8 * std::sqrt(10.0)).epsilon(1e-14));
  CHECK(c.lattice.d[0] == 0.04);
  CHECK(c.lattice.d[1] == 0.0);
  CHECK(c.lattice.kappa == 0.04);
  CHECK(c.lattice.gamma == 0.04);
  CHECK(c.photons == std::vector<double>{10.0, 0.0});
}

TEST_CASE("every shipped preset parses and round-trips") {
  const std::vector<std::string> names{"fig2a-c", "fig2d-f", "fig2g-i", "fig3", "fig4", "fig5a", "fig5b", "fig6a",
                                       "fig6b", "fig7a", "fig7b", "s1", "s2", "s3", "empty"};
  for (const auto& n : names) {
    CAPTURE(n);
    REQUIRE(fs::exists(preset(n)));
    const auto c = load_config(preset(n));
    CHECK_NOTHROW(c.validate());
    const std::string text = render_config(c);
    const auto again = parse_config(text);
    CHECK(render_config(again) == text);
    CHECK(config_hash(again) == config_hash(c));
  }
}

TEST_CASE("timeseries CSV layout") {
  TimeSeries s;
  s.M = 2;
  s.times = {0.0, 0.5, 1.0};
  s.N = {{1.0, 0.0}, {0.5, 0.25}, {0.0, 0.0}};
  s.sz = {{-0.5, -0.5}, {-0.5, 0.1}, {-0.5, -0.5}};
  s.z = {1.0, 1.0 / 3.0, std::nullopt};
  const auto text = timeseries_csv(s);
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "t,N_1,N_2,sz_1,sz_2,z");
  CHECK(lines[2] == "0.5,0.5,0.25,-0.5,0.10000000000000001,0.33333333333333331");
  CHECK(lines[3] == "1,0,0,-0.5,-0.5,");
  CHECK(std::stod(format_number(0.1)) == 0.1);
}

TEST_CASE("meanfield run writes CSV and JSON") {
  const auto dir = scratch_dir("meanfield");
  auto c = parse_config(R"({"engine": "meanfield", "name": "mf", "M": 2, "g": 3, "photons": [4, 0],
                            "sz": -0.5, "kappa": 0.04, "gamma": 0.04, "t_max": 5, "sample_dt": 0.5})");
  const auto s = run_experiment(c, dir);
  CHECK(s.samples == 11);
  CHECK(s.final_time == doctest::Approx(5.0));
  const auto rows = read_csv(dir / "mf.csv");
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].size() == 6);
  CHECK(fs::exists(dir / "mf.json"));
  CHECK(slurp(dir / "mf.json").find(s.input_hash) != std::string::npos);
}

TEST_CASE("trajectory CSV has non-negative stderr and is reproducible") {
  const std::string text = R"({"engine": "trajectories", "name": "tr", "M": 2, "g": [1.5, 0], "d": [0.2, 0],
      "kappa": 0.2, "gamma": 0.1, "n_max": 5, "photons": [2, 0], "sz": -0.5, "n_traj": 40,
      "seed": 3, "t_max": 6, "sample_dt": 1, "truncation_tol": 1})";
  auto c = parse_config(text);
  const auto a = scratch_dir("traj_a");
  const auto b = scratch_dir("traj_b");
  c.workers = c.trajectories.workers = 1;
  run_experiment(c, a);
  c.workers = c.trajectories.workers = 3;
  run_experiment(c, b);
  CHECK(slurp(a / "tr.csv") == slurp(b / "tr.csv"));

  const auto rows = read_csv(a / "tr.csv");
  REQUIRE(rows.size() == 8);
  const auto& header = rows[0];
  for (std::size_t col = 0; col < header.size(); ++col) {
    if (header[col].find("_err") == std::string::npos) continue;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r][col].empty()) continue;
      CHECK(std::stod(rows[r][col]) >= 0.0);
    }
  }
  CHECK(std::find(header.begin(), header.end(), "N_err_1") != header.end());
  CHECK(std::find(header.begin(), header.end(), "z_err") != header.end());
}

TEST_CASE("empty lattice preset gives all-zero observables") {
  const auto dir = scratch_dir("empty");
  const auto c = load_config(preset("empty"));
  const auto s = run_experiment(c, dir);
  for (double n : s.final_N) CHECK(n == 0.0);
  CHECK(!s.final_z);
  const auto rows = read_csv(dir / (c.name + ".csv"));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::stod(rows[r][1]) == 0.0);
    CHECK(std::stod(rows[r][2]) == 0.0);
    CHECK(rows[r][5].empty());
  }
}

TEST_CASE("boundary command writes the analytic curve") {
  const auto dir = scratch_dir("boundary");
  const auto c = load_config(preset("fig6a"));
  run_boundary(c, dir);
  const auto rows = read_csv(dir / (c.name + "_boundary.csv"));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == std::vector<std::string>{"d1", "kappa"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double d1 = std::stod(rows[r][0]);
    const double k = std::stod(rows[r][1]);
    CHECK(k == doctest::Approx(*analytic_boundary_kappa(d1, c.lattice.g[0], 0.01)).scale(1.0));
  }
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch_dir("exit");
  const auto out = " --output-dir \"" + dir.string() + "\"";
  CHECK(run_cli("presets list") == exit_ok);
  CHECK(run_cli("run empty" + out) == exit_ok);
  CHECK(run_cli("run no_such_config_file" + out) == exit_io);
  CHECK(run_cli("frobnicate") == exit_validation);

  std::ofstream(dir / "bad.json") << R"({"engine": "meanfield", "M": 2, "g": [1, 2, 3]})";
  CHECK(run_cli("run \"" + (dir / "bad.json").string() + "\"" + out) == exit_validation);

  std::ofstream(dir / "trunc.json") << R"({"engine": "master", "M": 1, "n_max": 2, "d": 1.0, "kappa": 0.1,
                                          "photons": [0], "sz": -0.5, "t_max": 20})";
  CHECK(run_cli("run \"" + (dir / "trunc.json").string() + "\"" + out) == exit_truncation);

  CHECK(run_cli("sweep empty" + out) == exit_validation);
  CHECK(run_cli("run empty --horizon -1" + out) == exit_validation);
}

TEST_CASE("seed and horizon overrides change the hash") {
  auto c = load_config(preset("fig3"));
  const auto h = config_hash(c);
  c.seed += 1;
  CHECK(config_hash(c) != h);
  c.seed -= 1;
  CHECK(config_hash(c) == h);
  c.set_t_max(50.0);
  CHECK(c.t_max() == 50.0);
  CHECK(config_hash(c) != h);
}
