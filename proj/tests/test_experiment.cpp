#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "recipmod/experiment.hpp"

using namespace recipmod;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("recipmod_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("surface specs") {
  CHECK(parse_surface_spec("square").id() == "square");
  const auto r = parse_surface_spec("rectangle:2:1");
  CHECK(r.params == std::vector<double>{2.0, 1.0});
  CHECK(r.euclidean());
  CHECK(parse_surface_spec("conformal_radial").smooth());
  CHECK_FALSE(parse_surface_spec("conformal_radial").euclidean());
  CHECK(parse_surface_spec("collapsed_disk:1.5:0.5").collapsed());
  CHECK_THROWS_AS(parse_surface_spec("rectangle:2"), ConfigError);
  const auto s = make_surface(r, 4);
  CHECK(s.mesh.total_area() == doctest::Approx(2.0));
  CHECK(zoo().size() == 4);
}

TEST_CASE("unknown builder lists the available ones") {
  try {
    parse_config("surfaces = square, torus\n");
    FAIL("accepted an unknown builder");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("torus") != std::string::npos);
    for (const auto& b : available_builders()) CHECK(msg.find(b) != std::string::npos);
    CHECK(e.line() == 1);
  }
}

TEST_CASE("decreasing resolutions are rejected") {
  CHECK_THROWS_WITH_AS(parse_config("resolutions = 32, 16"), doctest::Contains("increasing"),
                       ConfigError);
  ExperimentConfig cfg;
  cfg.resolutions = {16, 16};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config errors carry the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("seed = 3\n# comment\nbogus = 1\n") == 3);
  CHECK(line_of("seed = 3\nseed = 4\n") == 2);
  CHECK(line_of("\n\nlevels = many\n") == 3);
  CHECK(line_of("suites = modulus, nothing\n") == 1);
  CHECK(line_of("no equals sign\n") == 1);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "# small run\n"
      "surfaces = square, rectangle:2:1\n"
      "resolutions = 8, 16\n"
      "suites = modulus, coarea\n"
      "eps_adm = 1e-7\n"
      "seed = 42\n"
      "out = somewhere\n");
  CHECK(cfg.surfaces.size() == 2);
  CHECK(cfg.resolutions == std::vector<int>{8, 16});
  CHECK(cfg.suites == std::vector<Suite>{Suite::kModulus, Suite::kCoarea});
  CHECK(cfg.modulus.eps_adm == 1e-7);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out == fs::path("somewhere"));
  CHECK(parse_config("surfaces = zoo").surfaces.size() == 4);
  CHECK(parse_config("suites = all").suites.size() == 4);
}

TEST_CASE("tolerance and number formatting") {
  CHECK(mesh_tolerance(32) == doctest::Approx(0.05));
  CHECK(mesh_tolerance(64) == doctest::Approx(0.025));
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.0) == "2");
  ReportRow row{"square", 8, "mod_gamma1", 1.0, 1.0, 0.0, "pass", false};
  CHECK(rows_to_csv({row}) == "surface,n,quantity,lhs,rhs,constant,pass\nsquare,8,mod_gamma1,1,1,0,pass\n");
}

TEST_CASE("square run writes every report") {
  auto cfg = parse_config("surfaces = square\nresolutions = 16, 32\nsuites = all\n");
  cfg.out = scratch("square");
  const auto run = run_experiment(cfg);
  CHECK(run.exit_code == 0);
  CHECK(run.hard_failures == 0);
  CHECK(run.files.size() == 5);
  for (const auto& f : run.files) CHECK(fs::exists(f));
  CHECK(fs::exists(cfg.out / "summary.json"));
  fs::remove_all(cfg.out);
}

TEST_CASE("runs are deterministic across thread counts") {
  auto cfg = parse_config("surfaces = square, collapsed_disk:1.5:0.5\nresolutions = 8, 16\nseed = 5\n");
  cfg.out = scratch("det_a");
  cfg.threads = 1;
  const auto a = run_experiment(cfg);
  const auto dir_a = cfg.out;
  cfg.out = scratch("det_b");
  cfg.threads = 4;
  const auto b = run_experiment(cfg);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    if (a.files[i].extension() != ".csv") continue;
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
  }
  // A different seed changes the random samples.
  cfg.seed = 6;
  cfg.out = scratch("det_c");
  const auto c = run_experiment(cfg);
  CHECK(slurp(dir_a / "coarea.csv") != slurp(cfg.out / "coarea.csv"));
  for (const auto& d : {dir_a, scratch("det_b"), cfg.out}) fs::remove_all(d);
}
