// recipmod: build zoo surfaces, solve moduli, and run the check suites.
//
// Exit status: 0 pass, 1 assertion failure, 2 usage, config or I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "recipmod/analysis.hpp"
#include "recipmod/experiment.hpp"
#include "recipmod/mesh_io.hpp"
#include "recipmod/potential.hpp"
#include "recipmod/shortest_path.hpp"

using namespace recipmod;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string surface = "square";
  int n = 32;
  std::string mesh;
  std::string out;
  double eps_adm = 1e-6;
  double eps_gap = 1e-6;
  long long max_iter = 0;
  int levels = kDefaultLevels;
  std::uint64_t seed = 1;
};

void add_surface_options(CLI::App* cmd, Common& c, bool allow_mesh = true) {
  cmd->add_option("--surface", c.surface, "Surface spec, e.g. square, rectangle:2:1, "
                                          "collapsed_disk:1.5:0.5");
  cmd->add_option("-n,--n", c.n, "Cells per unit length")->check(CLI::PositiveNumber);
  if (allow_mesh) cmd->add_option("--mesh", c.mesh, "Read the surface from a mesh file");
}

void add_solver_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--eps-adm", c.eps_adm, "Admissibility tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eps-gap", c.eps_gap, "Relative duality gap tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", c.max_iter, "Iteration cap (0: 50 |E|)");
}

ModulusOptions solver(const Common& c) {
  ModulusOptions o;
  o.eps_adm = c.eps_adm;
  o.eps_gap = c.eps_gap;
  o.max_iter = c.max_iter;
  return o;
}

Surface load(const Common& c) {
  if (!c.mesh.empty()) return read_surface(c.mesh);
  return make_surface(parse_surface_spec(c.surface), c.n);
}

// Writes to --out when given, stdout otherwise.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
}

ExperimentConfig single_config(const Common& c) {
  ExperimentConfig cfg;
  cfg.surfaces = {parse_surface_spec(c.surface)};
  cfg.resolutions = {c.n};
  cfg.modulus = solver(c);
  cfg.levels = c.levels;
  cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

int report_rows(const Common& c, const SuiteOutput& suite) {
  emit(c, rows_to_csv(suite.rows));
  for (const auto& r : suite.rows) {
    if (r.hard && r.failed()) return kExitFail;
  }
  return 0;
}

std::vector<int> parse_resolutions(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--resolutions: not an integer: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete 2-modulus of conjugate curve families and reciprocality checks"};
  app.require_subcommand(1);
  Common c;

  auto* build = app.add_subcommand("build", "Write a zoo surface as a mesh document");
  add_surface_options(build, c, false);
  build->add_option("-o,--out", c.out, "Output file (default: stdout)");

  int family = 1;
  auto* modulus = app.add_subcommand("modulus", "Solve Mod Gamma_1 or Mod Gamma_2 of Q");
  add_surface_options(modulus, c);
  add_solver_options(modulus, c);
  modulus->add_option("--family", family, "1: zeta1-zeta3, 2: zeta2-zeta4")
      ->check(CLI::IsMember({1, 2}));
  modulus->add_option("-o,--out", c.out, "Output file (default: stdout)");

  auto* potential = app.add_subcommand("potential", "Per-vertex potential u as CSV");
  add_surface_options(potential, c);
  add_solver_options(potential, c);
  potential->add_option("-o,--out", c.out, "Output file (default: stdout)");

  int level_count = 9;
  auto* levelsets = app.add_subcommand("levelsets", "Level curves of u as CSV polylines");
  add_surface_options(levelsets, c);
  add_solver_options(levelsets, c);
  levelsets->add_option("--count", level_count, "Levels t = i / (count + 1)")
      ->check(CLI::PositiveNumber);
  levelsets->add_option("-o,--out", c.out, "Output file (default: stdout)");

  auto* coarea = app.add_subcommand("coarea", "Coarea and oscillation checks as CSV");
  add_surface_options(coarea, c, false);
  add_solver_options(coarea, c);
  coarea->add_option("--levels", c.levels, "Levels per integral")->check(CLI::Range(2, 100000));
  coarea->add_option("--seed", c.seed, "Random seed");
  coarea->add_option("-o,--out", c.out, "Output file (default: stdout)");

  double cx = 0.5, cy = 0.5, r = 0.05, R = 0.2;
  auto* ring = app.add_subcommand("ring", "Ring modulus about the vertex nearest (x, y)");
  add_surface_options(ring, c);
  add_solver_options(ring, c);
  ring->add_option("--x", cx, "Center x (reference coordinates)");
  ring->add_option("--y", cy, "Center y (reference coordinates)");
  ring->add_option("--r", r, "Inner radius")->check(CLI::PositiveNumber);
  ring->add_option("--R", R, "Outer radius")->check(CLI::PositiveNumber);

  auto* recip = app.add_subcommand("reciprocality", "Reciprocality report as CSV");
  add_surface_options(recip, c, false);
  add_solver_options(recip, c);
  recip->add_option("--levels", c.levels, "Levels per integral")->check(CLI::Range(2, 100000));
  recip->add_option("-o,--out", c.out, "Output file (default: stdout)");

  std::string config_path, resolutions, surfaces;
  auto* suite = app.add_subcommand("suite", "Run the configured suites and write reports");
  suite->add_option("--config", config_path, "Key = value config file");
  suite->add_option("--out", c.out, "Report directory (overrides the config)");
  suite->add_option("--seed", c.seed, "Random seed (overrides the config)");
  suite->add_option("--surfaces", surfaces, "Comma list of surface specs or zoo (overrides the config)");
  suite->add_option("--resolutions", resolutions, "Comma list, strictly increasing");
  suite->add_option("--eps-adm", c.eps_adm, "Admissibility tolerance")
      ->check(CLI::PositiveNumber);
  suite->add_option("--eps-gap", c.eps_gap, "Relative duality gap tolerance")
      ->check(CLI::PositiveNumber);
  suite->add_option("--max-iter", c.max_iter, "Iteration cap (0: 50 |E|)");
  suite->add_option("--levels", c.levels, "Levels per integral")->check(CLI::Range(2, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (build->parsed()) {
      emit(c, surface_to_json(load(c)));
      return 0;
    }
    if (modulus->parsed()) {
      const auto s = load(c);
      const auto fam = family == 1 ? gamma1(s.frame) : gamma2(s.frame);
      const auto res = solve_modulus(s.mesh, fam, solver(c));
      emit(c, modulus_to_json(res));
      return certify(res, s.mesh, fam, solver(c)).passed() ? 0 : kExitFail;
    }
    if (potential->parsed() || levelsets->parsed()) {
      const auto s = load(c);
      const auto res = solve_modulus(s.mesh, gamma1(s.frame), solver(c));
      const auto field = build_potential(s.mesh, s.frame, res.density);
      std::string text;
      char buf[256];
      if (potential->parsed()) {
        text = "vertex,x,y,u\n";
        for (VertexId v = 0; v < static_cast<VertexId>(s.mesh.num_vertices()); ++v) {
          const auto& p = s.mesh.position(v);
          std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", v, p.x, p.y, field.u[v]);
          text += buf;
        }
      } else {
        text = "level,component,edge,x,y\n";
        for (int i = 1; i <= level_count; ++i) {
          const double t = static_cast<double>(i) / (level_count + 1);
          const auto curve = level_set(s.mesh, s.frame, field, t);
          for (std::size_t k = 0; k < curve.components.size(); ++k) {
            for (EdgeId e : curve.components[k].edges) {
              const auto& ed = s.mesh.edge(e);
              const double ua = field.u[ed.a], ub = field.u[ed.b];
              const double w = (curve.level - ua) / (ub - ua);
              const auto& pa = s.mesh.position(ed.a);
              const auto& pb = s.mesh.position(ed.b);
              std::snprintf(buf, sizeof buf, "%.12g,%zu,%d,%.12g,%.12g\n", curve.level, k, e,
                            pa.x + w * (pb.x - pa.x), pa.y + w * (pb.y - pa.y));
              text += buf;
            }
          }
        }
      }
      emit(c, text);
      return upper_gradient_violations(s.mesh, field).empty() ? 0 : kExitFail;
    }
    if (coarea->parsed()) {
      const auto cfg = single_config(c);
      return report_rows(c, run_coarea_suite(cfg.surfaces[0], c.n, cfg));
    }
    if (ring->parsed()) {
      const auto s = load(c);
      VertexId center = 0;
      double best = kInf;
      for (VertexId v = 0; v < static_cast<VertexId>(s.mesh.num_vertices()); ++v) {
        const auto& p = s.mesh.position(v);
        const double d = std::hypot(p.x - cx, p.y - cy);
        if (d < best) {
          best = d;
          center = v;
        }
      }
      const auto res = ring_modulus(s.mesh, center, r, R, solver(c));
      std::printf("center=%d r=%s R=%s modulus=%s status=%s\n", center,
                  format_number(r).c_str(), format_number(R).c_str(),
                  res.value.to_string().c_str(), to_string(res.status));
      return res.certified() ? 0 : kExitFail;
    }
    if (recip->parsed()) {
      const auto cfg = single_config(c);
      return report_rows(c, run_reciprocality_suite(cfg.surfaces[0], c.n, cfg));
    }
    if (suite->parsed()) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      if (!c.out.empty()) cfg.out = c.out;
      if (suite->count("--seed")) cfg.seed = c.seed;
      if (!surfaces.empty()) cfg.surfaces = parse_config("surfaces = " + surfaces).surfaces;
      if (!resolutions.empty()) cfg.resolutions = parse_resolutions(resolutions);
      if (suite->count("--eps-adm")) cfg.modulus.eps_adm = c.eps_adm;
      if (suite->count("--eps-gap")) cfg.modulus.eps_gap = c.eps_gap;
      if (suite->count("--max-iter")) cfg.modulus.max_iter = c.max_iter;
      if (suite->count("--levels")) cfg.levels = c.levels;
      cfg.validate();
      const auto run = run_experiment(cfg);
      for (const auto& f : run.files) std::printf("%s\n", f.string().c_str());
      std::printf("hard failures: %zu\n", run.hard_failures);
      return run.exit_code;
    }
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
