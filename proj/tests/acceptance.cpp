// Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails; failures are reported, never masked.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "recipmod/analysis.hpp"
#include "recipmod/experiment.hpp"
#include "recipmod/modulus.hpp"
#include "recipmod/surface.hpp"

using namespace recipmod;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Every modulus solved here, for criterion 6.
struct Certified {
  std::string what;
  Certificate cert;
};
std::vector<Certified> ledger;

ModulusResult solve_logged(const std::string& what, const MetricMesh& mesh, const FamilySpec& fam,
                           double* seconds = nullptr) {
  const auto t0 = Clock::now();
  auto r = solve_modulus(mesh, fam);
  if (seconds) *seconds = seconds_since(t0);
  ledger.push_back({what, certify(r, mesh, fam)});
  return r;
}

double value_of(const ModulusResult& r) { return r.value.infinite ? INFINITY : r.value.value; }

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back((ok ? "ok " : "FAILED ") + note);
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void report(int k, const std::string& title, const Verdict& v) {
  std::printf("criterion %d: %s  %s\n", k, v.pass ? "PASS" : "FAIL", title.c_str());
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

// ---------------------------------------------------------------------------

Verdict rectangle_moduli() {
  Verdict v;
  // Brute-force QP equivalence on 3x3 grids first.
  const auto small = build_rectangle(1, 1, 3);
  for (const auto& fam : {gamma1(small.frame), gamma2(small.frame)}) {
    const auto qp = oracle::path_qp(small.mesh, oracle::simple_paths(small.mesh, fam));
    const double got = solve_logged("3x3 grid", small.mesh, fam).value.value;
    v.require(std::abs(got - qp.value) <= 1e-6 * qp.value,
              fmt("3x3 grid: solver %.10f vs path QP %.10f", got, qp.value));
  }
  for (double a : {1.0, 2.0, 3.0}) {
    const auto s = build_rectangle(a, 1.0, 64);
    double t1 = 0, t2 = 0;
    const double m1 = value_of(solve_logged("rectangle", s.mesh, gamma1(s.frame), &t1));
    const double m2 = value_of(solve_logged("rectangle", s.mesh, gamma2(s.frame), &t2));
    v.require(std::abs(m1 - a) <= 0.03 * a, fmt("a/b=%g: Mod G1 = %.6f (expect %g)", a, m1, a));
    v.require(std::abs(m2 - 1.0 / a) <= 0.03 / a, fmt("a/b=%g: Mod G2 = %.6f (expect %.6f)", a, m2, 1.0 / a));
    v.require(t1 <= 10.0 && t2 <= 10.0, fmt("a/b=%g: solve times %.2fs, %.2fs", a, t1, t2));
  }
  return v;
}

Verdict reciprocal_product() {
  Verdict v;
  const KappaBounds kappa;
  for (const char* name : {"square", "conformal_radial", "conformal_linear"}) {
    const auto s = make_surface(parse_surface_spec(name), 64);
    const double m1 = value_of(solve_logged(name, s.mesh, gamma1(s.frame)));
    const double m2 = value_of(solve_logged(name, s.mesh, gamma2(s.frame)));
    const double p = m1 * m2;
    v.require(p >= 0.94 && p <= 1.06, std::string(name) + fmt(": product %.6f in [0.94, 1.06]", p));
    v.require(p >= 1.0 / kappa.proven, std::string(name) + fmt(": product >= 1/kappa_proven = %.3g", 1.0 / kappa.proven));
    v.notes.push_back(std::string("info ") + name + ": lower refined " +
                      (p >= 1.0 / kappa.refined ? "pass" : "fail") +
                      ", lower conjectured " + (p >= 1.0 / kappa.conjectured ? "pass" : "fail"));
  }
  return v;
}

Verdict collapsed_disk() {
  Verdict v;
  const KappaBounds kappa;
  const auto spec = parse_surface_spec("collapsed_disk:1.5:0.5");
  double mod1_64 = 0.0;
  for (int n : {32, 64}) {
    const auto s = make_surface(spec, n);
    const auto r1 = solve_logged("collapsed disk", s.mesh, gamma1(s.frame));
    const auto r2 = solve_logged("collapsed disk", s.mesh, gamma2(s.frame));
    const auto p = ModulusProduct::of(r1.value, r2.value);
    v.require(p.kind == ModulusProduct::Kind::kFinite && p.value >= 1.0 / kappa.proven,
              fmt("n=%g: finite product %.6f >= 1/kappa_proven", n, p.value));
    if (n == 64) mod1_64 = value_of(r1);
  }
  const auto flat = build_rectangle(3, 3, 64);
  const double euclid = value_of(solve_logged("3x3 square", flat.mesh, gamma1(flat.frame)));
  const double excess = mod1_64 / euclid - 1.0;
  v.require(excess >= 0.25, fmt("n=64: Mod G1 %.6f vs Euclidean %.6f, excess %.1f%% (need >= 25%%)",
                                mod1_64, euclid, 100.0 * excess));

  const auto s = make_surface(spec, 64);
  VertexId c = 0;
  for (VertexId u = 0; u < static_cast<VertexId>(s.mesh.num_vertices()); ++u) {
    if (std::hypot(s.mesh.position(u).x, s.mesh.position(u).y) <
        std::hypot(s.mesh.position(c).x, s.mesh.position(c).y)) {
      c = u;
    }
  }
  std::vector<double> ring;
  for (double f : {0.2, 0.1, 0.05}) {
    const auto m = ring_modulus(s.mesh, c, f * 0.5, 1.0);
    ledger.push_back({"collapsed ring", certify(m, s.mesh, ring_family(s.mesh, c, f * 0.5, 1.0))});
    ring.push_back(value_of(m));
  }
  v.require(ring[2] >= 0.5 * ring[0],
            fmt("collapsed ring: Mod(r=0.1) %.4f, Mod(r=0.025) %.4f, ratio %.3f >= 0.5", ring[0], ring[2],
                ring[2] / ring[0]));

  const auto sq = build_rectangle(1, 1, 64);
  VertexId mid = 0;
  for (VertexId u = 0; u < static_cast<VertexId>(sq.mesh.num_vertices()); ++u) {
    if (std::hypot(sq.mesh.position(u).x - 0.5, sq.mesh.position(u).y - 0.5) < 1e-9) mid = u;
  }
  const auto m = ring_modulus(sq.mesh, mid, 0.05, 0.2);
  ledger.push_back({"square ring", certify(m, sq.mesh, ring_family(sq.mesh, mid, 0.05, 0.2))});
  const double round = 2.0 * kPi / std::log(4.0);
  v.require(std::abs(value_of(m) / round - 1.0) <= 0.10,
            fmt("square ring (0.05, 0.2): %.4f vs 2pi/log 4 = %.4f", value_of(m), round));
  return v;
}

// Runs a suite over the zoo at n and checks the selected rows.
template <class Suite, class Pick>
Verdict zoo_rows(Suite suite, int n, Pick pick, double* elapsed = nullptr) {
  Verdict v;
  ExperimentConfig cfg;
  const auto t0 = Clock::now();
  std::size_t checked = 0;
  for (const auto& spec : zoo()) {
    const auto out = suite(spec, n, cfg);
    for (const auto& r : out.rows) {
      if (!pick(spec, r)) continue;
      ++checked;
      if (r.status != "pass") {
        v.require(false, r.surface + " " + r.quantity + fmt(": lhs %.6g rhs %.6g", r.lhs, r.rhs) +
                             " status " + r.status);
      }
    }
  }
  if (elapsed) *elapsed = seconds_since(t0);
  v.require(checked > 0, std::to_string(checked) + " report rows checked");
  return v;
}

bool starts_with(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }

Verdict coarea_suite() {
  double t = 0.0;
  auto v = zoo_rows(run_coarea_suite, 32,
                    [](const SurfaceSpec& spec, const ReportRow& r) {
                      if (starts_with(r.quantity, "coarea_pl_")) return true;
                      if (r.quantity == "coarea_u" || r.quantity == "coarea_u_slack") return true;
                      return r.quantity == "coarea_u_empirical_constant" && spec.smooth();
                    },
                    &t);
  v.require(t <= 60.0, fmt("runtime %.2fs <= 60s", t));
  return v;
}

Verdict potential_suite() {
  return zoo_rows(run_potential_suite, 32, [](const SurfaceSpec&, const ReportRow& r) {
    return r.quantity == "upper_gradient_violations" || starts_with(r.quantity, "u_on_zeta") ||
           r.quantity == "max_principle_failures" || starts_with(r.quantity, "level_set_");
  });
}

Verdict curves_suite() {
  return zoo_rows(run_potential_suite, 32, [](const SurfaceSpec&, const ReportRow& r) {
    return r.quantity == "double_traversal_length_ratio" || r.quantity == "extract_path_length_ratio";
  });
}

Verdict certification() {
  Verdict v;
  double worst_adm = 0.0, worst_gap = 0.0;
  bool all = true;
  for (const auto& c : ledger) {
    worst_adm = std::max(worst_adm, 1.0 - c.cert.min_length);
    worst_gap = std::max(worst_gap, std::abs(c.cert.relative_gap));
    if (!(c.cert.admissible && c.cert.gap_ok)) {
      all = false;
      v.notes.push_back("FAILED certificate: " + c.what);
    }
  }
  v.require(all && worst_adm <= 1e-6 && worst_gap <= 1e-6,
            std::to_string(ledger.size()) +
                fmt(" solves: worst admissibility residual %.3g, worst relative gap %.3g", worst_adm,
                    worst_gap));
  // Every grid mesh whose family has at most 40 simple paths.
  int meshes = 0;
  double worst_rel = 0.0;
  for (double w = 0.5; w <= 3.0; w += 0.5) {
    for (double h = 0.5; h <= 3.0; h += 0.5) {
      const auto s = build_rectangle(w, h, 2);
      for (const auto& fam : {gamma1(s.frame), gamma2(s.frame)}) {
        const auto paths = oracle::simple_paths(s.mesh, fam, 41);
        if (paths.size() > 40) continue;
        ++meshes;
        const double qp = oracle::path_qp(s.mesh, paths).value;
        const double got = solve_modulus(s.mesh, fam).value.value;
        worst_rel = std::max(worst_rel, std::abs(got - qp) / qp);
      }
    }
  }
  v.require(meshes > 0 && worst_rel <= 1e-6,
            fmt("brute force on %g families with <= 40 paths: worst relative error %.3g", meshes, worst_rel));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  const auto base = fs::temp_directory_path() / "recipmod_acceptance";
  fs::remove_all(base);
  std::vector<RunResult> runs;
  for (const char* tag : {"a", "b"}) {
    ExperimentConfig cfg;  // full suite: zoo, n = 16, 32, every suite
    cfg.seed = 1;
    cfg.out = base / tag;
    runs.push_back(run_experiment(cfg));
  }
  std::size_t csvs = 0;
  for (std::size_t i = 0; i < runs[0].files.size(); ++i) {
    const auto& f = runs[0].files[i];
    if (f.extension() != ".csv") continue;
    ++csvs;
    v.require(slurp(f) == slurp(runs[1].files[i]), f.filename().string() + " byte-identical");
  }
  v.require(csvs == 4, std::to_string(csvs) + " CSV reports compared");
  fs::remove_all(base);
  return v;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  report(1, "rectangle moduli at n = 64", rectangle_moduli());
  report(2, "reciprocal product on smooth surfaces at n = 64", reciprocal_product());
  report(3, "collapsed disk degradation and ring persistence", collapsed_disk());
  report(4, "coarea property suite at n = 32", coarea_suite());
  report(5, "potential suite at n = 32", potential_suite());
  report(6, "solver certification and brute-force equivalence", certification());
  report(7, "curves suite at n = 32", curves_suite());
  report(8, "determinism of the full suite", determinism());
  std::printf("%d of 8 criteria failed (%.1fs)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
