#include "recipmod/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "recipmod/analysis.hpp"
#include "recipmod/curves.hpp"
#include "recipmod/potential.hpp"
#include "recipmod/shortest_path.hpp"

namespace recipmod {

ConfigError::ConfigError(const std::string& message, std::size_t line)
    : InvalidInput(line > 0 ? "config line " + std::to_string(line) + ": " + message
                            : "config: " + message),
      line_(line),
      message_(message) {}

namespace {

struct BuilderInfo {
  const char* name;
  std::size_t params;
  const char* usage;
};

constexpr BuilderInfo kBuilders[] = {
    {"square", 0, "square"},
    {"rectangle", 2, "rectangle:W:H"},
    {"conformal_radial", 0, "conformal_radial"},
    {"conformal_linear", 0, "conformal_linear"},
    {"collapsed_disk", 2, "collapsed_disk:H:R"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": not a number: '" + s + "'", line);
  }
  return v;
}

long long parse_int(const std::string& s, std::size_t line, const std::string& what) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(what + ": not an integer: '" + s + "'", line);
  }
  return v;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// One generator per (surface, n, purpose), independent of scheduling.
std::mt19937_64 make_rng(const ExperimentConfig& cfg, const SurfaceSpec& spec, int n,
                         std::string_view purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(spec.id())),
                    static_cast<std::uint32_t>(fnv1a(purpose)),
                    static_cast<std::uint32_t>(n)};
  return std::mt19937_64(seq);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t size) {
  return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

const char* pass_fail(bool ok) { return ok ? "pass" : "fail"; }

ReportRow row(const SurfaceSpec& spec, int n, std::string quantity, double lhs, double rhs,
              double constant, std::string status, bool hard = false) {
  return {spec.id(), n, std::move(quantity), lhs, rhs, constant, std::move(status), hard};
}

ModulusOptions modulus_options(const ExperimentConfig& cfg) { return cfg.modulus; }

VertexId nearest_vertex(const MetricMesh& mesh, double x, double y) {
  VertexId best = 0;
  double bd = kInf;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    const auto& p = mesh.position(v);
    const double d = std::hypot(p.x - x, p.y - y);
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

Point2 reference_center(const MetricMesh& mesh) {
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& p : mesh.vertices()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
}

std::vector<char> frame_mask(const MetricMesh& mesh, const QuadFrame& frame) {
  std::vector<char> on(mesh.num_vertices(), 0);
  for (int k = 1; k <= 4; ++k) {
    for (VertexId v : frame.zeta(k)) on[v] = 1;
  }
  return on;
}

// Connected region of interior vertices grown from a random seed.
std::vector<VertexId> random_region(const MetricMesh& mesh, const std::vector<char>& boundary,
                                    std::mt19937_64& rng) {
  std::vector<VertexId> interior;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (!boundary[v]) interior.push_back(v);
  }
  if (interior.empty()) return {};
  const std::size_t target =
      1 + uniform_index(rng, std::max<std::size_t>(2, interior.size() / 8));
  std::vector<char> in(mesh.num_vertices(), 0);
  std::vector<VertexId> region{interior[uniform_index(rng, interior.size())]};
  in[region[0]] = 1;
  std::vector<VertexId> frontier;
  while (region.size() < target) {
    frontier.clear();
    for (VertexId v : region) {
      for (const auto& inc : mesh.neighbors(v)) {
        if (!in[inc.neighbor] && !boundary[inc.neighbor]) frontier.push_back(inc.neighbor);
      }
    }
    if (frontier.empty()) break;
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    const VertexId v = frontier[uniform_index(rng, frontier.size())];
    in[v] = 1;
    region.push_back(v);
  }
  std::sort(region.begin(), region.end());
  return region;
}

// Connected edge set grown from a random vertex.
std::vector<EdgeId> random_subgraph(const MetricMesh& mesh, std::size_t max_edges,
                                    std::mt19937_64& rng) {
  const std::size_t target = 1 + uniform_index(rng, max_edges);
  std::vector<char> touched(mesh.num_vertices(), 0), used(mesh.num_edges(), 0);
  std::vector<VertexId> verts{
      static_cast<VertexId>(uniform_index(rng, mesh.num_vertices()))};
  touched[verts[0]] = 1;
  std::vector<EdgeId> edges, candidates;
  while (edges.size() < target) {
    candidates.clear();
    for (VertexId v : verts) {
      for (const auto& inc : mesh.neighbors(v)) {
        if (!used[inc.edge]) candidates.push_back(inc.edge);
      }
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const EdgeId e = candidates[uniform_index(rng, candidates.size())];
    used[e] = 1;
    edges.push_back(e);
    for (VertexId v : {mesh.edge(e).a, mesh.edge(e).b}) {
      if (!touched[v]) {
        touched[v] = 1;
        verts.push_back(v);
      }
    }
  }
  return edges;
}

// 1-Lipschitz map from the surface to the plane: the identity in reference
// coordinates, composed with the radial collapse for the collapsed disk.
// Conformal zoo weights are >= 1, so the identity is 1-Lipschitz there too.
Point2 planar_image(const SurfaceSpec& spec, const Point2& p) {
  if (!spec.collapsed()) return p;
  const double radius = spec.params[1];
  const double r = std::hypot(p.x, p.y);
  if (r <= radius) return {0.0, 0.0};
  const double s = (r - radius) / r;
  return {s * p.x, s * p.y};
}

// max or min of unit-gradient affine pieces, scaled by L: L-Lipschitz and
// piecewise linear, with |gradient| = L almost everywhere.
std::vector<double> random_pl_field(const MetricMesh& mesh, const SurfaceSpec& spec,
                                    double lipschitz, std::mt19937_64& rng) {
  const int pieces = 1 + static_cast<int>(uniform_index(rng, 4));
  const bool take_max = uniform_index(rng, 2) == 0;
  std::vector<std::array<double, 3>> affine;
  for (int k = 0; k < pieces; ++k) {
    const double theta = uniform(rng, 0.0, 2.0 * kPi);
    affine.push_back({std::cos(theta), std::sin(theta), uniform(rng, -0.5, 0.5)});
  }
  std::vector<double> m(mesh.num_vertices());
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    const Point2 z = planar_image(spec, mesh.position(v));
    double best = take_max ? -kInf : kInf;
    for (const auto& a : affine) {
      const double val = a[0] * z.x + a[1] * z.y + a[2];
      best = take_max ? std::max(best, val) : std::min(best, val);
    }
    m[v] = lipschitz * best;
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------- surfaces

std::string SurfaceSpec::id() const {
  std::string s = builder;
  for (double p : params) s += ":" + format_number(p);
  return s;
}

bool SurfaceSpec::euclidean() const { return builder == "square" || builder == "rectangle"; }

bool SurfaceSpec::smooth() const {
  return euclidean() || builder == "conformal_radial" || builder == "conformal_linear";
}

std::vector<std::string> available_builders() {
  std::vector<std::string> out;
  for (const auto& b : kBuilders) out.push_back(b.usage);
  return out;
}

SurfaceSpec parse_surface_spec(std::string_view text) {
  const auto parts = split(text, ':');
  const BuilderInfo* info = nullptr;
  for (const auto& b : kBuilders) {
    if (parts[0] == b.name) info = &b;
  }
  if (info == nullptr) {
    std::string list;
    for (const auto& b : available_builders()) list += (list.empty() ? "" : ", ") + b;
    throw ConfigError("unknown builder '" + parts[0] + "'; available: " + list);
  }
  if (parts.size() - 1 != info->params) {
    throw ConfigError("builder " + parts[0] + " expects " + std::to_string(info->params) +
                      " parameter(s): " + info->usage);
  }
  SurfaceSpec spec{parts[0], {}};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    spec.params.push_back(parse_double(parts[i], 0, parts[0]));
  }
  return spec;
}

Surface make_surface(const SurfaceSpec& spec, int n) {
  if (spec.builder == "square") return build_rectangle(1.0, 1.0, n);
  if (spec.builder == "rectangle") return build_rectangle(spec.params[0], spec.params[1], n);
  if (spec.builder == "conformal_radial") {
    return build_conformal(1.0, 1.0, n, [](double x, double y) { return 1.0 + x * x + y * y; });
  }
  if (spec.builder == "conformal_linear") {
    return build_conformal(1.0, 1.0, n, [](double x, double) { return 1.0 + x; });
  }
  if (spec.builder == "collapsed_disk") {
    return build_collapsed_disk(spec.params[0], n, spec.params[1]);
  }
  throw ConfigError("unknown builder '" + spec.builder + "'");
}

std::vector<SurfaceSpec> zoo() {
  return {{"square", {}},
          {"conformal_radial", {}},
          {"conformal_linear", {}},
          {"collapsed_disk", {1.5, 0.5}}};
}

const char* to_string(Suite s) {
  switch (s) {
    case Suite::kModulus: return "modulus";
    case Suite::kPotential: return "potential";
    case Suite::kCoarea: return "coarea";
    case Suite::kReciprocality: return "reciprocality";
  }
  return "?";
}

// ------------------------------------------------------------------ config

void ExperimentConfig::validate() const {
  if (surfaces.empty()) throw ConfigError("no surfaces");
  if (resolutions.empty()) throw ConfigError("no resolutions");
  if (suites.empty()) throw ConfigError("no suites");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 2) throw ConfigError("resolutions must be >= 2");
    if (i > 0 && resolutions[i] <= resolutions[i - 1]) {
      throw ConfigError("resolutions must be strictly increasing");
    }
  }
  if (!(modulus.eps_adm > 0.0) || !(modulus.eps_gap > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (modulus.max_iter < 0) throw ConfigError("max_iter must be >= 0");
  if (levels < 2) throw ConfigError("levels must be >= 2");
  if (regions < 0 || subgraphs < 0 || fields < 0) {
    throw ConfigError("sample counts must be >= 0");
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);

    if (key == "surfaces") {
      cfg.surfaces.clear();
      for (const auto& item : split(value, ',')) {
        if (item == "zoo") {
          for (auto& s : zoo()) cfg.surfaces.push_back(std::move(s));
          continue;
        }
        try {
          cfg.surfaces.push_back(parse_surface_spec(item));
        } catch (const ConfigError& e) {
          throw ConfigError(e.message(), line_no);
        }
      }
    } else if (key == "resolutions") {
      cfg.resolutions.clear();
      for (const auto& item : split(value, ',')) {
        cfg.resolutions.push_back(static_cast<int>(parse_int(item, line_no, key)));
      }
    } else if (key == "suites") {
      cfg.suites.clear();
      for (const auto& item : split(value, ',')) {
        if (item == "all") {
          cfg.suites = {Suite::kModulus, Suite::kPotential, Suite::kCoarea,
                        Suite::kReciprocality};
          continue;
        }
        bool found = false;
        for (Suite s : {Suite::kModulus, Suite::kPotential, Suite::kCoarea,
                        Suite::kReciprocality}) {
          if (item == to_string(s)) {
            if (std::find(cfg.suites.begin(), cfg.suites.end(), s) == cfg.suites.end()) {
              cfg.suites.push_back(s);
            }
            found = true;
          }
        }
        if (!found) {
          throw ConfigError("unknown suite '" + item +
                                "'; available: modulus, potential, coarea, reciprocality, all",
                            line_no);
        }
      }
    } else if (key == "eps_adm") {
      cfg.modulus.eps_adm = parse_double(value, line_no, key);
    } else if (key == "eps_gap") {
      cfg.modulus.eps_gap = parse_double(value, line_no, key);
    } else if (key == "max_iter") {
      cfg.modulus.max_iter = parse_int(value, line_no, key);
    } else if (key == "levels") {
      cfg.levels = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "seed") {
      const auto v = parse_int(value, line_no, key);
      if (v < 0) throw ConfigError("seed must be >= 0", line_no);
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "regions") {
      cfg.regions = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "subgraphs") {
      cfg.subgraphs = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "fields") {
      cfg.fields = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw ConfigError("unknown key '" + key + "'", line_no);
    }
    if (end == text.size()) break;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ------------------------------------------------------------------ output

double mesh_tolerance(int n) { return 0.05 * 32.0 / static_cast<double>(n); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "surface,n,quantity,lhs,rhs,constant,pass\n";
  for (const auto& r : rows) {
    out += r.surface + "," + std::to_string(r.n) + "," + r.quantity + "," +
           format_number(r.lhs) + "," + format_number(r.rhs) + "," +
           format_number(r.constant) + "," + r.status + "\n";
  }
  return out;
}

// ------------------------------------------------------------------ suites

SuiteOutput run_modulus_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg) {
  const Surface s = make_surface(spec, n);
  SuiteOutput out;
  const auto opts = modulus_options(cfg);
  double expected[2] = {0.0, 0.0};
  if (spec.euclidean()) {
    const double w = spec.builder == "square" ? 1.0 : spec.params[0];
    const double h = spec.builder == "square" ? 1.0 : spec.params[1];
    expected[0] = w / h;
    expected[1] = h / w;
  }
  for (int k = 1; k <= 2; ++k) {
    const FamilySpec fam = k == 1 ? gamma1(s.frame) : gamma2(s.frame);
    const auto res = solve_modulus(s.mesh, fam, opts);
    const auto cert = certify(res, s.mesh, fam, opts);
    const std::string g = "gamma" + std::to_string(k);
    const double value = res.value.infinite ? kInf : res.value.value;
    if (spec.euclidean()) {
      const double err = std::abs(value - expected[k - 1]) / expected[k - 1];
      out.rows.push_back(row(spec, n, "mod_" + g, value, expected[k - 1], value / expected[k - 1],
                             pass_fail(err <= 0.03)));
    } else {
      out.rows.push_back(row(spec, n, "mod_" + g, value, 0.0, 0.0, "info"));
    }
    out.rows.push_back(row(spec, n, "admissibility_" + g, 1.0 - cert.min_length, opts.eps_adm,
                           cert.min_length, pass_fail(cert.admissible), true));
    out.rows.push_back(row(spec, n, "duality_gap_" + g, cert.relative_gap, opts.eps_gap,
                           cert.dual, pass_fail(cert.gap_ok), true));
    out.rows.push_back(row(spec, n, "slackness_" + g, cert.slackness_residual,
                           4.0 * (opts.eps_adm + opts.eps_gap), 0.0,
                           pass_fail(cert.slackness_ok)));
    out.summary.push_back({"mod_" + g, res.value.to_string()});
    out.summary.push_back({"status_" + g, to_string(res.status)});
  }
  return out;
}

SuiteOutput run_potential_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg) {
  const Surface s = make_surface(spec, n);
  const auto& mesh = s.mesh;
  SuiteOutput out;
  const auto res = solve_modulus(mesh, gamma1(s.frame), modulus_options(cfg));
  const auto field = build_potential(mesh, s.frame, res.density);

  const auto viol = upper_gradient_violations(mesh, field);
  out.rows.push_back(row(spec, n, "upper_gradient_violations", static_cast<double>(viol.size()),
                         0.0, 0.0, pass_fail(viol.empty()), true));
  double dev1 = 0.0, dev3 = 0.0;
  for (VertexId v : s.frame.zeta(1)) dev1 = std::max(dev1, std::abs(field.u[v]));
  for (VertexId v : s.frame.zeta(3)) dev3 = std::max(dev3, std::abs(1.0 - field.u[v]));
  out.rows.push_back(row(spec, n, "u_on_zeta1", dev1, 0.0, 0.0, pass_fail(dev1 == 0.0)));
  out.rows.push_back(row(spec, n, "u_on_zeta3", dev3, 0.0, 0.0, pass_fail(dev3 == 0.0)));

  for (int i = 1; i <= 9; ++i) {
    const double t = 0.1 * i;
    const auto curve = level_set(mesh, s.frame, field, t);
    const bool ok = curve.connected() && curve.spanning_components() == 1;
    char name[32];
    std::snprintf(name, sizeof name, "level_set_%.1f", t);
    out.rows.push_back(row(spec, n, name, static_cast<double>(curve.components.size()), 1.0,
                           curve.length_estimate, pass_fail(ok)));
  }

  // Maximum principle on random connected interior regions.
  {
    auto rng = make_rng(cfg, spec, n, "regions");
    const auto boundary = frame_mask(mesh, s.frame);
    int failures = 0, tested = 0;
    double worst = -kInf;
    for (int i = 0; i < cfg.regions; ++i) {
      const auto region = random_region(mesh, boundary, rng);
      if (region.empty()) continue;
      const auto rep = max_principle_check(mesh, s.frame, field, region);
      ++tested;
      if (!rep.passed()) ++failures;
      worst = std::max({worst, rep.region_max - rep.boundary_max,
                        rep.boundary_min - rep.region_min});
    }
    out.rows.push_back(row(spec, n, "max_principle_failures", failures, 0.0,
                           tested > 0 ? worst : 0.0, pass_fail(failures == 0)));
  }

  // Curves on random connected subgraphs.
  {
    auto rng = make_rng(cfg, spec, n, "subgraphs");
    double walk_ratio = 0.0, path_ratio = 0.0;
    int max_mult = 0;
    bool walk_ok = true, path_ok = true;
    const std::size_t max_edges = 4 * static_cast<std::size_t>(n);
    for (int i = 0; i < cfg.subgraphs; ++i) {
      const auto sub = random_subgraph(mesh, max_edges, rng);
      std::vector<VertexId> verts;
      for (EdgeId e : sub) {
        verts.push_back(mesh.edge(e).a);
        verts.push_back(mesh.edge(e).b);
      }
      std::sort(verts.begin(), verts.end());
      verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
      const VertexId x = verts[uniform_index(rng, verts.size())];
      const VertexId y = verts[uniform_index(rng, verts.size())];
      const double h1 = total_length(mesh, sub);

      const auto walk = double_traversal(mesh, sub, x, y);
      const auto mult = edge_multiplicity(walk);
      bool covers = mult.size() == sub.size();
      for (const auto& [e, c] : mult) max_mult = std::max(max_mult, c);
      const bool ends = walk.vertices.front() == x && walk.vertices.back() == y;
      if (h1 > 0.0) walk_ratio = std::max(walk_ratio, walk.length / h1);
      walk_ok = walk_ok && covers && ends && max_mult <= 2 &&
                walk.length <= 2.0 * h1 * (1.0 + 1e-12);

      const auto path = extract_path(mesh, sub, x, y);
      if (h1 > 0.0) path_ratio = std::max(path_ratio, path.length / h1);
      path_ok = path_ok && path.injective && path.length <= h1 * (1.0 + 1e-12) &&
                path.vertices.front() == x && path.vertices.back() == y;
    }
    out.rows.push_back(row(spec, n, "double_traversal_length_ratio", walk_ratio, 2.0, max_mult,
                           pass_fail(walk_ok)));
    out.rows.push_back(row(spec, n, "extract_path_length_ratio", path_ratio, 1.0, 0.0,
                           pass_fail(path_ok)));
  }
  out.summary.push_back({"upper_gradient_violations", std::to_string(viol.size())});
  return out;
}

SuiteOutput run_coarea_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg) {
  const Surface s = make_surface(spec, n);
  const auto& mesh = s.mesh;
  SuiteOutput out;
  const double tol = mesh_tolerance(n);

  {
    auto rng = make_rng(cfg, spec, n, "fields");
    double worst = 0.0;
    for (int i = 0; i < cfg.fields; ++i) {
      const double lip = uniform(rng, 0.5, 2.0);
      const auto m = random_pl_field(mesh, spec, lip, rng);
      std::vector<double> g(mesh.num_edges());
      for (auto& x : g) x = uniform(rng, 0.5, 1.5);
      const auto rep = coarea_check(mesh, m, lip, g, cfg.levels, tol);
      worst = std::max(worst, rep.empirical_constant / (kFourOverPi * lip));
      out.rows.push_back(row(spec, n, "coarea_pl_" + std::to_string(i), rep.lhs, rep.rhs,
                             rep.empirical_constant, pass_fail(rep.passed)));
    }
    out.summary.push_back({"coarea_pl_worst_ratio", format_number(worst)});
  }

  {
    const auto opts = modulus_options(cfg);
    const auto m1 = solve_modulus(mesh, gamma1(s.frame), opts);
    const auto m2 = solve_modulus(mesh, gamma2(s.frame), opts);
    const auto field = build_potential(mesh, s.frame, m1.density);
    const auto rep =
        coarea_u_check(mesh, s.frame, field, m1.density, m2.density.values, cfg.levels, tol);
    out.rows.push_back(row(spec, n, "coarea_u", rep.lhs, rep.rhs, rep.empirical_constant,
                           pass_fail(rep.passed)));
    const double slack = rep.lhs > 0.0 ? rep.rhs / rep.lhs : kInf;
    out.rows.push_back(row(spec, n, "coarea_u_slack", slack, 100.0, rep.constant,
                           pass_fail(slack >= 100.0)));
    const double cap = kFourOverPi * 1.1;
    out.rows.push_back(row(spec, n, "coarea_u_empirical_constant", rep.empirical_constant, cap,
                           rep.empirical_constant,
                           spec.smooth() ? pass_fail(rep.empirical_constant <= cap) : "info"));
    out.summary.push_back({"coarea_u_empirical_constant", format_number(rep.empirical_constant)});

    // Oscillation bound at the reference center and random vertices.
    auto rng = make_rng(cfg, spec, n, "oscillation");
    const Point2 c = reference_center(mesh);
    std::vector<VertexId> centers{nearest_vertex(mesh, c.x, c.y)};
    for (int i = 0; i < 5; ++i) {
      centers.push_back(static_cast<VertexId>(uniform_index(rng, mesh.num_vertices())));
    }
    const double r0 = std::min(arc_diameter(mesh, s.frame.zeta(1)),
                               arc_diameter(mesh, s.frame.zeta(3))) / 4.0;
    const std::vector<double> radii{0.25 * r0, 0.5 * r0, 0.9 * r0};
    const auto rows = oscillation_check(mesh, s.frame, field, m1.density, centers, radii, tol);
    int idx = 0;
    for (const auto& r : rows) {
      const std::string q = "oscillation_" + std::to_string(idx++);
      if (r.skipped) {
        out.rows.push_back(row(spec, n, q, r.lhs, r.rhs, 0.0, "skipped"));
        continue;
      }
      const double emp = r.rhs > 0.0 ? r.lhs * kFourOverPi / r.rhs : 0.0;
      out.rows.push_back(row(spec, n, q, r.lhs, r.rhs, emp,
                             pass_fail(r.passed && r.passed_image)));
    }
  }
  return out;
}

SuiteOutput run_reciprocality_suite(const SurfaceSpec& spec, int n,
                                    const ExperimentConfig& cfg) {
  const Surface s = make_surface(spec, n);
  const auto& mesh = s.mesh;
  SuiteOutput out;
  ReciprocityOptions opts;
  opts.modulus = modulus_options(cfg);
  opts.levels = cfg.levels;
  const auto rep = reciprocality_report(mesh, s.frame, opts);
  const auto kappas = rep.kappa.values();
  const char* names[3] = {"proven", "refined", "conjectured"};

  const auto val = [](const ModulusResult& r) { return r.value.infinite ? kInf : r.value.value; };
  out.rows.push_back(row(spec, n, "mod_gamma1", val(rep.gamma1), 0.0, 0.0, "info"));
  out.rows.push_back(row(spec, n, "mod_gamma2", val(rep.gamma2), 0.0, 0.0, "info"));
  out.rows.push_back(row(spec, n, "certified", rep.certified ? 1.0 : 0.0, 1.0, 0.0,
                         pass_fail(rep.certified), true));

  const bool finite = rep.product.kind == ModulusProduct::Kind::kFinite;
  const double product = finite ? rep.product.value
                         : rep.product.kind == ModulusProduct::Kind::kInfinite
                             ? kInf
                             : std::nan("");
  for (int i = 0; i < 3; ++i) {
    // Only the published constant is a hard assertion; the others are recorded.
    out.rows.push_back(row(spec, n, std::string("lower_") + names[i], product, 1.0 / kappas[i],
                           finite ? product * kappas[i] : 0.0, to_string(rep.lower[i]),
                           i == 0));
  }
  if (spec.smooth()) {
    const bool near = finite && product >= 0.94 && product <= 1.06;
    out.rows.push_back(row(spec, n, "product_near_one", product, 1.0, 0.06, pass_fail(near)));
  }
  for (int i = 0; i < 3; ++i) {
    out.rows.push_back(row(spec, n, std::string("upper_") + names[i], rep.upper_max_product,
                           kappas[i], static_cast<double>(rep.upper_probes),
                           to_string(rep.upper[i])));
  }
  out.rows.push_back(row(spec, n, "ring_decay_flag", rep.ring_ratio,
                         1.25 * std::log(2.0) / std::log(8.0), rep.ring_outer,
                         to_string(rep.ring)));

  const auto& ch = rep.chain;
  out.rows.push_back(row(spec, n, "chain_admissible", ch.min_band_length,
                         1.0 - opts.modulus.eps_adm, static_cast<double>(ch.band_paths_found),
                         pass_fail(ch.admissible_ok)));
  out.rows.push_back(row(spec, n, "chain_coarea", 1.0, ch.coarea_bound, ch.empirical_constant,
                         pass_fail(ch.coarea_ok)));
  out.rows.push_back(row(spec, n, "chain_holder", ch.face_pairing, ch.holder_bound, 0.0,
                         pass_fail(ch.holder_ok)));

  // Ring modulus at explicit radii.
  const Point2 c = reference_center(mesh);
  const VertexId center = nearest_vertex(mesh, c.x, c.y);
  if (spec.collapsed()) {
    const double R = 0.5 * (spec.params[0] + spec.params[1]);
    double first = 0.0, last = 0.0;
    for (double f : {0.2, 0.1, 0.05}) {
      const double r = f * spec.params[1];
      const auto m = ring_modulus(mesh, center, r, R, opts.modulus);
      const double v = val(m);
      if (f == 0.2) first = v;
      last = v;
      out.rows.push_back(row(spec, n, "ring_modulus_r" + format_number(r), v, R, 0.0, "info"));
    }
    const double ratio = first > 0.0 ? last / first : 0.0;
    out.rows.push_back(row(spec, n, "ring_persistence", ratio, 0.5, last,
                           pass_fail(ratio >= 0.5)));
    out.summary.push_back({"ring_persistence", format_number(ratio)});
  } else {
    const double scale = std::min(std::abs(c.x) * 2.0, std::abs(c.y) * 2.0);
    const double r = 0.05 * scale, R = 0.2 * scale;
    const auto m = ring_modulus(mesh, center, r, R, opts.modulus);
    const double round = 2.0 * kPi / std::log(R / r);
    const double v = val(m);
    out.rows.push_back(row(spec, n, "ring_annulus", v, round, v / round,
                           spec.euclidean() && n >= 64
                               ? pass_fail(std::abs(v / round - 1.0) <= 0.10)
                               : "info"));
  }

  out.summary.push_back({"mod_gamma1", rep.gamma1.value.to_string()});
  out.summary.push_back({"mod_gamma2", rep.gamma2.value.to_string()});
  out.summary.push_back({"product", rep.product.to_string()});
  out.summary.push_back({"upper_max_product", format_number(rep.upper_max_product)});
  out.summary.push_back({"chain_empirical_constant", format_number(ch.empirical_constant)});
  return out;
}

// --------------------------------------------------------------------- run

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& spec : cfg.surfaces) {
    (void)make_surface(spec, cfg.resolutions.front());  // fail before computing
  }

  struct Job {
    Suite suite;
    std::size_t surface;
    int n;
  };
  std::vector<Job> jobs;
  for (Suite suite : cfg.suites) {
    for (std::size_t i = 0; i < cfg.surfaces.size(); ++i) {
      for (int n : cfg.resolutions) jobs.push_back({suite, i, n});
    }
  }
  auto run_job = [&cfg](const Job& job) {
    const auto& spec = cfg.surfaces[job.surface];
    switch (job.suite) {
      case Suite::kModulus: return run_modulus_suite(spec, job.n, cfg);
      case Suite::kPotential: return run_potential_suite(spec, job.n, cfg);
      case Suite::kCoarea: return run_coarea_suite(spec, job.n, cfg);
      case Suite::kReciprocality: return run_reciprocality_suite(spec, job.n, cfg);
    }
    return SuiteOutput{};
  };

  // Jobs are independent; results are stored by index so output order does
  // not depend on scheduling.
  std::vector<SuiteOutput> results(jobs.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(jobs.size(), cfg.threads > 0 ? cfg.threads : hw);
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) results[j] = run_job(jobs[j]);
    }));
  }
  for (auto& f : pool) f.get();

  RunResult run;
  std::filesystem::create_directories(cfg.out);
  nlohmann::ordered_json summary;
  KappaBounds kappa;
  summary["kappa"] = {{"proven", format_number(kappa.proven)},
                      {"refined", format_number(kappa.refined)},
                      {"conjectured", format_number(kappa.conjectured)}};
  summary["seed"] = cfg.seed;
  summary["resolutions"] = cfg.resolutions;
  summary["levels"] = cfg.levels;
  summary["eps_adm"] = format_number(cfg.modulus.eps_adm);
  summary["eps_gap"] = format_number(cfg.modulus.eps_gap);

  for (Suite suite : cfg.suites) {
    std::vector<ReportRow> rows;
    nlohmann::ordered_json suite_summary;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].suite != suite) continue;
      auto& res = results[j];
      const std::string key =
          cfg.surfaces[jobs[j].surface].id() + "@" + std::to_string(jobs[j].n);
      for (const auto& [k, v] : res.summary) suite_summary[key][k] = v;
      for (auto& r : res.rows) rows.push_back(std::move(r));
    }
    std::size_t fails = 0, hard = 0;
    for (const auto& r : rows) {
      if (!r.failed()) continue;
      ++fails;
      if (r.hard) ++hard;
    }
    suite_summary["failed_checks"] = fails;
    suite_summary["hard_failures"] = hard;
    run.hard_failures += hard;
    summary["suites"][to_string(suite)] = suite_summary;

    const auto path = cfg.out / (std::string(to_string(suite)) + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << rows_to_csv(rows);
    run.files.push_back(path);
    for (auto& r : rows) run.rows.push_back(std::move(r));
  }
  run.exit_code = run.hard_failures > 0 ? 1 : 0;
  summary["hard_failures"] = run.hard_failures;
  summary["status"] = run.exit_code == 0 ? "pass" : "fail";

  const auto path = cfg.out / "summary.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << summary.dump(2) << "\n";
  run.files.push_back(path);
  return run;
}

}  // namespace recipmod
