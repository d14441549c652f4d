#include "recipmod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

#include "recipmod/shortest_path.hpp"

namespace recipmod {

namespace {

bool in_ambient(const std::vector<char>& ambient, VertexId v) {
  return ambient.empty() || ambient[v] != 0;
}

bool edge_in_ambient(const MetricMesh& mesh, const std::vector<char>& ambient, EdgeId e) {
  return in_ambient(ambient, mesh.edge(e).a) && in_ambient(ambient, mesh.edge(e).b);
}

void check_edge_field(const MetricMesh& mesh, std::span<const double> g, const char* what) {
  if (g.size() != mesh.num_edges()) {
    throw InvalidInput(std::string(what) + " must have one value per edge");
  }
}

}  // namespace

LevelIntegral level_integral(const MetricMesh& mesh, std::span<const double> values,
                             std::span<const double> g, int levels, double lo,
                             double hi, const std::vector<char>& ambient) {
  if (levels < 2) throw InvalidInput("level count must be at least 2");
  LevelIntegral out;
  if (!(hi > lo)) return out;
  const double dt = (hi - lo) / (levels - 1);
  for (int i = 0; i < levels; ++i) {
    const double t = generic_level(values, lo + i * dt);
    const double len = level_length(mesh, values, t, g, ambient);
    out.levels.push_back(t);
    out.lengths.push_back(len);
    const double w = (i == 0 || i == levels - 1) ? 0.5 : 1.0;
    out.integral += w * len * dt;
  }
  return out;
}

CoareaReport coarea_check(const MetricMesh& mesh, std::span<const double> m,
                          double lipschitz, std::span<const double> g, int levels,
                          double tolerance) {
  if (m.size() != mesh.num_vertices()) {
    throw InvalidInput("field must have one value per vertex");
  }
  check_edge_field(mesh, g, "weight");
  if (!(lipschitz >= 0.0)) throw InvalidInput("Lipschitz bound must be nonnegative");
  for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
    const auto& ed = mesh.edge(e);
    const double bound = lipschitz * ed.length;
    if (std::abs(m[ed.a] - m[ed.b]) > bound + 1e-12 * std::max(1.0, bound)) {
      throw InvalidInput("not L-Lipschitz");
    }
  }
  double lo = kInf, hi = -kInf;
  for (double v : m) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const auto li = level_integral(mesh, m, g, levels, lo, hi);
  CoareaReport rep;
  rep.levels = li.levels;
  rep.lhs = li.integral;
  for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
    rep.area_integral += g[e] * mesh.cell_share(e);
  }
  rep.constant = kFourOverPi * lipschitz;
  rep.rhs = rep.constant * rep.area_integral;
  rep.tolerance = tolerance;
  rep.empirical_constant =
      rep.area_integral > 0.0 && lipschitz > 0.0 ? rep.lhs / (lipschitz * rep.area_integral) : 0.0;
  rep.passed = rep.lhs <= rep.rhs * (1.0 + tolerance);
  return rep;
}

CoareaReport coarea_u_check(const MetricMesh& mesh, const QuadFrame& frame,
                            const PotentialField& field, const Density& density,
                            std::span<const double> g, int levels, double tolerance) {
  (void)frame;
  check_edge_field(mesh, g, "weight");
  check_edge_field(mesh, density.values, "density");
  const auto li = level_integral(mesh, field.u, g, levels, 0.0, 1.0, field.ambient);
  const auto area = edge_areas_within(mesh, field.ambient);
  CoareaReport rep;
  rep.levels = li.levels;
  rep.lhs = li.integral;
  for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
    if (area[e] > 0.0) rep.area_integral += g[e] * density[e] * area[e];
  }
  rep.constant = kCoareaUConstant;
  rep.rhs = rep.constant * rep.area_integral;
  rep.tolerance = tolerance;
  rep.empirical_constant = rep.area_integral > 0.0 ? rep.lhs / rep.area_integral : 0.0;
  rep.passed = rep.lhs <= rep.rhs * (1.0 + tolerance);
  return rep;
}

double arc_diameter(const MetricMesh& mesh, const std::vector<VertexId>& arc) {
  double diam = 0.0;
  const auto w = length_weights(mesh);
  for (VertexId s : arc) {
    const VertexId src[] = {s};
    const auto tree = shortest_paths(mesh, src, w);
    for (VertexId v : arc) diam = std::max(diam, tree.dist[v]);
  }
  return diam;
}

std::vector<OscillationRow> oscillation_check(const MetricMesh& mesh,
                                              const QuadFrame& frame,
                                              const PotentialField& field,
                                              const Density& density,
                                              std::span<const VertexId> centers,
                                              std::span<const double> radii,
                                              double tolerance) {
  check_edge_field(mesh, density.values, "density");
  const double r0 = std::min(arc_diameter(mesh, frame.zeta(1)),
                             arc_diameter(mesh, frame.zeta(3))) / 4.0;
  const auto w = length_weights(mesh);
  const auto area = edge_areas_within(mesh, field.ambient);
  std::vector<OscillationRow> rows;
  for (VertexId x : centers) {
    const VertexId src[] = {x};
    SearchScope scope;
    scope.ambient = &field.ambient;
    const auto tree = shortest_paths(mesh, src, w, scope);
    for (double r : radii) {
      OscillationRow row;
      row.center = x;
      row.radius = r;
      if (!(r > 0.0) || r >= r0) {
        row.skipped = true;
        rows.push_back(row);
        continue;
      }
      // The ball inside Q is connected through its shortest paths, so it is
      // already the component of x.
      const double slack = 1e-12 * std::max(1.0, r);
      std::vector<VertexId> inner;
      std::vector<char> in_inner(mesh.num_vertices(), 0), in_outer(mesh.num_vertices(), 0);
      for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
        if (tree.dist[v] <= r + slack) {
          inner.push_back(v);
          in_inner[v] = 1;
        }
        if (tree.dist[v] <= 2.0 * r + slack) in_outer[v] = 1;
      }
      row.osc = oscillation(field, inner);
      std::vector<std::pair<double, double>> spans;
      double mass = 0.0;
      for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
        const auto& ed = mesh.edge(e);
        if (in_inner[ed.a] && in_inner[ed.b]) {
          spans.emplace_back(std::min(field.u[ed.a], field.u[ed.b]),
                             std::max(field.u[ed.a], field.u[ed.b]));
        }
        if (in_outer[ed.a] && in_outer[ed.b] && area[e] > 0.0) {
          mass += density[e] * area[e];
        }
      }
      std::sort(spans.begin(), spans.end());
      double covered = 0.0, cur_lo = 0.0, cur_hi = -kInf;
      for (const auto& [a, b] : spans) {
        if (a > cur_hi) {
          if (cur_hi > -kInf) covered += cur_hi - cur_lo;
          cur_lo = a;
          cur_hi = b;
        } else {
          cur_hi = std::max(cur_hi, b);
        }
      }
      if (cur_hi > -kInf) covered += cur_hi - cur_lo;
      row.image_measure = covered;
      row.lhs = r * row.osc;
      row.lhs_image = r * row.image_measure;
      row.rhs = kFourOverPi * mass;
      row.passed = row.lhs <= row.rhs * (1.0 + tolerance);
      row.passed_image = row.lhs_image <= row.rhs * (1.0 + tolerance);
      rows.push_back(row);
    }
  }
  return rows;
}

FamilySpec ring_family(const MetricMesh& mesh, VertexId center, double r, double R) {
  if (!(r > 0.0 && r < R)) throw InvalidInput("ring radii must satisfy 0 < r < R");
  if (center < 0 || center >= static_cast<VertexId>(mesh.num_vertices())) {
    throw InvalidInput("ring center out of range");
  }
  FamilySpec fam;
  fam.label = "ring";
  fam.source = ball(mesh, center, r);
  const auto outer = ball(mesh, center, R);
  std::vector<char> in_outer(mesh.num_vertices(), 0);
  for (VertexId v : outer) in_outer[v] = 1;
  std::vector<char> is_sink(mesh.num_vertices(), 0);
  for (VertexId v : outer) {
    for (const auto& inc : mesh.neighbors(v)) {
      if (!in_outer[inc.neighbor]) is_sink[inc.neighbor] = 1;
    }
  }
  fam.ambient.assign(mesh.num_vertices(), 0);
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (is_sink[v]) fam.sink.push_back(v);
    fam.ambient[v] = in_outer[v] || is_sink[v];
  }
  if (fam.sink.empty()) throw InvalidInput("ball(center, R) covers the surface");
  return fam;
}

ModulusResult ring_modulus(const MetricMesh& mesh, VertexId center, double r,
                           double R, const ModulusOptions& options) {
  return solve_modulus(mesh, ring_family(mesh, center, r, R), options);
}

ModulusProduct ModulusProduct::of(const ModulusValue& a, const ModulusValue& b) {
  ModulusProduct p;
  if (a.infinite || b.infinite) {
    const bool zero_factor = (!a.infinite && a.value == 0.0) || (!b.infinite && b.value == 0.0);
    p.kind = zero_factor ? Kind::kIndeterminate : Kind::kInfinite;
    return p;
  }
  p.value = a.value * b.value;
  return p;
}

std::string ModulusProduct::to_string() const {
  switch (kind) {
    case Kind::kInfinite: return "inf";
    case Kind::kIndeterminate: return "indeterminate";
    case Kind::kFinite: break;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

const char* to_string(Flag f) {
  switch (f) {
    case Flag::kPass: return "pass";
    case Flag::kFail: return "fail";
    case Flag::kIndeterminate: return "indeterminate";
  }
  return "?";
}

std::vector<double> face_magnitudes(const MetricMesh& mesh, const Density& density) {
  std::vector<double> mag(mesh.num_faces(), 0.0);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.num_faces()); ++f) {
    const auto edges = mesh.face_edges(f);
    double s = 0.0;
    for (EdgeId e : edges) s += density[e] * density[e];
    mag[f] = std::sqrt(2.0 * s / static_cast<double>(edges.size()));
  }
  return mag;
}

ChainCheck product_bound_chain(const MetricMesh& mesh, const QuadFrame& frame,
                               const ModulusResult& gamma1,
                               const ModulusResult& gamma2, int levels,
                               double eps_adm, const std::vector<char>& ambient) {
  if (levels < 1) throw InvalidInput("level count must be positive");
  ChainCheck chain;
  chain.levels = static_cast<std::size_t>(levels);
  const auto field = build_potential(mesh, frame, gamma1.density, ambient);
  const Density& g = gamma2.density;
  const auto g_weights = rho_weights(mesh, g);
  std::vector<char> is_target(mesh.num_vertices(), 0);
  for (VertexId v : frame.zeta(2)) is_target[v] = 1;

  // Each level set of u separates zeta1 from zeta3; a zeta4 -> zeta2 path
  // through the faces it crosses is a curve of Gamma2 running along it.
  // Midpoint rule on [0, 1].
  chain.min_band_length = kInf;
  std::vector<char> band(mesh.num_edges(), 0);
  for (int i = 0; i < levels; ++i) {
    const double t = generic_level(field.u, (i + 0.5) / levels);
    const auto crossed = crossed_edges(mesh, field.u, t, ambient);
    std::fill(band.begin(), band.end(), 0);
    for (EdgeId e : crossed) {
      const auto [f1, f2] = mesh.edge_faces(e);
      for (FaceId f : {f1, f2}) {
        if (f == kNoFace) continue;
        for (EdgeId fe : mesh.face_edges(f)) {
          if (edge_in_ambient(mesh, ambient, fe)) band[fe] = 1;
        }
      }
    }
    SearchScope scope;
    scope.ambient = &ambient;
    scope.allowed_edges = &band;
    const auto tree = shortest_paths(mesh, frame.zeta(4), g_weights, scope);
    double best = kInf;
    for (VertexId v : frame.zeta(2)) best = std::min(best, tree.dist[v]);
    if (best < kInf) {
      ++chain.band_paths_found;
      chain.min_band_length = std::min(chain.min_band_length, best);
      chain.path_integral += best / levels;
    }
  }

  const auto rho_f = face_magnitudes(mesh, gamma1.density);
  const auto g_f = face_magnitudes(mesh, g);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.num_faces()); ++f) {
    const auto& cyc = mesh.face(f).cycle;
    if (!std::all_of(cyc.begin(), cyc.end(), [&](VertexId v) { return in_ambient(ambient, v); })) {
      continue;
    }
    chain.face_pairing += mesh.face(f).area * g_f[f] * rho_f[f];
  }
  chain.coarea_bound = 4.0 * kCoareaUConstant / kPi * chain.face_pairing;
  chain.empirical_constant =
      chain.face_pairing > 0.0 ? chain.path_integral / chain.face_pairing : 0.0;
  chain.holder_bound = std::sqrt(gamma1.value.value * gamma2.value.value);

  chain.admissible_ok = chain.band_paths_found == chain.levels &&
                        chain.min_band_length >= 1.0 - eps_adm;
  chain.coarea_ok = chain.path_integral <= chain.coarea_bound;
  chain.holder_ok = chain.face_pairing <= chain.holder_bound * (1.0 + 1e-12);
  return chain;
}

namespace {

struct Box {
  double x0, x1, y0, y1;
};

Box bounding_box(const MetricMesh& mesh, const std::vector<char>& ambient) {
  Box b{kInf, -kInf, kInf, -kInf};
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (!in_ambient(ambient, v)) continue;
    const auto& p = mesh.position(v);
    b.x0 = std::min(b.x0, p.x);
    b.x1 = std::max(b.x1, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

// Length distance between two arcs inside the ambient set.
double arc_gap(const MetricMesh& mesh, const std::vector<VertexId>& a,
               const std::vector<VertexId>& b, const std::vector<char>& ambient) {
  SearchScope scope;
  scope.ambient = &ambient;
  const auto tree = shortest_paths(mesh, a, length_weights(mesh), scope);
  double d = kInf;
  for (VertexId v : b) d = std::min(d, tree.dist[v]);
  return d;
}

std::vector<double> coordinate_lines(const MetricMesh& mesh, const std::vector<char>& ambient,
                                     bool use_y) {
  std::set<double> s;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (in_ambient(ambient, v)) s.insert(use_y ? mesh.position(v).y : mesh.position(v).x);
  }
  return {s.begin(), s.end()};
}

std::optional<SubQuad> try_box(const MetricMesh& mesh, const Box& b) {
  try {
    return box_quadrilateral(mesh, b.x0, b.x1, b.y0, b.y1);
  } catch (const InvalidInput&) {
    return std::nullopt;
  }
}

bool nondegenerate(const MetricMesh& mesh, const SubQuad& q) {
  return arc_gap(mesh, q.frame.zeta(1), q.frame.zeta(3), q.ambient) > 0.0 &&
         arc_gap(mesh, q.frame.zeta(2), q.frame.zeta(4), q.ambient) > 0.0;
}

// Centered probe quadrilaterals inside Q: the half-size box and, in each
// direction, the thinnest box whose opposite sides stay a positive distance
// apart. Sub-boxes need a grid-built mesh; other meshes get no probes.
std::vector<SubQuad> probe_quadrilaterals(const MetricMesh& mesh, const std::vector<char>& ambient) {
  std::vector<SubQuad> out;
  const Box q = bounding_box(mesh, ambient);
  const double cx = 0.5 * (q.x0 + q.x1), cy = 0.5 * (q.y0 + q.y1);
  const double hw = 0.25 * (q.x1 - q.x0), hh = 0.25 * (q.y1 - q.y0);
  auto inside_q = [&](const SubQuad& s) {
    if (ambient.empty()) return true;
    for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
      if (s.ambient[v] && !ambient[v]) return false;
    }
    return true;
  };
  auto accept = [&](std::optional<SubQuad> s) {
    if (s && inside_q(*s) && nondegenerate(mesh, *s)) {
      out.push_back(std::move(*s));
      return true;
    }
    return false;
  };
  accept(try_box(mesh, {cx - hw, cx + hw, cy - hh, cy + hh}));
  for (bool thin_y : {true, false}) {
    const auto lines = coordinate_lines(mesh, ambient, thin_y);
    const double c = thin_y ? cy : cx;
    std::vector<double> halves;
    for (double l : lines) {
      if (l > c + 1e-12) halves.push_back(l - c);
    }
    for (double s : halves) {
      const Box b = thin_y ? Box{cx - hw, cx + hw, cy - s, cy + s}
                           : Box{cx - s, cx + s, cy - hh, cy + hh};
      if (accept(try_box(mesh, b))) break;
    }
  }
  return out;
}

VertexId nearest_vertex(const MetricMesh& mesh, const std::vector<char>& ambient, double x,
                        double y) {
  VertexId best = -1;
  double bd = kInf;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (!in_ambient(ambient, v)) continue;
    const auto& p = mesh.position(v);
    const double d = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

Flag lower_flag(const ModulusProduct& p, double kappa) {
  switch (p.kind) {
    case ModulusProduct::Kind::kInfinite: return Flag::kPass;
    case ModulusProduct::Kind::kIndeterminate: return Flag::kIndeterminate;
    case ModulusProduct::Kind::kFinite: break;
  }
  return p.value >= 1.0 / kappa ? Flag::kPass : Flag::kFail;
}

}  // namespace

ReciprocalityReport reciprocality_report(const MetricMesh& mesh, const QuadFrame& frame,
                                         const ReciprocityOptions& options,
                                         const std::vector<char>& ambient) {
  frame.validate(mesh, ambient);
  ReciprocalityReport rep;
  rep.gamma1 = solve_modulus(mesh, gamma1(frame, ambient), options.modulus);
  rep.gamma2 = solve_modulus(mesh, gamma2(frame, ambient), options.modulus);
  rep.certified = rep.gamma1.certified() && rep.gamma2.certified();
  rep.product = ModulusProduct::of(rep.gamma1.value, rep.gamma2.value);
  const auto kappas = rep.kappa.values();
  for (int i = 0; i < 3; ++i) rep.lower[i] = lower_flag(rep.product, kappas[i]);

  // Condition (1): products over Q and its probe sub-quadrilaterals.
  bool upper_unbounded = false, upper_unknown = false;
  auto record = [&](const ModulusProduct& p) {
    ++rep.upper_probes;
    if (p.kind == ModulusProduct::Kind::kInfinite) upper_unbounded = true;
    if (p.kind == ModulusProduct::Kind::kIndeterminate) upper_unknown = true;
    if (p.kind == ModulusProduct::Kind::kFinite) {
      rep.upper_max_product = std::max(rep.upper_max_product, p.value);
    }
  };
  record(rep.product);
  if (options.probes) {
    for (const auto& sub : probe_quadrilaterals(mesh, ambient)) {
      const auto m1 = solve_modulus(mesh, gamma1(sub.frame, sub.ambient), options.modulus);
      const auto m2 = solve_modulus(mesh, gamma2(sub.frame, sub.ambient), options.modulus);
      record(ModulusProduct::of(m1.value, m2.value));
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (upper_unbounded) {
      rep.upper[i] = Flag::kFail;
    } else if (upper_unknown) {
      rep.upper[i] = Flag::kIndeterminate;
    } else {
      rep.upper[i] = rep.upper_max_product <= kappas[i] ? Flag::kPass : Flag::kFail;
    }
  }

  // Condition (3): a vanishing ring modulus decays like 1/log(R/r); compare
  // inner radii R/2 and R/8, where that rate gives the ratio log 2 / log 8.
  if (options.ring) {
    const Box q = bounding_box(mesh, ambient);
    const VertexId c = nearest_vertex(mesh, ambient, 0.5 * (q.x0 + q.x1), 0.5 * (q.y0 + q.y1));
    std::vector<VertexId> boundary;
    for (int k = 1; k <= 4; ++k) {
      boundary.insert(boundary.end(), frame.zeta(k).begin(), frame.zeta(k).end());
    }
    const VertexId src[] = {c};
    const auto tree = shortest_paths(mesh, src, length_weights(mesh));
    double to_boundary = kInf;
    for (VertexId v : boundary) to_boundary = std::min(to_boundary, tree.dist[v]);
    rep.ring_outer = 0.5 * to_boundary;
    if (rep.ring_outer > 0.0 && rep.ring_outer < kInf) {
      const auto big = ring_modulus(mesh, c, rep.ring_outer / 2.0, rep.ring_outer, options.modulus);
      const auto small = ring_modulus(mesh, c, rep.ring_outer / 8.0, rep.ring_outer, options.modulus);
      if (big.value.infinite || small.value.infinite || big.value.value <= 0.0) {
        rep.ring = Flag::kIndeterminate;
      } else {
        rep.ring_large = big.value.value;
        rep.ring_small = small.value.value;
        rep.ring_ratio = rep.ring_small / rep.ring_large;
        const double expected = std::log(2.0) / std::log(8.0);
        rep.ring = rep.ring_ratio <= 1.25 * expected ? Flag::kPass : Flag::kFail;
        // An inner radius below the typical edge length is not resolved.
        std::vector<double> lengths;
        for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
          if (mesh.length(e) > 0.0 && edge_in_ambient(mesh, ambient, e)) {
            lengths.push_back(mesh.length(e));
          }
        }
        const auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
        std::nth_element(lengths.begin(), mid, lengths.end());
        if (rep.ring_outer / 8.0 < 0.99 * *mid) rep.ring = Flag::kIndeterminate;
      }
    }
  }

  if (options.chain && rep.product.kind == ModulusProduct::Kind::kFinite &&
      rep.product.value > 0.0) {
    rep.chain = product_bound_chain(mesh, frame, rep.gamma1, rep.gamma2, options.levels,
                                    options.modulus.eps_adm, ambient);
  }
  return rep;
}

}  // namespace recipmod
