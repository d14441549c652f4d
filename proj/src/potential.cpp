#include "recipmod/potential.hpp"

#include <algorithm>
#include <cmath>

#include "recipmod/shortest_path.hpp"

namespace recipmod {

namespace {

bool in_ambient(const std::vector<char>& ambient, VertexId v) {
  return ambient.empty() || ambient[v] != 0;
}

}  // namespace

PotentialField build_potential(const MetricMesh& mesh, const QuadFrame& frame,
                               const Density& density, std::vector<char> ambient) {
  if (density.size() != mesh.num_edges()) {
    throw InvalidInput("density size does not match the mesh");
  }
  PotentialField field;
  field.density = density;
  field.ambient = std::move(ambient);
  SearchScope scope;
  scope.ambient = &field.ambient;
  const auto weights = rho_weights(mesh, density);
  const auto tree = shortest_paths(mesh, frame.zeta(1), weights, scope);
  field.u.resize(mesh.num_vertices());
  for (std::size_t v = 0; v < field.u.size(); ++v) {
    field.u[v] = std::min(1.0, tree.dist[v]);
  }
  return field;
}

std::vector<EdgeId> upper_gradient_violations(const MetricMesh& mesh,
                                              const PotentialField& field) {
  std::vector<EdgeId> bad;
  for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
    const auto& ed = mesh.edge(e);
    if (!in_ambient(field.ambient, ed.a) || !in_ambient(field.ambient, ed.b)) continue;
    const double w = field.density[e] * ed.length;
    // Same expression the shortest-path sweep relaxes with, so the check is
    // exact rather than tolerance-based.
    if (field.u[ed.b] > field.u[ed.a] + w || field.u[ed.a] > field.u[ed.b] + w) {
      bad.push_back(e);
    }
  }
  return bad;
}

double generic_level(std::span<const double> values, double t) {
  for (int guard = 0; guard < 1000; ++guard) {
    if (std::find(values.begin(), values.end(), t) == values.end()) return t;
    t += 1e-12;
  }
  return t;
}

std::vector<EdgeId> crossed_edges(const MetricMesh& mesh,
                                  std::span<const double> values, double t,
                                  const std::vector<char>& ambient) {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(mesh.num_edges()); ++e) {
    const auto& ed = mesh.edge(e);
    if (!in_ambient(ambient, ed.a) || !in_ambient(ambient, ed.b)) continue;
    const double lo = std::min(values[ed.a], values[ed.b]);
    const double hi = std::max(values[ed.a], values[ed.b]);
    if (lo < t && t <= hi) out.push_back(e);
  }
  return out;
}

namespace {

// Calls fn(e1, e2, length) for each level segment inside a face.
template <class Fn>
void for_each_level_segment(const MetricMesh& mesh, std::span<const double> values,
                            double t, const std::vector<char>& ambient, Fn&& fn) {
  struct Crossing {
    EdgeId edge;
    Point2 p;
  };
  std::vector<Crossing> cross;
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.num_faces()); ++f) {
    const auto& face = mesh.face(f);
    const auto& cyc = face.cycle;
    if (!std::all_of(cyc.begin(), cyc.end(), [&](VertexId v) { return in_ambient(ambient, v); })) {
      continue;
    }
    double ref_area = 0.0;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const auto& p = mesh.position(cyc[i]);
      const auto& q = mesh.position(cyc[(i + 1) % cyc.size()]);
      ref_area += p.x * q.y - q.x * p.y;
    }
    ref_area = 0.5 * std::abs(ref_area);
    if (!(ref_area > 0.0) || !(face.area > 0.0)) continue;
    const double scale = std::sqrt(face.area / ref_area);

    cross.clear();
    const auto edges = mesh.face_edges(f);
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const VertexId a = cyc[i], b = cyc[(i + 1) % cyc.size()];
      const double lo = std::min(values[a], values[b]);
      const double hi = std::max(values[a], values[b]);
      if (!(lo < t && t <= hi)) continue;
      const double s = (t - values[a]) / (values[b] - values[a]);
      const auto& pa = mesh.position(a);
      const auto& pb = mesh.position(b);
      cross.push_back({edges[i], {pa.x + s * (pb.x - pa.x), pa.y + s * (pb.y - pa.y)}});
    }
    const std::size_t k = cross.size();
    if (k < 2) continue;
    auto dist = [&](std::size_t i, std::size_t j) {
      return std::hypot(cross[i].p.x - cross[j].p.x, cross[i].p.y - cross[j].p.y);
    };
    // Saddle faces: of the two cyclic pairings take the shorter one.
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i + 1 < k; i += 2) first += dist(i, i + 1);
    for (std::size_t i = 1; i < k; i += 2) second += dist(i, (i + 1) % k);
    const std::size_t shift = (k > 2 && second < first) ? 1 : 0;
    for (std::size_t i = shift; i < k; i += 2) {
      const std::size_t j = (i + 1) % k;
      fn(cross[i].edge, cross[j].edge, scale * dist(i, j));
    }
  }
}

}  // namespace

double level_length(const MetricMesh& mesh, std::span<const double> values, double t,
                    std::span<const double> g, const std::vector<char>& ambient) {
  if (values.size() != mesh.num_vertices()) {
    throw InvalidInput("level field must have one value per vertex");
  }
  if (!g.empty() && g.size() != mesh.num_edges()) {
    throw InvalidInput("g must have one value per edge");
  }
  double total = 0.0;
  for_each_level_segment(mesh, values, t, ambient, [&](EdgeId e1, EdgeId e2, double len) {
    total += g.empty() ? len : 0.5 * (g[e1] + g[e2]) * len;
  });
  return total;
}

std::size_t LevelCurve::spanning_components() const {
  return static_cast<std::size_t>(std::count_if(
      components.begin(), components.end(),
      [](const LevelComponent& c) { return c.spans_2_4(); }));
}

std::vector<int> arc_edge_labels(const MetricMesh& mesh, const QuadFrame& frame) {
  std::vector<int> label(mesh.num_edges(), 0);
  for (int k = 1; k <= 4; ++k) {
    const auto& arc = frame.zeta(k);
    for (std::size_t i = 0; i + 1 < arc.size(); ++i) {
      const EdgeId e = mesh.find_edge(arc[i], arc[i + 1]);
      if (e >= 0) label[e] = k;
    }
  }
  return label;
}

LevelCurve level_set(const MetricMesh& mesh, const QuadFrame& frame,
                     const PotentialField& field, double t) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidInput("level must lie in (0, 1)");
  LevelCurve curve;
  curve.level = generic_level(field.u, t);
  curve.crossed = crossed_edges(mesh, field.u, curve.level, field.ambient);
  curve.degenerate = curve.crossed.empty();
  if (curve.degenerate) return curve;

  const auto labels = arc_edge_labels(mesh, frame);
  const auto chains = dual_chains(mesh, curve.crossed);
  curve.simple = chains.simple;
  std::vector<int> owner(mesh.num_edges(), -1);
  for (const auto& chain : chains.chains) {
    LevelComponent comp;
    comp.edges = chain;
    for (EdgeId e : chain) {
      if (labels[e] > 0) comp.meets[labels[e] - 1] = true;
      owner[e] = static_cast<int>(curve.components.size());
    }
    curve.components.push_back(std::move(comp));
  }
  for_each_level_segment(mesh, field.u, curve.level, field.ambient,
                         [&](EdgeId e1, EdgeId, double len) {
                           curve.components[owner[e1]].length_estimate += len;
                           curve.length_estimate += len;
                         });
  return curve;
}

MaxPrincipleReport max_principle_check(const MetricMesh& mesh,
                                       const QuadFrame& frame,
                                       const PotentialField& field,
                                       std::span<const VertexId> region,
                                       double tolerance) {
  if (region.empty()) throw InvalidInput("empty region");
  std::vector<char> inside(mesh.num_vertices(), 0), on_13(mesh.num_vertices(), 0);
  for (VertexId v : region) inside[v] = 1;
  for (int k : {1, 3}) {
    for (VertexId v : frame.zeta(k)) on_13[v] = 1;
  }
  std::vector<char> boundary(mesh.num_vertices(), 0);
  for (VertexId v : region) {
    if (on_13[v]) boundary[v] = 1;
    for (const auto& inc : mesh.neighbors(v)) {
      if (!inside[inc.neighbor] && in_ambient(field.ambient, inc.neighbor)) {
        boundary[inc.neighbor] = 1;
      }
    }
  }

  MaxPrincipleReport rep;
  rep.region_max = -kInf;
  rep.region_min = kInf;
  for (VertexId v : region) {
    rep.region_max = std::max(rep.region_max, field.u[v]);
    rep.region_min = std::min(rep.region_min, field.u[v]);
  }
  rep.boundary_max = -kInf;
  rep.boundary_min = kInf;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (!boundary[v]) continue;
    ++rep.boundary_size;
    rep.boundary_max = std::max(rep.boundary_max, field.u[v]);
    rep.boundary_min = std::min(rep.boundary_min, field.u[v]);
  }
  if (rep.boundary_size == 0) {
    // The region is all of Q with no vertex on zeta1 or zeta3.
    rep.max_ok = rep.min_ok = false;
    return rep;
  }
  rep.max_ok = rep.region_max <= rep.boundary_max + tolerance;
  rep.min_ok = rep.region_min >= rep.boundary_min - tolerance;
  return rep;
}

double oscillation(const PotentialField& field, std::span<const VertexId> region) {
  if (region.empty()) return 0.0;
  double lo = kInf, hi = -kInf;
  for (VertexId v : region) {
    lo = std::min(lo, field.u[v]);
    hi = std::max(hi, field.u[v]);
  }
  return hi - lo;
}

}  // namespace recipmod
