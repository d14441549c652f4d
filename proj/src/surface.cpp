#include "recipmod/surface.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "recipmod/shortest_path.hpp"

namespace recipmod {

namespace {

std::string str(double v) { return std::to_string(v); }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Length of the part of segment p->q outside the closed disk |z| <= r.
double length_outside_disk(Point2 p, Point2 q, double r) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double len = std::hypot(dx, dy);
  const double a = dx * dx + dy * dy;
  if (a == 0.0) return 0.0;
  const double b = 2.0 * (p.x * dx + p.y * dy);
  const double c = p.x * p.x + p.y * p.y - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return len;
  const double s = std::sqrt(disc);
  const double t1 = std::clamp((-b - s) / (2.0 * a), 0.0, 1.0);
  const double t2 = std::clamp((-b + s) / (2.0 * a), 0.0, 1.0);
  return len * (1.0 - (t2 - t1));
}

// Antiderivative of sqrt(r^2 - x^2).
double half_chord_integral(double x, double r) {
  x = std::clamp(x, -r, r);
  return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) +
                r * r * std::asin(x / r));
}

// Area of [x0,x1]x[y0,y1] intersected with the disk |z| <= r, integrated
// exactly piece by piece between the breakpoints of the overlap function.
double disk_rect_overlap(double r, double x0, double x1, double y0, double y1) {
  const double lo = std::max(x0, -r);
  const double hi = std::min(x1, r);
  if (hi <= lo) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (double y : {y0, y1}) {
    if (std::abs(y) < r) {
      const double xs = std::sqrt(r * r - y * y);
      for (double x : {-xs, xs}) {
        if (x > lo && x < hi) cuts.push_back(x);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (b <= a) continue;
    const double mid = 0.5 * (a + b);
    const double s = std::sqrt(std::max(0.0, r * r - mid * mid));
    const bool top_is_rect = y1 < s;
    const bool bottom_is_rect = y0 > -s;
    const double top = top_is_rect ? y1 : s;
    const double bottom = bottom_is_rect ? y0 : -s;
    if (top <= bottom) continue;
    const double chord = half_chord_integral(b, r) - half_chord_integral(a, r);
    double piece = 0.0;
    piece += top_is_rect ? y1 * (b - a) : chord;
    piece -= bottom_is_rect ? y0 * (b - a) : -chord;
    area += piece;
  }
  return std::max(0.0, area);
}

struct Grid {
  int nx = 0;
  int ny = 0;
  VertexId id(int i, int j) const { return j * (nx + 1) + i; }
  EdgeId horizontal(int i, int j) const { return j * nx + i; }
  EdgeId vertical(int i, int j) const {
    return nx * (ny + 1) + j * (nx + 1) + i;
  }
};

QuadFrame grid_frame(const Grid& g) {
  QuadFrame frame;
  for (int i = 0; i <= g.nx; ++i) frame.arcs[0].push_back(g.id(i, 0));
  for (int j = 0; j <= g.ny; ++j) frame.arcs[1].push_back(g.id(g.nx, j));
  for (int i = g.nx; i >= 0; --i) frame.arcs[2].push_back(g.id(i, g.ny));
  for (int j = g.ny; j >= 0; --j) frame.arcs[3].push_back(g.id(0, j));
  return frame;
}

// Shared grid builder: coordinates, edge lengths and face areas come from
// callbacks so the Euclidean, conformal and collapsed surfaces agree on
// combinatorics.
template <typename EdgeLen, typename FaceArea>
Surface build_grid(int nx, int ny, double x0, double y0, double hx, double hy,
                   EdgeLen&& edge_length, FaceArea&& face_area) {
  Grid g{nx, ny};
  std::vector<Point2> vertices((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices[g.id(i, j)] = {x0 + i * hx, y0 + j * hy};
    }
  }
  std::vector<MeshEdge> edges(nx * (ny + 1) + (nx + 1) * ny);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const VertexId a = g.id(i, j);
      const VertexId b = g.id(i + 1, j);
      edges[g.horizontal(i, j)] = {a, b, edge_length(vertices[a], vertices[b])};
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const VertexId a = g.id(i, j);
      const VertexId b = g.id(i, j + 1);
      edges[g.vertical(i, j)] = {a, b, edge_length(vertices[a], vertices[b])};
    }
  }
  std::vector<MeshFace> faces;
  faces.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point2& lo = vertices[g.id(i, j)];
      const Point2& hi = vertices[g.id(i + 1, j + 1)];
      faces.push_back({{g.id(i, j), g.id(i + 1, j), g.id(i + 1, j + 1),
                        g.id(i, j + 1)},
                       face_area(lo, hi)});
    }
  }
  Surface s{MetricMesh(std::move(vertices), std::move(edges), std::move(faces)),
            grid_frame(g)};
  return s;
}

int cells(double extent, int n) {
  return std::max(1, static_cast<int>(std::lround(extent * n)));
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricMesh

MetricMesh::MetricMesh(std::vector<Point2> vertices,
                       std::vector<MeshEdge> edges, std::vector<MeshFace> faces)
    : vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      faces_(std::move(faces)) {
  const auto nv = static_cast<VertexId>(vertices_.size());
  if (nv == 0) throw InvalidInput("mesh has no vertices");
  std::vector<std::size_t> degree(nv, 0);
  min_positive_length_ = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const MeshEdge& ed = edges_[e];
    if (ed.a < 0 || ed.a >= nv || ed.b < 0 || ed.b >= nv || ed.a == ed.b) {
      throw InvalidInput("edge " + std::to_string(e) + ": bad endpoints");
    }
    if (!std::isfinite(ed.length) || ed.length < 0.0) {
      throw InvalidInput("edge " + std::to_string(e) +
                         ": length must be finite and >= 0, got " +
                         str(ed.length));
    }
    if (ed.length > 0.0) {
      min_positive_length_ = std::min(min_positive_length_, ed.length);
    }
    ++degree[ed.a];
    ++degree[ed.b];
  }
  if (!std::isfinite(min_positive_length_)) min_positive_length_ = 0.0;

  offsets_.assign(nv + 1, 0);
  for (VertexId v = 0; v < nv; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_[nv]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const MeshEdge& ed = edges_[e];
    adjacency_[fill[ed.a]++] = {ed.b, static_cast<EdgeId>(e)};
    adjacency_[fill[ed.b]++] = {ed.a, static_cast<EdgeId>(e)};
  }
  for (VertexId v = 0; v < nv; ++v) {
    std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1],
              [](const Incidence& l, const Incidence& r) {
                return l.neighbor < r.neighbor;
              });
    for (std::size_t k = offsets_[v] + 1; k < offsets_[v + 1]; ++k) {
      if (adjacency_[k].neighbor == adjacency_[k - 1].neighbor) {
        throw InvalidInput("duplicate edge between vertices " +
                           std::to_string(v) + " and " +
                           std::to_string(adjacency_[k].neighbor));
      }
    }
  }

  edge_area_.assign(edges_.size(), 0.0);
  edge_faces_.assign(edges_.size(), {kNoFace, kNoFace});
  face_offsets_.assign(faces_.size() + 1, 0);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const MeshFace& face = faces_[f];
    const std::size_t k = face.cycle.size();
    if (k < 3) throw InvalidInput("face " + std::to_string(f) + ": fewer than 3 vertices");
    if (!std::isfinite(face.area) || face.area < 0.0) {
      throw InvalidInput("face " + std::to_string(f) +
                         ": area must be finite and >= 0, got " + str(face.area));
    }
    for (std::size_t i = 0; i < k; ++i) {
      const VertexId a = face.cycle[i];
      const VertexId b = face.cycle[(i + 1) % k];
      if (a < 0 || a >= nv || b < 0 || b >= nv) {
        throw InvalidInput("face " + std::to_string(f) + ": vertex out of range");
      }
      const EdgeId e = find_edge(a, b);
      if (e < 0) {
        throw InvalidInput("face " + std::to_string(f) + ": no edge between " +
                           std::to_string(a) + " and " + std::to_string(b));
      }
      auto& side = edge_faces_[e];
      if (side.first == kNoFace) {
        side.first = static_cast<FaceId>(f);
      } else if (side.second == kNoFace) {
        side.second = static_cast<FaceId>(f);
      } else {
        throw InvalidInput("edge " + std::to_string(e) + " borders more than two faces");
      }
      edge_area_[e] += 2.0 * face.area / static_cast<double>(k);
      face_edges_.push_back(e);
    }
    face_offsets_[f + 1] = face_edges_.size();
  }

  // 1-skeleton must be connected.
  std::vector<char> seen(nv, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (const Incidence& inc : neighbors(v)) {
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        ++count;
        stack.push_back(inc.neighbor);
      }
    }
  }
  if (count != static_cast<std::size_t>(nv)) {
    throw InvalidInput("mesh 1-skeleton is not connected");
  }
}

std::span<const EdgeId> MetricMesh::face_edges(FaceId f) const {
  return {face_edges_.data() + face_offsets_[f],
          face_edges_.data() + face_offsets_[f + 1]};
}

EdgeId MetricMesh::find_edge(VertexId a, VertexId b) const {
  for (const Incidence& inc : neighbors(a)) {
    if (inc.neighbor == b) return inc.edge;
  }
  return -1;
}

double MetricMesh::dual_length(EdgeId e) const {
  const double len = edges_[e].length;
  if (len <= 0.0) return 0.0;
  const auto [f0, f1] = edge_faces_[e];
  double area = 0.0;
  if (f0 != kNoFace) area += faces_[f0].area;
  if (f1 != kNoFace) area += faces_[f1].area;
  return area / (2.0 * len);
}

double MetricMesh::total_area() const {
  double s = 0.0;
  for (const MeshFace& f : faces_) s += f.area;
  return s;
}

// ---------------------------------------------------------------------------
// Frames and families

void QuadFrame::validate(const MetricMesh& mesh,
                         const std::vector<char>& ambient) const {
  const auto nv = static_cast<VertexId>(mesh.num_vertices());
  auto inside = [&](VertexId v) { return ambient.empty() || ambient[v] != 0; };
  auto face_inside = [&](FaceId f) {
    if (f == kNoFace) return false;
    for (VertexId v : mesh.face(f).cycle) {
      if (!inside(v)) return false;
    }
    return true;
  };
  std::vector<char> boundary(mesh.num_edges(), 0);
  std::size_t boundary_count = 0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const MeshEdge& ed = mesh.edge(e);
    if (!inside(ed.a) || !inside(ed.b)) continue;
    const auto [f0, f1] = mesh.edge_faces(e);
    const int k = (face_inside(f0) ? 1 : 0) + (face_inside(f1) ? 1 : 0);
    if (k == 1) {
      boundary[e] = 1;
      ++boundary_count;
    }
  }

  std::vector<char> used(mesh.num_edges(), 0);
  std::size_t arc_edges = 0;
  for (int k = 0; k < 4; ++k) {
    const auto& arc = arcs[k];
    const std::string name = "zeta" + std::to_string(k + 1);
    if (arc.size() < 2) throw InvalidInput(name + ": needs at least 2 vertices");
    double length = 0.0;
    for (std::size_t i = 0; i < arc.size(); ++i) {
      if (arc[i] < 0 || arc[i] >= nv || !inside(arc[i])) {
        throw InvalidInput(name + ": vertex out of range");
      }
      if (i + 1 < arc.size()) {
        const EdgeId e = mesh.find_edge(arc[i], arc[i + 1]);
        if (e < 0 || !boundary[e]) {
          throw InvalidInput(name + ": consecutive vertices " +
                             std::to_string(arc[i]) + "," +
                             std::to_string(arc[i + 1]) +
                             " are not joined by a boundary edge");
        }
        if (used[e]) throw InvalidInput(name + ": boundary edge used twice");
        used[e] = 1;
        ++arc_edges;
        length += mesh.length(e);
      }
    }
    if (!(length > 0.0)) throw InvalidInput(name + ": zero total length");
    if (arc.back() != arcs[(k + 1) % 4].front()) {
      throw InvalidInput(name + " does not end where zeta" +
                         std::to_string((k + 1) % 4 + 1) + " starts");
    }
  }
  std::array<std::set<VertexId>, 4> sets;
  for (int k = 0; k < 4; ++k) {
    sets[k] = std::set<VertexId>(arcs[k].begin(), arcs[k].end());
    if (sets[k].size() != arcs[k].size()) {
      throw InvalidInput("zeta" + std::to_string(k + 1) + " repeats a vertex");
    }
  }
  for (int k = 0; k < 4; ++k) {
    for (int l = k + 1; l < 4; ++l) {
      std::vector<VertexId> common;
      std::set_intersection(sets[k].begin(), sets[k].end(), sets[l].begin(),
                            sets[l].end(), std::back_inserter(common));
      const bool consecutive = (l == k + 1) || (k == 0 && l == 3);
      const std::string pair = "zeta" + std::to_string(k + 1) + "/zeta" +
                               std::to_string(l + 1);
      if (consecutive && common.size() != 1) {
        throw InvalidInput(pair + " must share exactly one endpoint");
      }
      if (!consecutive && !common.empty()) {
        throw InvalidInput(pair + " overlap");
      }
    }
  }
  if (arc_edges != boundary_count) {
    throw InvalidInput("frame arcs do not cover the boundary cycle (" +
                       std::to_string(arc_edges) + " of " +
                       std::to_string(boundary_count) + " boundary edges)");
  }
}

void FamilySpec::validate(const MetricMesh& mesh) const {
  const auto nv = static_cast<VertexId>(mesh.num_vertices());
  if (source.empty() || sink.empty()) {
    throw InvalidInput("family " + label + ": empty source or sink");
  }
  if (!ambient.empty() && ambient.size() != mesh.num_vertices()) {
    throw InvalidInput("family " + label + ": ambient mask size mismatch");
  }
  std::vector<char> mark(nv, 0);
  for (VertexId v : source) {
    if (v < 0 || v >= nv) throw InvalidInput("family " + label + ": bad source vertex");
    mark[v] = 1;
  }
  for (VertexId v : sink) {
    if (v < 0 || v >= nv) throw InvalidInput("family " + label + ": bad sink vertex");
    if (mark[v]) throw InvalidInput("family " + label + ": source and sink overlap");
  }
}

FamilySpec gamma1(const QuadFrame& frame, std::vector<char> ambient) {
  return {frame.zeta(1), frame.zeta(3), std::move(ambient), "gamma1"};
}

FamilySpec gamma2(const QuadFrame& frame, std::vector<char> ambient) {
  return {frame.zeta(2), frame.zeta(4), std::move(ambient), "gamma2"};
}

// ---------------------------------------------------------------------------
// Builders

Surface build_rectangle(double width, double height, int n) {
  return build_conformal(width, height, n, [](double, double) { return 1.0; });
}

Surface build_conformal(double width, double height, int n,
                        const WeightField& weight) {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw InvalidInput("rectangle dimensions must be positive");
  }
  if (n < 2) throw InvalidInput("resolution n must be >= 2");
  const int nx = cells(width, n);
  const int ny = cells(height, n);
  const double hx = width / nx;
  const double hy = height / ny;
  auto sample = [&](double x, double y) {
    const double w = weight(x, y);
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidInput("conformal weight must be positive and finite; got " +
                         str(w) + " at (" + str(x) + ", " + str(y) + ")");
    }
    return w;
  };
  return build_grid(
      nx, ny, 0.0, 0.0, hx, hy,
      [&](const Point2& a, const Point2& b) {
        const double w = sample(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        return w * std::hypot(b.x - a.x, b.y - a.y);
      },
      [&](const Point2& lo, const Point2& hi) {
        const double w = sample(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
        return w * w * ((hi.x - lo.x) * (hi.y - lo.y));
      });
}

Surface build_collapsed_disk(double outer_half_width, int n,
                             double collapse_radius) {
  if (!(outer_half_width > 0.0)) {
    throw InvalidInput("outer half width must be positive");
  }
  if (n < 2) throw InvalidInput("resolution n must be >= 2");
  if (!(collapse_radius > 0.0)) {
    throw InvalidInput("collapse radius must be positive");
  }
  if (collapse_radius >= outer_half_width) {
    throw InvalidInput("collapse disk touches the boundary arcs");
  }
  const int cells_per_side = cells(2.0 * outer_half_width, n);
  const double h = 2.0 * outer_half_width / cells_per_side;
  const double r = collapse_radius;
  return build_grid(
      cells_per_side, cells_per_side, -outer_half_width, -outer_half_width, h, h,
      [&](const Point2& a, const Point2& b) { return length_outside_disk(a, b, r); },
      [&](const Point2& lo, const Point2& hi) {
        const double full = (hi.x - lo.x) * (hi.y - lo.y);
        return std::max(0.0, full - disk_rect_overlap(r, lo.x, hi.x, lo.y, hi.y));
      });
}

SubQuad box_quadrilateral(const MetricMesh& mesh, double x0, double x1,
                          double y0, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidInput("empty box");
  std::vector<double> xs;
  std::vector<double> ys;
  double scale = 0.0;
  for (const Point2& p : mesh.vertices()) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  }
  const double tol = 1e-9 * std::max(1.0, scale);
  auto snap = [&](std::vector<double>& vals, double target) {
    double best = vals.front();
    for (double v : vals) {
      if (std::abs(v - target) < std::abs(best - target) - tol) best = v;
    }
    return best;
  };
  const double X0 = snap(xs, x0);
  const double X1 = snap(xs, x1);
  const double Y0 = snap(ys, y0);
  const double Y1 = snap(ys, y1);
  if (!(X1 > X0 + tol) || !(Y1 > Y0 + tol)) {
    throw InvalidInput("box collapses to a line at this resolution");
  }
  SubQuad q;
  q.ambient.assign(mesh.num_vertices(), 0);
  struct Tagged {
    double key;
    VertexId v;
  };
  std::array<std::vector<Tagged>, 4> sides;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    const Point2& p = mesh.position(v);
    if (p.x < X0 - tol || p.x > X1 + tol || p.y < Y0 - tol || p.y > Y1 + tol) {
      continue;
    }
    q.ambient[v] = 1;
    if (std::abs(p.y - Y0) <= tol) sides[0].push_back({p.x, v});
    if (std::abs(p.x - X1) <= tol) sides[1].push_back({p.y, v});
    if (std::abs(p.y - Y1) <= tol) sides[2].push_back({-p.x, v});
    if (std::abs(p.x - X0) <= tol) sides[3].push_back({-p.y, v});
  }
  for (int k = 0; k < 4; ++k) {
    std::sort(sides[k].begin(), sides[k].end(),
              [](const Tagged& a, const Tagged& b) { return a.key < b.key; });
    for (const Tagged& t : sides[k]) q.frame.arcs[k].push_back(t.v);
  }
  q.frame.validate(mesh, q.ambient);
  return q;
}

// ---------------------------------------------------------------------------
// Topology

std::vector<int> component_labels(const MetricMesh& mesh,
                                  const std::function<bool(EdgeId)>& keep) {
  UnionFind uf(mesh.num_vertices());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (keep(static_cast<EdgeId>(e))) uf.unite(mesh.edge(e).a, mesh.edge(e).b);
  }
  std::vector<int> labels(mesh.num_vertices());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    labels[v] = static_cast<int>(uf.find(v));
  }
  return labels;
}

DualChains dual_chains(const MetricMesh& mesh, std::span<const EdgeId> edges) {
  DualChains out;
  if (edges.empty()) return out;
  std::vector<EdgeId> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t m = sorted.size();
  auto index_of = [&](EdgeId e) -> int {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), e);
    return (it != sorted.end() && *it == e) ? static_cast<int>(it - sorted.begin()) : -1;
  };
  std::vector<std::vector<int>> adj(m);
  std::set<FaceId> faces;
  for (EdgeId e : sorted) {
    const auto [f0, f1] = mesh.edge_faces(e);
    if (f0 != kNoFace) faces.insert(f0);
    if (f1 != kNoFace) faces.insert(f1);
  }
  for (FaceId f : faces) {
    std::vector<int> here;
    for (EdgeId e : mesh.face_edges(f)) {
      const int i = index_of(e);
      if (i >= 0) here.push_back(i);
    }
    if (here.size() > 2) out.simple = false;
    for (std::size_t a = 0; a < here.size(); ++a) {
      for (std::size_t b = a + 1; b < here.size(); ++b) {
        adj[here[a]].push_back(here[b]);
        adj[here[b]].push_back(here[a]);
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<int> comp(m, -1);
  int ncomp = 0;
  for (std::size_t s = 0; s < m; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = ncomp;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j : adj[i]) {
        if (comp[j] < 0) {
          comp[j] = ncomp;
          stack.push_back(j);
        }
      }
    }
    ++ncomp;
  }

  std::vector<char> visited(m, 0);
  for (int c = 0; c < ncomp; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < m; ++i) {
      if (comp[i] == c) members.push_back(static_cast<int>(i));
    }
    // Prefer starting at a chain end (a dual path meets the boundary there).
    int start = members.front();
    for (int i : members) {
      if (adj[i].size() <= 1) {
        start = i;
        break;
      }
    }
    std::vector<EdgeId> chain;
    int cur = start;
    while (cur >= 0) {
      visited[cur] = 1;
      chain.push_back(sorted[cur]);
      int next = -1;
      for (int j : adj[cur]) {
        if (!visited[j]) {
          next = j;
          break;
        }
      }
      cur = next;
    }
    if (chain.size() != members.size()) {
      out.simple = false;
      for (int i : members) {
        if (!visited[i]) {
          visited[i] = 1;
          chain.push_back(sorted[i]);
        }
      }
    }
    for (int i : members) {
      if (adj[i].size() > 2) out.simple = false;
    }
    out.chains.push_back(std::move(chain));
  }
  return out;
}

namespace {

// Dinic max-flow on an integer-capacity graph.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1), level_(n), it_(n) {}

  void add_arc(int u, int v, long long cap_uv, long long cap_vu) {
    arcs_.push_back({v, head_[u], cap_uv});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], cap_vu});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      it_ = head_;
      while (long long pushed = dfs(s, t, std::numeric_limits<long long>::max())) {
        flow += pushed;
      }
    }
    return flow;
  }

  /// Vertices reachable from s in the residual graph.
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
          seen[arcs_[a].to] = 1;
          stack.push_back(arcs_[a].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    int next;
    long long cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  long long dfs(int u, int t, long long limit) {
    if (u == t) return limit;
    for (int& a = it_[u]; a >= 0; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap > 0 && level_[arc.to] == level_[u] + 1) {
        const long long got = dfs(arc.to, t, std::min(limit, arc.cap));
        if (got > 0) {
          arc.cap -= got;
          arcs_[a ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0;
  }

  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
  std::vector<Arc> arcs_;
};

}  // namespace

SeparatingCut separating_cut(const MetricMesh& mesh,
                             std::span<const VertexId> side_a,
                             std::span<const VertexId> side_b,
                             const std::function<bool(EdgeId)>& forbidden) {
  const int nv = static_cast<int>(mesh.num_vertices());
  if (side_a.empty() || side_b.empty()) throw InvalidInput("empty side");
  std::vector<char> in_a(nv, 0);
  for (VertexId v : side_a) {
    if (v < 0 || v >= nv) throw InvalidInput("side vertex out of range");
    in_a[v] = 1;
  }
  for (VertexId v : side_b) {
    if (v < 0 || v >= nv) throw InvalidInput("side vertex out of range");
    if (in_a[v]) throw InvalidInput("sides are not disjoint");
  }
  std::vector<char> is_forbidden(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    is_forbidden[e] = forbidden(static_cast<EdgeId>(e)) ? 1 : 0;
  }
  // Removing the forbidden edges must disconnect the sides.
  const auto labels = component_labels(mesh, [&](EdgeId e) { return !is_forbidden[e]; });
  std::vector<char> a_label(nv, 0);
  for (VertexId v : side_a) a_label[labels[v]] = 1;
  for (VertexId v : side_b) {
    if (a_label[labels[v]]) throw InvalidInput("no separating cut");
  }

  const long long big = static_cast<long long>(mesh.num_edges()) + 1;
  MaxFlow flow(nv + 2);
  const int s = nv;
  const int t = nv + 1;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const long long cap = is_forbidden[e] ? 1 : big;
    flow.add_arc(mesh.edge(e).a, mesh.edge(e).b, cap, cap);
  }
  for (VertexId v : side_a) flow.add_arc(s, v, big, 0);
  for (VertexId v : side_b) flow.add_arc(v, t, big, 0);
  flow.run(s, t);
  const auto reach = flow.source_side(s);

  SeparatingCut cut;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const MeshEdge& ed = mesh.edge(e);
    if (reach[ed.a] != reach[ed.b]) cut.edges.push_back(static_cast<EdgeId>(e));
  }
  auto chains = dual_chains(mesh, cut.edges);
  cut.dual_paths = std::move(chains.chains);
  cut.simple = chains.simple;
  return cut;
}

std::vector<VertexId> ball(const MetricMesh& mesh, VertexId center, double r) {
  if (r < 0.0) throw InvalidInput("ball radius must be >= 0");
  if (center < 0 || center >= static_cast<VertexId>(mesh.num_vertices())) {
    throw InvalidInput("ball center out of range");
  }
  const auto weights = length_weights(mesh);
  const VertexId src[] = {center};
  const PathTree tree = shortest_paths(mesh, src, weights);
  const double limit = r + 1e-12 * std::max(1.0, r);
  std::vector<VertexId> out;
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (tree.dist[v] <= limit) out.push_back(v);
  }
  return out;
}

std::vector<double> edge_areas_within(const MetricMesh& mesh,
                                      const std::vector<char>& ambient) {
  if (ambient.empty()) return mesh.edge_areas();
  if (ambient.size() != mesh.num_vertices()) throw InvalidInput("ambient mask size mismatch");
  std::vector<double> area(mesh.num_edges(), 0.0);
  for (FaceId f = 0; f < static_cast<FaceId>(mesh.num_faces()); ++f) {
    const auto& face = mesh.face(f);
    if (!std::all_of(face.cycle.begin(), face.cycle.end(),
                     [&](VertexId v) { return ambient[v] != 0; })) {
      continue;
    }
    const double share = 2.0 * face.area / static_cast<double>(face.cycle.size());
    for (EdgeId e : mesh.face_edges(f)) area[e] += share;
  }
  return area;
}

}  // namespace recipmod
