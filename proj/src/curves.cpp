#include "recipmod/curves.hpp"

#include <algorithm>
#include <set>

#include "recipmod/shortest_path.hpp"

namespace recipmod {

namespace {

std::vector<char> edge_mask(const MetricMesh& mesh, std::span<const EdgeId> edges) {
  std::vector<char> mask(mesh.num_edges(), 0);
  for (EdgeId e : edges) {
    if (e < 0 || e >= static_cast<EdgeId>(mesh.num_edges())) {
      throw InvalidInput("subgraph edge out of range");
    }
    mask[e] = 1;
  }
  return mask;
}

bool touches(const MetricMesh& mesh, const std::vector<char>& mask, VertexId v) {
  for (const auto& inc : mesh.neighbors(v)) {
    if (mask[inc.edge]) return true;
  }
  return false;
}

}  // namespace

double total_length(const MetricMesh& mesh, std::span<const EdgeId> edges) {
  double s = 0.0;
  for (EdgeId e : edges) s += mesh.length(e);
  return s;
}

CurvePath make_curve(const MetricMesh& mesh, std::vector<VertexId> vertices,
                     std::vector<EdgeId> edges) {
  if (vertices.size() != edges.size() + 1) throw InvalidInput("walk size mismatch");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& ed = mesh.edge(edges[i]);
    const bool fwd = ed.a == vertices[i] && ed.b == vertices[i + 1];
    const bool bwd = ed.b == vertices[i] && ed.a == vertices[i + 1];
    if (!fwd && !bwd) throw InvalidInput("walk edge does not join its vertices");
  }
  CurvePath c;
  c.length = total_length(mesh, edges);
  std::set<VertexId> seen(vertices.begin(), vertices.end());
  c.injective = seen.size() == vertices.size();
  c.vertices = std::move(vertices);
  c.edges = std::move(edges);
  return c;
}

std::map<EdgeId, int> edge_multiplicity(const CurvePath& path) {
  std::map<EdgeId, int> m;
  for (EdgeId e : path.edges) ++m[e];
  return m;
}

CurvePath extract_path(const MetricMesh& mesh, std::span<const EdgeId> subgraph,
                       VertexId x, VertexId y) {
  const auto nv = static_cast<VertexId>(mesh.num_vertices());
  if (x < 0 || x >= nv || y < 0 || y >= nv) throw InvalidInput("vertex out of range");
  if (x == y) return make_curve(mesh, {x}, {});
  const auto mask = edge_mask(mesh, subgraph);
  SearchScope scope;
  scope.allowed_edges = &mask;
  const VertexId src[] = {x};
  const auto tree = shortest_paths(mesh, src, length_weights(mesh), scope);
  if (!tree.reached(y)) throw InvalidInput("not connected");
  return make_curve(mesh, tree.vertices_to(mesh, y), tree.edges_to(mesh, y));
}

CurvePath double_traversal(const MetricMesh& mesh, std::span<const EdgeId> subgraph,
                           VertexId x, VertexId y) {
  const auto nv = static_cast<VertexId>(mesh.num_vertices());
  if (x < 0 || x >= nv || y < 0 || y >= nv) throw InvalidInput("vertex out of range");
  const auto mask = edge_mask(mesh, subgraph);
  if (subgraph.empty()) {
    if (x != y) throw InvalidInput("disconnected subgraph");
    return make_curve(mesh, {x}, {});
  }
  if (!touches(mesh, mask, x) || !touches(mesh, mask, y)) {
    throw InvalidInput("endpoint outside the subgraph");
  }
  const auto weights = length_weights(mesh);
  SearchScope scope;
  scope.allowed_edges = &mask;
  {
    const VertexId src[] = {x};
    const auto tree = shortest_paths(mesh, src, weights, scope);
    for (EdgeId e : subgraph) {
      if (!tree.reached(mesh.edge(e).a)) throw InvalidInput("disconnected subgraph");
    }
  }

  // Start from the geodesic x -> y.
  const CurvePath base = extract_path(mesh, subgraph, x, y);
  std::vector<VertexId> walk_v = base.vertices;
  std::vector<EdgeId> walk_e = base.edges;
  std::vector<char> visited(nv, 0), covered(mesh.num_edges(), 0);
  for (VertexId v : walk_v) visited[v] = 1;
  for (EdgeId e : walk_e) covered[e] = 1;

  // Inserts an out-and-back detour at the first visit of its start vertex.
  auto splice = [&](const std::vector<VertexId>& dv, const std::vector<EdgeId>& de) {
    const auto at = std::find(walk_v.begin(), walk_v.end(), dv.front()) - walk_v.begin();
    std::vector<VertexId> ins_v;
    std::vector<EdgeId> ins_e;
    for (std::size_t i = 1; i < dv.size(); ++i) ins_v.push_back(dv[i]);
    for (std::size_t i = dv.size() - 1; i-- > 0;) ins_v.push_back(dv[i]);
    ins_e = de;
    ins_e.insert(ins_e.end(), de.rbegin(), de.rend());
    walk_v.insert(walk_v.begin() + at + 1, ins_v.begin(), ins_v.end());
    walk_e.insert(walk_e.begin() + at, ins_e.begin(), ins_e.end());
    for (VertexId v : dv) visited[v] = 1;
    for (EdgeId e : de) covered[e] = 1;
  };

  // Detours to the farthest unvisited vertex, measured in the subgraph from
  // the part already traversed.
  for (;;) {
    std::vector<VertexId> sources;
    for (VertexId v = 0; v < nv; ++v) {
      if (visited[v]) sources.push_back(v);
    }
    const auto tree = shortest_paths(mesh, sources, weights, scope);
    VertexId far = -1;
    for (VertexId v = 0; v < nv; ++v) {
      if (visited[v] || !tree.reached(v)) continue;
      if (far < 0 || tree.dist[v] > tree.dist[far]) far = v;
    }
    if (far < 0) break;
    splice(tree.vertices_to(mesh, far), tree.edges_to(mesh, far));
  }

  // Remaining edges join visited vertices: traverse each there and back.
  for (EdgeId e : subgraph) {
    if (covered[e]) continue;
    const auto& ed = mesh.edge(e);
    splice({ed.a, ed.b}, {e});
  }
  return make_curve(mesh, std::move(walk_v), std::move(walk_e));
}

}  // namespace recipmod
