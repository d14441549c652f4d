#include "electrical_flow.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace recipmod::detail {

namespace {

VertexId find_root(std::vector<VertexId>& parent, VertexId v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

// Spanning forest of the zero-length edges, used to route a path across a
// contracted cluster.
struct ClusterForest {
  std::vector<EdgeId> up;  // edge to parent, -1 at roots
  std::vector<int> depth;

  // Edge sequence walking from u to w inside their common cluster.
  std::vector<EdgeId> route(const MetricMesh& mesh, VertexId u, VertexId w) const {
    std::vector<EdgeId> head, tail;
    while (u != w) {
      if (depth[u] >= depth[w]) {
        head.push_back(up[u]);
        u = mesh.other(up[u], u);
      } else {
        tail.push_back(up[w]);
        w = mesh.other(up[w], w);
      }
    }
    head.insert(head.end(), tail.rbegin(), tail.rend());
    return head;
  }
};

}  // namespace

PathFlow electrical_path_flow(const MetricMesh& mesh, const FamilySpec& family,
                              const std::vector<double>& area) {
  const auto nv = static_cast<VertexId>(mesh.num_vertices());
  const auto ne = static_cast<EdgeId>(mesh.num_edges());
  auto in_scope = [&](VertexId v) { return family.allows(v); };
  auto edge_in_scope = [&](EdgeId e) {
    return in_scope(mesh.edge(e).a) && in_scope(mesh.edge(e).b);
  };

  // Contract zero-length edges.
  std::vector<VertexId> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  for (EdgeId e = 0; e < ne; ++e) {
    if (mesh.length(e) == 0.0 && edge_in_scope(e)) {
      const VertexId ra = find_root(parent, mesh.edge(e).a);
      const VertexId rb = find_root(parent, mesh.edge(e).b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<int> node_of(nv, -1);
  std::vector<VertexId> node_root;
  for (VertexId v = 0; v < nv; ++v) {
    if (!in_scope(v)) continue;
    const VertexId r = find_root(parent, v);
    if (node_of[r] < 0) {
      node_of[r] = static_cast<int>(node_root.size());
      node_root.push_back(r);
    }
    node_of[v] = node_of[r];
  }
  const int nn = static_cast<int>(node_root.size());

  ClusterForest forest{std::vector<EdgeId>(nv, -1), std::vector<int>(nv, 0)};
  {
    std::vector<char> seen(nv, 0);
    std::vector<VertexId> queue;
    for (VertexId r : node_root) {
      seen[r] = 1;
      queue.assign(1, r);
      for (std::size_t i = 0; i < queue.size(); ++i) {
        const VertexId v = queue[i];
        for (const auto& inc : mesh.neighbors(v)) {
          if (seen[inc.neighbor] || mesh.length(inc.edge) != 0.0 || !in_scope(inc.neighbor)) {
            continue;
          }
          seen[inc.neighbor] = 1;
          forest.up[inc.neighbor] = inc.edge;
          forest.depth[inc.neighbor] = forest.depth[v] + 1;
          queue.push_back(inc.neighbor);
        }
      }
    }
  }

  // 0: free, 1: source, 2: sink. Representative terminal vertex per node.
  std::vector<int> kind(nn, 0);
  std::vector<VertexId> terminal_vertex(nn, -1);
  for (VertexId v : family.source) {
    if (node_of[v] < 0) continue;
    kind[node_of[v]] = 1;
    if (terminal_vertex[node_of[v]] < 0 || v < terminal_vertex[node_of[v]]) {
      terminal_vertex[node_of[v]] = v;
    }
  }
  for (VertexId v : family.sink) {
    if (node_of[v] < 0) continue;
    if (kind[node_of[v]] == 1) return {};  // zero-length source-sink curve
    kind[node_of[v]] = 2;
    if (terminal_vertex[node_of[v]] < 0 || v < terminal_vertex[node_of[v]]) {
      terminal_vertex[node_of[v]] = v;
    }
  }

  std::vector<EdgeId> conductive;
  for (EdgeId e = 0; e < ne; ++e) {
    if (mesh.length(e) > 0.0 && area[e] > 0.0 && edge_in_scope(e) &&
        node_of[mesh.edge(e).a] != node_of[mesh.edge(e).b]) {
      conductive.push_back(e);
    }
  }
  auto conductance = [&](EdgeId e) {
    return 2.0 * area[e] / (mesh.length(e) * mesh.length(e));
  };

  // Only node components that see both terminals carry current.
  std::vector<int> comp(nn);
  std::iota(comp.begin(), comp.end(), 0);
  for (EdgeId e : conductive) {
    const int a = find_root(comp, node_of[mesh.edge(e).a]);
    const int b = find_root(comp, node_of[mesh.edge(e).b]);
    if (a != b) comp[std::max(a, b)] = std::min(a, b);
  }
  std::vector<char> has_source(nn, 0), has_sink(nn, 0);
  for (int i = 0; i < nn; ++i) {
    if (kind[i] == 1) has_source[find_root(comp, i)] = 1;
    if (kind[i] == 2) has_sink[find_root(comp, i)] = 1;
  }
  std::vector<char> live(nn, 0);
  for (int i = 0; i < nn; ++i) {
    const int c = find_root(comp, i);
    live[i] = has_source[c] && has_sink[c];
  }

  std::vector<double> phi(nn, 0.0);
  std::vector<int> unknown(nn, -1);
  int nu = 0;
  for (int i = 0; i < nn; ++i) {
    if (kind[i] == 2) phi[i] = 1.0;
    if (live[i] && kind[i] == 0) unknown[i] = nu++;
  }
  if (nu > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (EdgeId e : conductive) {
      const int a = node_of[mesh.edge(e).a];
      const int b = node_of[mesh.edge(e).b];
      if (!live[a]) continue;
      const double c = conductance(e);
      const int ua = unknown[a], ub = unknown[b];
      if (ua >= 0) trips.emplace_back(ua, ua, c);
      if (ub >= 0) trips.emplace_back(ub, ub, c);
      if (ua >= 0 && ub >= 0) {
        trips.emplace_back(ua, ub, -c);
        trips.emplace_back(ub, ua, -c);
      } else if (ua >= 0) {
        rhs[ua] += c * phi[b];
      } else if (ub >= 0) {
        rhs[ub] += c * phi[a];
      }
    }
    Eigen::SparseMatrix<double> lap(nu, nu);
    lap.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) return {};
    const Eigen::VectorXd x = solver.solve(rhs);
    for (int i = 0; i < nn; ++i) {
      if (unknown[i] >= 0) phi[i] = x[unknown[i]];
    }
  }

  // Directed flow, low to high potential.
  struct Arc {
    EdgeId edge;
    int to;
    double residual;
  };
  std::vector<std::vector<Arc>> out(nn);
  double max_flow = 0.0;
  for (EdgeId e : conductive) {
    int a = node_of[mesh.edge(e).a];
    int b = node_of[mesh.edge(e).b];
    if (!live[a]) continue;
    double d = phi[b] - phi[a];
    if (d < 0.0) {
      std::swap(a, b);
      d = -d;
    }
    if (d <= 0.0 || kind[a] == 2) continue;
    const double f = conductance(e) * d;
    out[a].push_back({e, b, f});
    max_flow = std::max(max_flow, f);
  }
  const double drop = 1e-13 * max_flow;

  PathFlow result;
  std::vector<std::pair<int, int>> walk;  // (node, arc index)
  for (int s = 0; s < nn; ++s) {
    if (kind[s] != 1) continue;
    for (;;) {
      walk.clear();
      int cur = s;
      bool stuck = false;
      while (kind[cur] != 2) {
        int best = -1;
        for (int k = 0; k < static_cast<int>(out[cur].size()); ++k) {
          if (out[cur][k].residual > drop &&
              (best < 0 || out[cur][k].residual > out[cur][best].residual)) {
            best = k;
          }
        }
        if (best < 0) {
          stuck = true;
          break;
        }
        walk.emplace_back(cur, best);
        cur = out[cur][best].to;
      }
      if (walk.empty()) break;  // source exhausted
      if (stuck) {
        // Conservation defect at the level of round-off: discard the arc.
        out[walk.back().first][walk.back().second].residual = 0.0;
        continue;
      }
      double amount = std::numeric_limits<double>::infinity();
      for (const auto& [node, k] : walk) amount = std::min(amount, out[node][k].residual);
      std::vector<EdgeId> edges;
      VertexId at = terminal_vertex[s];
      for (const auto& [node, k] : walk) {
        const EdgeId e = out[node][k].edge;
        const VertexId entry = node_of[mesh.edge(e).a] == node ? mesh.edge(e).a : mesh.edge(e).b;
        const auto hop = forest.route(mesh, at, entry);
        edges.insert(edges.end(), hop.begin(), hop.end());
        edges.push_back(e);
        at = mesh.other(e, entry);
        out[node][k].residual -= amount;
      }
      const auto hop = forest.route(mesh, at, terminal_vertex[cur]);
      edges.insert(edges.end(), hop.begin(), hop.end());
      result.paths.push_back(std::move(edges));
      result.amounts.push_back(amount);
    }
  }
  return result;
}

}  // namespace recipmod::detail
