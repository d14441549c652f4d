#include "recipmod/shortest_path.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace recipmod {

std::vector<EdgeId> PathTree::edges_to(const MetricMesh& mesh,
                                       VertexId v) const {
  std::vector<EdgeId> out;
  VertexId cur = v;
  while (pred[cur] >= 0) {
    out.push_back(pred[cur]);
    cur = mesh.other(pred[cur], cur);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<VertexId> PathTree::vertices_to(const MetricMesh& mesh,
                                            VertexId v) const {
  std::vector<VertexId> out{v};
  VertexId cur = v;
  while (pred[cur] >= 0) {
    cur = mesh.other(pred[cur], cur);
    out.push_back(cur);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

PathTree shortest_paths(const MetricMesh& mesh,
                        std::span<const VertexId> sources,
                        std::span<const double> weights, SearchScope scope) {
  const std::size_t nv = mesh.num_vertices();
  PathTree tree;
  tree.dist.assign(nv, kInf);
  tree.hops.assign(nv, 0);
  tree.pred.assign(nv, -1);
  std::vector<VertexId> pred_vertex(nv, -1);
  std::vector<char> done(nv, 0);

  using Key = std::tuple<double, int, VertexId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  auto inside = [&](VertexId v) {
    return scope.ambient == nullptr || scope.ambient->empty() ||
           (*scope.ambient)[v] != 0;
  };
  for (VertexId s : sources) {
    if (!inside(s) || tree.dist[s] == 0.0) continue;
    tree.dist[s] = 0.0;
    heap.emplace(0.0, 0, s);
  }
  while (!heap.empty()) {
    auto [d, h, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    if (scope.terminal != nullptr && !scope.terminal->empty() &&
        (*scope.terminal)[v] && h > 0) {
      continue;
    }
    for (const Incidence& inc : mesh.neighbors(v)) {
      const VertexId w = inc.neighbor;
      if (done[w] || !inside(w)) continue;
      if (scope.allowed_edges != nullptr && !scope.allowed_edges->empty() &&
          !(*scope.allowed_edges)[inc.edge]) {
        continue;
      }
      const double wt = weights[inc.edge];
      if (!(wt < kInf)) continue;
      const double nd = d + wt;
      const int nh = h + 1;
      bool better = nd < tree.dist[w];
      if (!better && nd == tree.dist[w]) {
        better = nh < tree.hops[w] ||
                 (nh == tree.hops[w] && v < pred_vertex[w]);
      }
      if (better) {
        tree.dist[w] = nd;
        tree.hops[w] = nh;
        tree.pred[w] = inc.edge;
        pred_vertex[w] = v;
        heap.emplace(nd, nh, w);
      }
    }
  }
  return tree;
}

std::vector<double> length_weights(const MetricMesh& mesh) {
  std::vector<double> w(mesh.num_edges());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = mesh.length(e);
  return w;
}

}  // namespace recipmod
