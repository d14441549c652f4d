#pragma once

#include <limits>
#include <span>
#include <vector>

#include "recipmod/surface.hpp"

namespace recipmod {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Multi-source shortest-path tree over nonnegative edge weights.
/// Ties are broken by fewer edges, then by the smaller predecessor vertex id,
/// so trees are reproducible run to run.
struct PathTree {
  std::vector<double> dist;
  std::vector<int> hops;
  std::vector<EdgeId> pred;  // -1 at sources and unreached vertices

  bool reached(VertexId v) const { return dist[v] < kInf; }
  /// Edge sequence from the tree root to v.
  std::vector<EdgeId> edges_to(const MetricMesh& mesh, VertexId v) const;
  std::vector<VertexId> vertices_to(const MetricMesh& mesh, VertexId v) const;
};

struct SearchScope {
  const std::vector<char>* ambient = nullptr;        // per-vertex mask
  const std::vector<char>* allowed_edges = nullptr;  // per-edge mask
  const std::vector<char>* terminal = nullptr;       // reached, never expanded
};

PathTree shortest_paths(const MetricMesh& mesh,
                        std::span<const VertexId> sources,
                        std::span<const double> weights,
                        SearchScope scope = {});

/// Edge weights equal to edge lengths.
std::vector<double> length_weights(const MetricMesh& mesh);

}  // namespace recipmod
