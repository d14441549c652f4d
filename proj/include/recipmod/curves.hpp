#pragma once

#include <map>
#include <span>
#include <vector>

#include "recipmod/surface.hpp"

namespace recipmod {

/// A walk on the 1-skeleton: vertices[i] and vertices[i+1] are joined by
/// edges[i].
struct CurvePath {
  std::vector<VertexId> vertices;
  std::vector<EdgeId> edges;
  double length = 0.0;
  bool injective = true;  // no repeated vertex
};

/// Injective shortest path from x to y using only subgraph edges.
/// Throws InvalidInput("not connected") when y cannot be reached.
CurvePath extract_path(const MetricMesh& mesh, std::span<const EdgeId> subgraph,
                       VertexId x, VertexId y);

/// Walk from x to y traversing every subgraph edge: the x-y geodesic once,
/// every other edge exactly twice, so the length is at most twice the total
/// subgraph length. Throws InvalidInput for a disconnected subgraph.
CurvePath double_traversal(const MetricMesh& mesh, std::span<const EdgeId> subgraph,
                           VertexId x, VertexId y);

/// Number of times each edge occurs in the walk.
std::map<EdgeId, int> edge_multiplicity(const CurvePath& path);

/// Sum of edge lengths.
double total_length(const MetricMesh& mesh, std::span<const EdgeId> edges);

/// Validates a walk (consecutive vertices joined by the listed edges) and
/// recomputes its length and injectivity flag.
CurvePath make_curve(const MetricMesh& mesh, std::vector<VertexId> vertices,
                     std::vector<EdgeId> edges);

}  // namespace recipmod
