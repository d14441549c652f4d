#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace recipmod {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using FaceId = std::int32_t;

inline constexpr FaceId kNoFace = -1;

/// Raised when an input violates a documented precondition or invariant.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct MeshEdge {
  VertexId a = 0;
  VertexId b = 0;
  double length = 0.0;  // H^1 units
};

struct MeshFace {
  std::vector<VertexId> cycle;
  double area = 0.0;  // H^2 units
};

struct Incidence {
  VertexId neighbor;
  EdgeId edge;
};

/// Mesh model of a metric surface. Paths live on the 1-skeleton; faces only
/// carry area. Immutable after construction.
///
/// Two per-edge area weights are derived from the faces:
///   edge_area(e)  = sum over adjacent faces f of 2*area(f)/|f|, i.e. half of
///                   each adjacent quad. Quadrature weight for densities:
///                   int rho^2 dH^2 ~ sum_e rho(e)^2 edge_area(e). Each edge
///                   orientation class of a quad mesh carries the full area,
///                   so the total is twice the surface area.
///   cell_share(e) = edge_area(e)/2. Quadrature weight for scalar functions;
///                   sums exactly to the total face area.
class MetricMesh {
 public:
  MetricMesh() = default;
  MetricMesh(std::vector<Point2> vertices, std::vector<MeshEdge> edges,
             std::vector<MeshFace> faces);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  const Point2& position(VertexId v) const { return vertices_[v]; }
  const MeshEdge& edge(EdgeId e) const { return edges_[e]; }
  const MeshFace& face(FaceId f) const { return faces_[f]; }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  const std::vector<MeshFace>& faces() const { return faces_; }

  double length(EdgeId e) const { return edges_[e].length; }
  double edge_area(EdgeId e) const { return edge_area_[e]; }
  double cell_share(EdgeId e) const { return 0.5 * edge_area_[e]; }
  const std::vector<double>& edge_areas() const { return edge_area_; }

  /// Faces on either side of an edge; kNoFace on the boundary side.
  std::pair<FaceId, FaceId> edge_faces(EdgeId e) const { return edge_faces_[e]; }
  bool is_boundary_edge(EdgeId e) const {
    return edge_faces_[e].second == kNoFace;
  }
  /// Edges of face f in cycle order.
  std::span<const EdgeId> face_edges(FaceId f) const;

  std::span<const Incidence> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  /// Edge joining a and b, or -1.
  EdgeId find_edge(VertexId a, VertexId b) const;

  VertexId other(EdgeId e, VertexId v) const {
    return edges_[e].a == v ? edges_[e].b : edges_[e].a;
  }

  /// Dual-edge length: (area of left face + area of right face) / (2 length),
  /// boundary faces counted once, 0 for zero-length edges.
  double dual_length(EdgeId e) const;

  double total_area() const;
  double min_positive_length() const { return min_positive_length_; }

 private:
  std::vector<Point2> vertices_;
  std::vector<MeshEdge> edges_;
  std::vector<MeshFace> faces_;
  std::vector<double> edge_area_;
  std::vector<std::pair<FaceId, FaceId>> edge_faces_;
  std::vector<EdgeId> face_edges_;
  std::vector<std::size_t> face_offsets_;
  std::vector<Incidence> adjacency_;
  std::vector<std::size_t> offsets_;
  double min_positive_length_ = 0.0;
};

/// The four boundary arcs zeta1..zeta4 of a quadrilateral, in cyclic order.
struct QuadFrame {
  std::array<std::vector<VertexId>, 4> arcs;

  const std::vector<VertexId>& zeta(int k) const { return arcs[k - 1]; }

  /// Checks the frame against the boundary of the sub-complex spanned by
  /// `ambient` (the whole mesh when empty). Throws InvalidInput.
  void validate(const MetricMesh& mesh,
                const std::vector<char>& ambient = {}) const;
};

/// A curve family Gamma(E, F; G): paths inside `ambient` from a vertex of
/// `source` to a vertex of `sink`.
struct FamilySpec {
  std::vector<VertexId> source;
  std::vector<VertexId> sink;
  std::vector<char> ambient;  // per vertex; empty means every vertex
  std::string label;

  bool allows(VertexId v) const { return ambient.empty() || ambient[v] != 0; }
  void validate(const MetricMesh& mesh) const;
};

/// Gamma_1(Q) joins zeta1 and zeta3; Gamma_2(Q) joins zeta2 and zeta4.
FamilySpec gamma1(const QuadFrame& frame, std::vector<char> ambient = {});
FamilySpec gamma2(const QuadFrame& frame, std::vector<char> ambient = {});

struct Surface {
  MetricMesh mesh;
  QuadFrame frame;
};

/// Positive conformal weight on the reference plane.
using WeightField = std::function<double(double, double)>;

Surface build_rectangle(double width, double height, int n);
Surface build_conformal(double width, double height, int n,
                        const WeightField& weight);
/// Square [-h, h]^2 in which the closed disk of radius `collapse_radius`
/// about the origin is collapsed to a point at mesh scale.
Surface build_collapsed_disk(double outer_half_width, int n,
                             double collapse_radius);

/// Axis-aligned sub-quadrilateral of a grid-built surface, given by a box in
/// reference coordinates. Box sides are snapped to the nearest vertex lines.
struct SubQuad {
  QuadFrame frame;
  std::vector<char> ambient;
};
SubQuad box_quadrilateral(const MetricMesh& mesh, double x0, double x1,
                          double y0, double y1);

struct SeparatingCut {
  std::vector<EdgeId> edges;  // minimal edge cut
  /// Cut edges ordered along dual paths/cycles, one entry per component.
  std::vector<std::vector<EdgeId>> dual_paths;
  bool simple = true;
};

/// Groups edges into dual components (edges sharing a face are adjacent) and
/// orders each component along its dual path. `simple` is false when some
/// face carries more than two edges of a component or a chain branches.
struct DualChains {
  std::vector<std::vector<EdgeId>> chains;
  bool simple = true;
};
DualChains dual_chains(const MetricMesh& mesh, std::span<const EdgeId> edges);

/// Minimum-cardinality cut made of `forbidden` edges that separates side_a
/// from side_b (max-flow / min-cut on the edge graph).
SeparatingCut separating_cut(const MetricMesh& mesh,
                             std::span<const VertexId> side_a,
                             std::span<const VertexId> side_b,
                             const std::function<bool(EdgeId)>& forbidden);

/// edge_area counting only faces whose vertices all lie in `ambient` (the
/// plain edge areas when `ambient` is empty). Area weights of a
/// sub-quadrilateral or ring domain.
std::vector<double> edge_areas_within(const MetricMesh& mesh,
                                      const std::vector<char>& ambient);

/// Vertices at shortest-path distance (edge lengths) <= r from center.
std::vector<VertexId> ball(const MetricMesh& mesh, VertexId center, double r);

/// Connected components of the graph restricted to edges where keep(e).
std::vector<int> component_labels(const MetricMesh& mesh,
                                  const std::function<bool(EdgeId)>& keep);

}  // namespace recipmod
