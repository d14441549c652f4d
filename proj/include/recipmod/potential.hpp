#pragma once

#include <array>
#include <span>
#include <vector>

#include "recipmod/modulus.hpp"
#include "recipmod/surface.hpp"

namespace recipmod {

/// u(v) = min(1, rho-distance from zeta1), the discrete counterpart of the
/// infimum over curves joining zeta1 to v.
struct PotentialField {
  std::vector<double> u;
  Density density;
  std::vector<char> ambient;  // empty: whole mesh

  double operator[](VertexId v) const { return u[v]; }
};

PotentialField build_potential(const MetricMesh& mesh, const QuadFrame& frame,
                               const Density& density,
                               std::vector<char> ambient = {});

/// Edges e = (a, b) inside the field's ambient set with u(b) > u(a) + w or
/// u(a) > u(b) + w, where w = rho(e) length(e).
std::vector<EdgeId> upper_gradient_violations(const MetricMesh& mesh,
                                              const PotentialField& field);

/// Smallest t' >= t that differs from every vertex value, stepping by 1e-12.
double generic_level(std::span<const double> values, double t);

/// Edges with min(u(a), u(b)) < t <= max(u(a), u(b)).
std::vector<EdgeId> crossed_edges(const MetricMesh& mesh,
                                  std::span<const double> values, double t,
                                  const std::vector<char>& ambient = {});

/// g-weighted metric length of the level set {values = t}: inside each face
/// the level is traced as straight segments between the interpolated
/// crossing points of its crossed edges, measured in reference coordinates
/// and scaled by sqrt(area / reference area) of the face. A segment carries
/// the mean g of its two edges; empty g means g = 1. Faces leaving
/// `ambient` are skipped.
double level_length(const MetricMesh& mesh, std::span<const double> values, double t,
                    std::span<const double> g = {},
                    const std::vector<char>& ambient = {});

struct LevelComponent {
  std::vector<EdgeId> edges;       // ordered along the dual path
  std::array<bool, 4> meets{};     // meets zeta1..zeta4
  double length_estimate = 0.0;

  bool spans_2_4() const { return meets[1] && meets[3]; }
};

struct LevelCurve {
  double level = 0.0;  // after the generic-level nudge
  std::vector<EdgeId> crossed;
  std::vector<LevelComponent> components;
  bool simple = true;
  double length_estimate = 0.0;  // level_length of the level
  bool degenerate = false;       // no crossed edges

  bool connected() const { return components.size() == 1; }
  std::size_t spanning_components() const;
};

/// Arc index (1..4) of each boundary edge of the frame, 0 elsewhere.
std::vector<int> arc_edge_labels(const MetricMesh& mesh, const QuadFrame& frame);

/// Level set u^{-1}(t) as crossed edges grouped into dual paths.
/// Throws InvalidInput unless 0 < t < 1.
LevelCurve level_set(const MetricMesh& mesh, const QuadFrame& frame,
                     const PotentialField& field, double t);

struct MaxPrincipleReport {
  double region_max = 0.0;
  double region_min = 0.0;
  double boundary_max = 0.0;
  double boundary_min = 0.0;
  std::size_t boundary_size = 0;
  bool max_ok = false;
  bool min_ok = false;

  bool passed() const { return max_ok && min_ok; }
};

/// Compares u on the region with u on its reduced boundary: outside
/// neighbours of the region plus region vertices on zeta1 or zeta3.
/// Throws InvalidInput for an empty region.
MaxPrincipleReport max_principle_check(const MetricMesh& mesh,
                                       const QuadFrame& frame,
                                       const PotentialField& field,
                                       std::span<const VertexId> region,
                                       double tolerance = 1e-9);

/// max - min of the field over the region (0 for an empty region).
double oscillation(const PotentialField& field, std::span<const VertexId> region);

}  // namespace recipmod
