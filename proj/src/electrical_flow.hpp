#pragma once

#include <vector>

#include "recipmod/surface.hpp"

namespace recipmod::detail {

/// Path decomposition of a source-to-sink flow.
struct PathFlow {
  std::vector<std::vector<EdgeId>> paths;
  std::vector<double> amounts;
};

/// Electrical flow of the family with conductances 2 area / length^2,
/// potential 0 on the source and 1 on the sink, decomposed into paths of the
/// family. Zero-length edges are contracted; zero-area edges carry no flow.
/// In the multiplier form of the modulus dual this is the optimal flow.
PathFlow electrical_path_flow(const MetricMesh& mesh, const FamilySpec& family,
                              const std::vector<double>& area);

}  // namespace recipmod::detail
