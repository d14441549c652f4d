#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "recipmod/surface.hpp"

namespace recipmod {

/// Nonnegative per-edge density rho(e).
struct Density {
  std::vector<double> values;

  Density() = default;
  explicit Density(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit Density(std::vector<double> v) : values(std::move(v)) {}

  double operator[](EdgeId e) const { return values[e]; }
  double& operator[](EdgeId e) { return values[e]; }
  std::size_t size() const { return values.size(); }
};

/// Thrown by the separation oracle when no path of the family exists.
class FamilyEmpty : public std::runtime_error {
 public:
  FamilyEmpty() : std::runtime_error("family empty") {}
};

/// Modulus value with +infinity as a tagged sentinel. Never fed to arithmetic
/// as a floating-point infinity.
struct ModulusValue {
  bool infinite = false;
  double value = 0.0;

  static ModulusValue finite(double v) { return {false, v}; }
  static ModulusValue infinity() { return {true, 0.0}; }
  std::string to_string() const;
};

enum class ModulusStatus {
  kCertified,     // admissibility and duality gap within tolerance
  kNotCertified,  // iteration budget exhausted
  kEmptyFamily,   // no path joins source and sink: modulus 0
  kInfinite,      // a zero-length path joins source and sink
};

const char* to_string(ModulusStatus s);

struct ModulusOptions {
  double eps_adm = 1e-6;
  double eps_gap = 1e-6;
  long long max_iter = 0;  // 0: 50 * |edges|
  /// Violated paths added per oracle round (0: one per reachable sink).
  std::size_t batch = 0;
  /// Relaxation factor of the dual coordinate ascent, in (0, 2).
  double relaxation = 1.0;
  /// Seed the active set with the path decomposition of the electrical flow
  /// (the optimal multipliers for p = 2). When false, start from rho = 0.
  bool warm_start = true;
};

struct ModulusResult {
  ModulusStatus status = ModulusStatus::kNotCertified;
  ModulusValue value;
  Density density;
  std::vector<std::vector<EdgeId>> active_paths;
  std::vector<double> multipliers;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double min_length = 0.0;  // oracle minimum rho-length of the returned density
  long long iterations = 0;

  bool certified() const {
    return status == ModulusStatus::kCertified ||
           status == ModulusStatus::kEmptyFamily ||
           status == ModulusStatus::kInfinite;
  }
  double relative_gap() const;
};

struct ViolatingPath {
  std::vector<EdgeId> edges;
  std::vector<VertexId> vertices;
  double rho_length = 0.0;
};

/// Cap assigned to rho on edges with zero area and positive length.
double zero_area_cap(const MetricMesh& mesh);

/// Oracle edge weights rho(e) * length(e).
std::vector<double> rho_weights(const MetricMesh& mesh, const Density& density);

/// sum_e rho(e)^2 edge_area(e), with areas restricted to `ambient`.
double energy(const MetricMesh& mesh, const Density& density,
              const std::vector<char>& ambient = {});

/// rho-length of an edge sequence.
double rho_length(const MetricMesh& mesh, const Density& density,
                  const std::vector<EdgeId>& path);

/// Separation oracle: the path of the family minimizing its rho-length.
/// Ties go to fewer edges, then smaller vertex ids. Throws FamilyEmpty.
ViolatingPath shortest_violating_path(const MetricMesh& mesh,
                                      const FamilySpec& family,
                                      const Density& density);

/// Mod_2 of the family by constraint generation with an active-set dual
/// coordinate ascent.
ModulusResult solve_modulus(const MetricMesh& mesh, const FamilySpec& family,
                            const ModulusOptions& options = {});

struct Certificate {
  double min_length = 0.0;
  bool admissible = false;
  double primal = 0.0;
  double dual = 0.0;
  double relative_gap = 0.0;
  bool gap_ok = false;
  double slackness_residual = 0.0;
  bool slackness_ok = false;

  bool passed() const { return admissible && gap_ok && slackness_ok; }
};

/// Re-derives admissibility, primal energy and the Lagrangian dual value of a
/// result from scratch.
Certificate certify(const ModulusResult& result, const MetricMesh& mesh,
                    const FamilySpec& family, const ModulusOptions& options = {});

}  // namespace recipmod
