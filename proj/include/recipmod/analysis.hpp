#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "recipmod/modulus.hpp"
#include "recipmod/potential.hpp"
#include "recipmod/surface.hpp"

namespace recipmod {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourOverPi = 4.0 / kPi;
/// Constant of the coarea inequality for the potential u.
inline constexpr double kCoareaUConstant = 2000.0;

struct KappaBounds {
  double proven = 2000.0 * 2000.0 * kFourOverPi * kFourOverPi;
  double refined = 216.0 * 216.0 * kFourOverPi * kFourOverPi;
  double conjectured = kFourOverPi * kFourOverPi;

  std::array<double, 3> values() const { return {proven, refined, conjectured}; }
};

/// Default level count of the level integrals.
inline constexpr int kDefaultLevels = 64;

/// Trapezoidal integral over [lo, hi] of the g-weighted level_length of
/// the level sets of `values`, sampled at `levels` uniform generic levels.
struct LevelIntegral {
  std::vector<double> levels;
  std::vector<double> lengths;
  double integral = 0.0;
};
LevelIntegral level_integral(const MetricMesh& mesh, std::span<const double> values,
                             std::span<const double> g, int levels, double lo,
                             double hi, const std::vector<char>& ambient = {});

struct CoareaReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;            // constant multiplying the area integral
  double area_integral = 0.0;       // integral the constant multiplies
  double empirical_constant = 0.0;  // lhs / area_integral
  double tolerance = 0.0;
  std::vector<double> levels;
  bool passed = false;
};

/// Lipschitz coarea inequality: lhs <= (4L/pi) sum_e g(e) cell_share(e).
/// Throws InvalidInput("not L-Lipschitz") when some edge has
/// |m(a) - m(b)| > L length(e).
CoareaReport coarea_check(const MetricMesh& mesh, std::span<const double> m,
                          double lipschitz, std::span<const double> g,
                          int levels = kDefaultLevels, double tolerance = 0.05);

/// Coarea inequality for the potential: lhs <= 2000 sum_e g rho edge_area,
/// over levels in [0, 1].
CoareaReport coarea_u_check(const MetricMesh& mesh, const QuadFrame& frame,
                            const PotentialField& field, const Density& density,
                            std::span<const double> g, int levels = kDefaultLevels,
                            double tolerance = 0.05);

struct OscillationRow {
  VertexId center = 0;
  double radius = 0.0;
  bool skipped = false;  // radius outside the admissible range
  double osc = 0.0;
  double image_measure = 0.0;
  double lhs = 0.0;        // r * osc
  double lhs_image = 0.0;  // r * image measure
  double rhs = 0.0;        // (4/pi) sum over B(x, 2r) of rho edge_area
  bool passed = false;
  bool passed_image = false;
};

/// Largest graph distance between two vertices of an arc.
double arc_diameter(const MetricMesh& mesh, const std::vector<VertexId>& arc);

std::vector<OscillationRow> oscillation_check(const MetricMesh& mesh,
                                              const QuadFrame& frame,
                                              const PotentialField& field,
                                              const Density& density,
                                              std::span<const VertexId> centers,
                                              std::span<const double> radii,
                                              double tolerance = 0.05);

/// Family joining ball(center, r) to the complement of ball(center, R)
/// inside ball(center, R). The sink is the outer layer of vertices adjacent
/// to the ball. Throws InvalidInput unless 0 < r < R and the complement is
/// nonempty.
FamilySpec ring_family(const MetricMesh& mesh, VertexId center, double r, double R);

ModulusResult ring_modulus(const MetricMesh& mesh, VertexId center, double r,
                           double R, const ModulusOptions& options = {});

/// Product of two moduli with explicit infinity handling.
struct ModulusProduct {
  enum class Kind { kFinite, kInfinite, kIndeterminate };
  Kind kind = Kind::kFinite;
  double value = 0.0;

  static ModulusProduct of(const ModulusValue& a, const ModulusValue& b);
  std::string to_string() const;
};

enum class Flag { kPass, kFail, kIndeterminate };
const char* to_string(Flag f);

struct ChainCheck {
  std::size_t levels = 0;
  std::size_t band_paths_found = 0;
  double min_band_length = 0.0;  // smallest g-length of a band path (>= 1 - eps)
  double path_integral = 0.0;    // integral over levels of band-path g-lengths
  double face_pairing = 0.0;     // sum_f area(f) |g_f| |rho_f|
  double coarea_bound = 0.0;     // (4 * 2000 / pi) face_pairing
  double empirical_constant = 0.0;
  double holder_bound = 0.0;     // sqrt(Mod1 Mod2)
  bool admissible_ok = false;
  bool coarea_ok = false;
  bool holder_ok = false;
  bool passed() const { return admissible_ok && coarea_ok && holder_ok; }
};

struct ReciprocalityReport {
  ModulusResult gamma1;
  ModulusResult gamma2;
  ModulusProduct product;
  KappaBounds kappa;
  std::array<Flag, 3> lower{};  // per kappa: proven, refined, conjectured
  std::array<Flag, 3> upper{};
  double upper_max_product = 0.0;
  std::size_t upper_probes = 0;
  Flag ring = Flag::kIndeterminate;
  double ring_outer = 0.0;
  double ring_large = 0.0;  // modulus at inner radius R/2
  double ring_small = 0.0;  // modulus at inner radius R/8
  double ring_ratio = 0.0;
  ChainCheck chain;
  bool certified = false;
};

struct ReciprocityOptions {
  ModulusOptions modulus;
  int levels = kDefaultLevels;
  bool probes = true;  // upper flag over sub-quadrilaterals
  bool ring = true;
  bool chain = true;
};

/// Solves both conjugate families of Q and evaluates the three reciprocality
/// conditions plus the lower-bound proof chain. `ambient` restricts Q to a
/// sub-complex of the mesh (empty: the whole mesh).
ReciprocalityReport reciprocality_report(const MetricMesh& mesh,
                                         const QuadFrame& frame,
                                         const ReciprocityOptions& options = {},
                                         const std::vector<char>& ambient = {});

/// Face magnitude of an edge density: sqrt((2/k) sum_{e in f} rho(e)^2) for a
/// k-gon f, so that sum_f area(f) |rho_f|^2 equals the edge energy.
std::vector<double> face_magnitudes(const MetricMesh& mesh, const Density& density);

ChainCheck product_bound_chain(const MetricMesh& mesh, const QuadFrame& frame,
                               const ModulusResult& gamma1,
                               const ModulusResult& gamma2, int levels,
                               double eps_adm, const std::vector<char>& ambient = {});

}  // namespace recipmod
