#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "recipmod/modulus.hpp"
#include "recipmod/surface.hpp"

namespace recipmod {

/// Config document error with its 1-based line (0 when not tied to a line).
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }
  /// The message without the location prefix.
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// Builder name plus parameters, written "name" or "name:p1:p2".
///   square                      unit square
///   rectangle:W:H               W x H rectangle
///   conformal_radial            unit square, weight 1 + x^2 + y^2
///   conformal_linear            unit square, weight 1 + x
///   collapsed_disk:H:R          [-H, H]^2 with the disk of radius R collapsed
struct SurfaceSpec {
  std::string builder;
  std::vector<double> params;

  std::string id() const;
  /// Euclidean rectangle: classical moduli known in closed form.
  bool euclidean() const;
  /// Smooth zoo: rectangles and conformal weights, where the product is 1.
  bool smooth() const;
  bool collapsed() const { return builder == "collapsed_disk"; }
};

/// Builder names accepted by parse_surface_spec.
std::vector<std::string> available_builders();
/// Throws ConfigError listing the available builders for an unknown name.
SurfaceSpec parse_surface_spec(std::string_view text);
Surface make_surface(const SurfaceSpec& spec, int n);

/// The default zoo: square, both conformal weights and the collapsed disk
/// (half width 1.5, radius 0.5).
std::vector<SurfaceSpec> zoo();

enum class Suite { kModulus, kPotential, kCoarea, kReciprocality };
const char* to_string(Suite s);

struct ExperimentConfig {
  std::vector<SurfaceSpec> surfaces = zoo();
  std::vector<int> resolutions = {16, 32};
  std::vector<Suite> suites = {Suite::kModulus, Suite::kPotential, Suite::kCoarea,
                               Suite::kReciprocality};
  ModulusOptions modulus;
  int levels = 64;
  std::uint64_t seed = 1;
  int regions = 50;    // random regions for the maximum principle
  int subgraphs = 50;  // random subgraphs for the curve checks
  int fields = 20;     // random Lipschitz fields for the coarea check
  int threads = 0;     // 0: hardware concurrency
  std::filesystem::path out = "reports";

  /// Strictly increasing resolutions >= 2, positive counts, nonempty lists.
  void validate() const;
};

/// Plain-text key = value document; '#' starts a comment. Keys: surfaces
/// (comma list of specs, or "zoo"), resolutions, suites (comma list or
/// "all"), eps_adm, eps_gap, max_iter, levels, seed, regions, subgraphs,
/// fields, threads, out. Throws ConfigError with the offending line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One report line: surface id, n, quantity, lhs, rhs, constant, status.
/// `constant` is the empirical constant of the check where one applies.
struct ReportRow {
  std::string surface;
  int n = 0;
  std::string quantity;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  std::string status;  // pass, fail, info, indeterminate
  bool hard = false;   // failure makes the run exit nonzero

  bool failed() const { return status == "fail"; }
};

struct SuiteOutput {
  std::vector<ReportRow> rows;
  /// Lines for the summary document, already formatted.
  std::vector<std::pair<std::string, std::string>> summary;
};

/// Per-suite checks for one surface at one resolution. `seed` drives every
/// random sample.
SuiteOutput run_modulus_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg);
SuiteOutput run_potential_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg);
SuiteOutput run_coarea_suite(const SurfaceSpec& spec, int n, const ExperimentConfig& cfg);
SuiteOutput run_reciprocality_suite(const SurfaceSpec& spec, int n,
                                    const ExperimentConfig& cfg);

/// Inequality tolerance at resolution n: 5% at n = 32, halved per doubling.
double mesh_tolerance(int n);

std::string format_number(double v);
std::string rows_to_csv(const std::vector<ReportRow>& rows);

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 hard assertion failure
  std::vector<std::filesystem::path> files;
  std::vector<ReportRow> rows;
  std::size_t hard_failures = 0;
};

/// Runs every configured suite over surfaces x resolutions, writes one CSV
/// per suite and summary.json into cfg.out.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace recipmod
