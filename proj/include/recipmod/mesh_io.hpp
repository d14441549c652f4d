#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "recipmod/curves.hpp"
#include "recipmod/modulus.hpp"
#include "recipmod/surface.hpp"

namespace recipmod {

/// Malformed mesh document. `field` is a JSON-pointer-like path such as
/// "/edges/3/2"; `line` is 0 when the error is not a syntax error.
class FormatError : public InvalidInput {
 public:
  FormatError(const std::string& message, std::string field, std::size_t line = 0);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// Mesh document:
///   {"vertices": [[x, y], ...],
///    "edges":    [[i, j, length], ...],
///    "faces":    [[[v0, v1, ...], area], ...],
///    "frame":    {"zeta1": [...], "zeta2": [...], "zeta3": [...], "zeta4": [...]}}
/// Numbers are written with 17 significant digits.
std::string surface_to_json(const Surface& surface);
/// Parses and validates (mesh invariants and frame). Throws FormatError.
Surface surface_from_json(std::string_view text);

void write_surface(const std::filesystem::path& path, const Surface& surface);
Surface read_surface(const std::filesystem::path& path);

/// {"status", "value", "primal", "dual", "gap", "iterations", "min_length",
///  "density": [...]}; an infinite value is the string "inf".
std::string modulus_to_json(const ModulusResult& result);

/// {"vertices": [...], "edges": [...], "length": ...}
std::string curve_to_json(const CurvePath& path);

}  // namespace recipmod
