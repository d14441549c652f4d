#include "recipmod/mesh_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace recipmod {

using nlohmann::json;

FormatError::FormatError(const std::string& message, std::string field, std::size_t line)
    : InvalidInput(line > 0 ? "line " + std::to_string(line) + ": " + message
                            : (field.empty() ? message : field + ": " + message)),
      field_(std::move(field)),
      line_(line) {}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

const json& member(const json& obj, const char* key, const std::string& at) {
  if (!obj.is_object()) throw FormatError("expected an object", at);
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field \"") + key + "\"", at);
  return *it;
}

const json& array_at(const json& j, const std::string& at) {
  if (!j.is_array()) throw FormatError("expected an array", at);
  return j;
}

double number_at(const json& j, const std::string& at) {
  if (!j.is_number()) throw FormatError("expected a number", at);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError("expected a finite number", at);
  return v;
}

double nonnegative_at(const json& j, const std::string& at) {
  const double v = number_at(j, at);
  if (v < 0.0) throw FormatError("negative value", at);
  return v;
}

VertexId index_at(const json& j, std::size_t nv, const std::string& at) {
  if (!j.is_number_integer()) throw FormatError("expected a vertex index", at);
  const auto v = j.get<long long>();
  if (v < 0 || v >= static_cast<long long>(nv)) {
    throw FormatError("vertex index out of range", at);
  }
  return static_cast<VertexId>(v);
}

std::string dump(const json& j) {
  // nlohmann writes doubles in shortest round-trip form, which can be fewer
  // than 12 digits; format them ourselves.
  std::ostringstream out;
  out.precision(17);
  const auto write = [&](const auto& self, const json& v) -> void {
    switch (v.type()) {
      case json::value_t::array: {
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out << ',';
          self(self, v[i]);
        }
        out << ']';
        break;
      }
      case json::value_t::object: {
        out << '{';
        bool first = true;
        for (const auto& [k, x] : v.items()) {
          if (!first) out << ',';
          first = false;
          out << json(k).dump() << ':';
          self(self, x);
        }
        out << '}';
        break;
      }
      case json::value_t::number_float: {
        const double d = v.get<double>();
        out << d;
        if (d == std::floor(d) && std::abs(d) < 1e15) out << ".0";
        break;
      }
      default:
        out << v.dump();
    }
  };
  write(write, j);
  out << '\n';
  return out.str();
}

}  // namespace

std::string surface_to_json(const Surface& surface) {
  const auto& mesh = surface.mesh;
  json doc;
  json vertices = json::array();
  for (const auto& p : mesh.vertices()) vertices.push_back({p.x, p.y});
  json edges = json::array();
  for (const auto& e : mesh.edges()) edges.push_back({e.a, e.b, e.length});
  json faces = json::array();
  for (const auto& f : mesh.faces()) faces.push_back({f.cycle, f.area});
  json frame;
  for (int k = 1; k <= 4; ++k) frame["zeta" + std::to_string(k)] = surface.frame.zeta(k);
  doc["vertices"] = std::move(vertices);
  doc["edges"] = std::move(edges);
  doc["faces"] = std::move(faces);
  doc["frame"] = std::move(frame);
  return dump(doc);
}

Surface surface_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(e.what(), "", line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw FormatError("expected an object", "/");

  const auto& jv = array_at(member(doc, "vertices", ""), "/vertices");
  std::vector<Point2> vertices;
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const std::string at = "/vertices/" + std::to_string(i);
    const auto& p = array_at(jv[i], at);
    if (p.size() != 2) throw FormatError("expected [x, y]", at);
    vertices.push_back({number_at(p[0], at + "/0"), number_at(p[1], at + "/1")});
  }
  const std::size_t nv = vertices.size();

  const auto& je = array_at(member(doc, "edges", ""), "/edges");
  std::vector<MeshEdge> edges;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    const auto& e = array_at(je[i], at);
    if (e.size() != 3) throw FormatError("expected [i, j, length]", at);
    edges.push_back({index_at(e[0], nv, at + "/0"), index_at(e[1], nv, at + "/1"),
                     nonnegative_at(e[2], at + "/2")});
  }

  const auto& jf = array_at(member(doc, "faces", ""), "/faces");
  std::vector<MeshFace> faces;
  for (std::size_t i = 0; i < jf.size(); ++i) {
    const std::string at = "/faces/" + std::to_string(i);
    const auto& f = array_at(jf[i], at);
    if (f.size() != 2) throw FormatError("expected [[v...], area]", at);
    const auto& cyc = array_at(f[0], at + "/0");
    MeshFace face;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      face.cycle.push_back(index_at(cyc[k], nv, at + "/0/" + std::to_string(k)));
    }
    face.area = nonnegative_at(f[1], at + "/1");
    faces.push_back(std::move(face));
  }

  const auto& jframe = member(doc, "frame", "");
  QuadFrame frame;
  for (int k = 1; k <= 4; ++k) {
    const std::string key = "zeta" + std::to_string(k);
    const auto& arc = array_at(member(jframe, key.c_str(), "/frame"), "/frame/" + key);
    for (std::size_t i = 0; i < arc.size(); ++i) {
      frame.arcs[k - 1].push_back(
          index_at(arc[i], nv, "/frame/" + key + "/" + std::to_string(i)));
    }
  }

  Surface s;
  try {
    s.mesh = MetricMesh(std::move(vertices), std::move(edges), std::move(faces));
  } catch (const FormatError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), "/edges");
  }
  try {
    frame.validate(s.mesh);
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), "/frame");
  }
  s.frame = std::move(frame);
  return s;
}

void write_surface(const std::filesystem::path& path, const Surface& surface) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << surface_to_json(surface);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Surface read_surface(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return surface_from_json(buf.str());
}

std::string modulus_to_json(const ModulusResult& result) {
  json doc;
  doc["status"] = to_string(result.status);
  if (result.value.infinite) {
    doc["value"] = "inf";
  } else {
    doc["value"] = result.value.value;
  }
  doc["primal"] = result.primal_value;
  doc["dual"] = result.dual_value;
  doc["gap"] = result.relative_gap();
  doc["iterations"] = result.iterations;
  doc["min_length"] = result.min_length;
  doc["active_paths"] = result.active_paths.size();
  doc["density"] = result.density.values;
  return dump(doc);
}

std::string curve_to_json(const CurvePath& path) {
  json doc;
  doc["vertices"] = path.vertices;
  doc["edges"] = path.edges;
  doc["length"] = path.length;
  doc["injective"] = path.injective;
  return dump(doc);
}

}  // namespace recipmod
