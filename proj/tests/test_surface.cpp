#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "recipmod/shortest_path.hpp"
#include "recipmod/surface.hpp"

using namespace recipmod;

namespace {

double arc_length(const MetricMesh& mesh, const std::vector<VertexId>& arc) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < arc.size(); ++i) s += mesh.length(mesh.find_edge(arc[i], arc[i + 1]));
  return s;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

VertexId vertex_at(const MetricMesh& mesh, double x, double y) {
  for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v) {
    if (std::abs(mesh.position(v).x - x) < 1e-9 && std::abs(mesh.position(v).y - y) < 1e-9) return v;
  }
  return -1;
}

}  // namespace

TEST_CASE("rectangle counts and area") {
  const auto s = build_rectangle(1, 1, 4);
  CHECK(s.mesh.num_vertices() == 25);
  CHECK(s.mesh.num_faces() == 16);
  CHECK(s.mesh.total_area() == doctest::Approx(1.0));
}

TEST_CASE("rectangle bottom arc length") {
  const auto s = build_rectangle(2, 1, 2);
  CHECK(arc_length(s.mesh, s.frame.zeta(1)) == doctest::Approx(2.0));
  CHECK(arc_length(s.mesh, s.frame.zeta(2)) == doctest::Approx(1.0));
}

TEST_CASE("edge areas distribute every face") {
  // edge_area takes half of each adjacent quad, so each of the two edge
  // orientations carries the full area; cell_share halves that again.
  const auto s = build_rectangle(1, 1, 16);
  double cells = 0.0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(s.mesh.num_edges()); ++e) cells += s.mesh.cell_share(e);
  CHECK(cells == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sum(s.mesh.edge_areas()) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("frame arcs in cyclic order") {
  const auto s = build_rectangle(2, 1, 4);
  const auto& m = s.mesh;
  for (VertexId v : s.frame.zeta(1)) CHECK(m.position(v).y == 0.0);
  for (VertexId v : s.frame.zeta(2)) CHECK(m.position(v).x == doctest::Approx(2.0));
  for (VertexId v : s.frame.zeta(3)) CHECK(m.position(v).y == doctest::Approx(1.0));
  for (VertexId v : s.frame.zeta(4)) CHECK(m.position(v).x == 0.0);
  for (int k = 1; k <= 4; ++k) CHECK(s.frame.zeta(k).back() == s.frame.zeta(k % 4 + 1).front());
  CHECK_NOTHROW(s.frame.validate(m));
}

TEST_CASE("builders reject bad input") {
  CHECK_THROWS_AS(build_rectangle(0, 1, 4), InvalidInput);
  CHECK_THROWS_AS(build_rectangle(1, -1, 4), InvalidInput);
  CHECK_THROWS_AS(build_rectangle(1, 1, 1), InvalidInput);
  CHECK_THROWS_AS(build_conformal(1, 1, 4, [](double x, double) { return x - 0.5; }), InvalidInput);
  CHECK_THROWS_WITH_AS(build_collapsed_disk(1.0, 4, 1.0), "collapse disk touches the boundary arcs",
                       InvalidInput);
}

TEST_CASE("unit conformal weight reproduces the rectangle") {
  const auto a = build_rectangle(1, 1, 8);
  const auto b = build_conformal(1, 1, 8, [](double, double) { return 1.0; });
  REQUIRE(a.mesh.num_edges() == b.mesh.num_edges());
  for (EdgeId e = 0; e < static_cast<EdgeId>(a.mesh.num_edges()); ++e) {
    CHECK(a.mesh.length(e) == b.mesh.length(e));
    CHECK(a.mesh.edge_area(e) == b.mesh.edge_area(e));
  }
}

TEST_CASE("constant weight 2 doubles lengths") {
  const auto s = build_conformal(1, 1, 8, [](double, double) { return 2.0; });
  CHECK(s.mesh.total_area() == doctest::Approx(4.0));
  for (int k = 1; k <= 4; ++k) CHECK(arc_length(s.mesh, s.frame.zeta(k)) == doctest::Approx(2.0));
}

TEST_CASE("linear weight bottom arc length") {
  // Midpoint quadrature is exact for the linear weight: int_0^1 (1 + x) dx.
  const auto s = build_conformal(1, 1, 8, [](double x, double) { return 1.0 + x; });
  CHECK(arc_length(s.mesh, s.frame.zeta(1)) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("weight scaling scales lengths and areas") {
  const auto w = [](double x, double y) { return 1.0 + x * x + y * y; };
  const double c = 3.0;
  const auto a = build_conformal(1, 1, 8, w);
  const auto b = build_conformal(1, 1, 8, [&](double x, double y) { return c * w(x, y); });
  for (EdgeId e = 0; e < static_cast<EdgeId>(a.mesh.num_edges()); ++e) {
    CHECK(b.mesh.length(e) == doctest::Approx(c * a.mesh.length(e)).epsilon(1e-15));
  }
  for (FaceId f = 0; f < static_cast<FaceId>(a.mesh.num_faces()); ++f) {
    CHECK(b.mesh.face(f).area == doctest::Approx(c * c * a.mesh.face(f).area).epsilon(1e-15));
  }
}

TEST_CASE("collapsed disk area") {
  for (int n : {4, 8, 16}) {
    const auto s = build_collapsed_disk(1.5, n, 0.5);
    const double expected = 9.0 - std::numbers::pi * 0.25;
    const double band = 2.0 * std::numbers::pi * 0.5 * (1.0 / n);
    CHECK(std::abs(s.mesh.total_area() - expected) <= band);
  }
}

TEST_CASE("vanishing collapse radius approaches the rectangle") {
  const auto a = build_collapsed_disk(1.5, 8, 1e-6);
  const auto b = build_rectangle(3, 3, 8);
  REQUIRE(a.mesh.num_edges() == b.mesh.num_edges());
  const double h = 1.0 / 8;
  for (EdgeId e = 0; e < static_cast<EdgeId>(a.mesh.num_edges()); ++e) {
    CHECK(std::abs(a.mesh.length(e) - b.mesh.length(e)) <= h);
    CHECK(std::abs(a.mesh.edge_area(e) - b.mesh.edge_area(e)) <= h * h);
  }
}

TEST_CASE("antipodal points of the collapse circle are at distance 0") {
  const auto s = build_collapsed_disk(1.5, 4, 0.5);
  const VertexId p = vertex_at(s.mesh, -0.5, 0.0);
  const VertexId q = vertex_at(s.mesh, 0.5, 0.0);
  REQUIRE(p >= 0);
  REQUIRE(q >= 0);
  const VertexId src[] = {p};
  const auto tree = shortest_paths(s.mesh, src, length_weights(s.mesh));
  CHECK(tree.dist[q] == 0.0);
}

TEST_CASE("ball examples") {
  const auto s = build_rectangle(1, 1, 8);
  const VertexId c = vertex_at(s.mesh, 0.5, 0.5);
  CHECK(ball(s.mesh, c, 0.0) == std::vector<VertexId>{c});
  CHECK(ball(s.mesh, c, 10.0).size() == s.mesh.num_vertices());

  const auto d = build_collapsed_disk(1.5, 8, 0.5);
  const VertexId o = vertex_at(d.mesh, 0.0, 0.0);
  std::size_t inside = 0;
  for (const auto& p : d.mesh.vertices()) inside += std::hypot(p.x, p.y) <= 0.5 + 1e-12;
  CHECK(ball(d.mesh, o, 0.0).size() == inside);
  CHECK_THROWS_AS(ball(s.mesh, c, -1.0), InvalidInput);
}

TEST_CASE("ball is monotone in r") {
  const auto s = build_conformal(1, 1, 8, [](double x, double y) { return 1.0 + x * y; });
  for (double r1 : {0.0, 0.1, 0.2, 0.4}) {
    for (double r2 : {0.05, 0.2, 0.5, 1.0}) {
      if (r1 > r2) continue;
      const auto a = ball(s.mesh, 40, r1);
      const auto b = ball(s.mesh, 40, r2);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("separating cut across a level of u = y") {
  const auto s = build_rectangle(1, 1, 3);
  const auto& m = s.mesh;
  auto straddles = [&](EdgeId e) {
    const double ya = m.position(m.edge(e).a).y, yb = m.position(m.edge(e).b).y;
    return std::min(ya, yb) < 0.5 && std::max(ya, yb) > 0.5;
  };
  const auto cut = separating_cut(m, s.frame.zeta(1), s.frame.zeta(3), straddles);
  std::vector<EdgeId> allowed;
  for (EdgeId e = 0; e < static_cast<EdgeId>(m.num_edges()); ++e) {
    if (straddles(e)) allowed.push_back(e);
  }
  CHECK(static_cast<int>(cut.edges.size()) ==
        oracle::brute_min_cut(m, s.frame.zeta(1), s.frame.zeta(3), allowed, 6));
  REQUIRE(cut.dual_paths.size() == 1);
  CHECK(cut.simple);
  // The dual path runs from the zeta2 side to the zeta4 side.
  const auto& path = cut.dual_paths[0];
  const auto end_x = [&](EdgeId e) { return m.position(m.edge(e).a).x; };
  CHECK(std::min(end_x(path.front()), end_x(path.back())) == 0.0);
  CHECK(std::max(end_x(path.front()), end_x(path.back())) == doctest::Approx(1.0));
  // Removing the cut separates the sides.
  std::vector<char> removed(m.num_edges(), 0);
  for (EdgeId e : cut.edges) removed[e] = 1;
  const auto labels = component_labels(m, [&](EdgeId e) { return !removed[e]; });
  for (VertexId a : s.frame.zeta(1)) {
    for (VertexId b : s.frame.zeta(3)) CHECK(labels[a] != labels[b]);
  }
}

TEST_CASE("separating cut with every edge allowed is a minimum cut") {
  const auto s = build_rectangle(1, 1, 3);
  const auto& m = s.mesh;
  std::vector<EdgeId> all(m.num_edges());
  std::iota(all.begin(), all.end(), 0);
  const auto cut = separating_cut(m, s.frame.zeta(1), s.frame.zeta(3), [](EdgeId) { return true; });
  CHECK(static_cast<int>(cut.edges.size()) ==
        oracle::brute_min_cut(m, s.frame.zeta(1), s.frame.zeta(3), all, 5));

  // Irregular sides: a corner vertex against the opposite corner.
  const std::vector<VertexId> a{0}, b{static_cast<VertexId>(m.num_vertices() - 1)};
  const auto corner = separating_cut(m, a, b, [](EdgeId) { return true; });
  CHECK(static_cast<int>(corner.edges.size()) == oracle::brute_min_cut(m, a, b, all, 4));
}

TEST_CASE("no separating cut between adjacent sides") {
  const auto s = build_rectangle(1, 1, 3);
  const auto& ed = s.mesh.edge(0);
  const std::vector<VertexId> a{ed.a}, b{ed.b};
  CHECK_THROWS_WITH_AS(separating_cut(s.mesh, a, b, [](EdgeId e) { return e != 0; }),
                       "no separating cut", InvalidInput);
}

TEST_CASE("mesh invariants are enforced") {
  std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<MeshEdge> e{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, -1.0}};
  std::vector<MeshFace> f{{{0, 1, 2, 3}, 1.0}};
  CHECK_THROWS_AS(MetricMesh(v, e, f), InvalidInput);
  e[3].length = 1.0;
  CHECK_NOTHROW(MetricMesh(v, e, f));
  f[0].area = -1.0;
  CHECK_THROWS_AS(MetricMesh(v, e, f), InvalidInput);
  f[0].area = 1.0;
  e.pop_back();
  CHECK_THROWS_AS(MetricMesh(v, e, f), InvalidInput);
}

TEST_CASE("frame validation rejects bad arcs") {
  const auto s = build_rectangle(1, 1, 4);
  auto bad = s.frame;
  bad.arcs[0].pop_back();  // no longer ends where zeta2 starts
  CHECK_THROWS_AS(bad.validate(s.mesh), InvalidInput);
  auto shrunk = s.frame;
  shrunk.arcs[1] = {shrunk.arcs[1].front()};
  CHECK_THROWS_AS(shrunk.validate(s.mesh), InvalidInput);
}

TEST_CASE("box sub-quadrilateral areas stay inside the box") {
  const auto s = build_rectangle(1, 1, 8);
  const auto q = box_quadrilateral(s.mesh, 0.25, 0.75, 0.25, 0.75);
  const auto area = edge_areas_within(s.mesh, q.ambient);
  CHECK(sum(area) == doctest::Approx(2.0 * 0.25));
  CHECK(edge_areas_within(s.mesh, {}) == s.mesh.edge_areas());
}
