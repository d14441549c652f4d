#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "recipmod/curves.hpp"
#include "recipmod/surface.hpp"

using namespace recipmod;

namespace {

VertexId vertex_at(const MetricMesh& m, double x, double y) {
  for (VertexId v = 0; v < static_cast<VertexId>(m.num_vertices()); ++v) {
    if (std::abs(m.position(v).x - x) < 1e-9 && std::abs(m.position(v).y - y) < 1e-9) return v;
  }
  return -1;
}

// Connected subgraph grown edge by edge from a random start.
std::vector<EdgeId> random_subgraph(const MetricMesh& m, std::mt19937_64& rng, std::size_t size) {
  std::uniform_int_distribution<VertexId> pick_v(0, static_cast<VertexId>(m.num_vertices()) - 1);
  std::set<VertexId> reached{pick_v(rng)};
  std::set<EdgeId> chosen;
  while (chosen.size() < size) {
    std::vector<EdgeId> frontier;
    for (VertexId v : reached) {
      for (const auto& inc : m.neighbors(v)) {
        if (!chosen.count(inc.edge)) frontier.push_back(inc.edge);
      }
    }
    if (frontier.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const EdgeId e = frontier[pick(rng)];
    chosen.insert(e);
    reached.insert(m.edge(e).a);
    reached.insert(m.edge(e).b);
  }
  return {chosen.begin(), chosen.end()};
}

std::vector<VertexId> subgraph_vertices(const MetricMesh& m, const std::vector<EdgeId>& sub) {
  std::set<VertexId> vs;
  for (EdgeId e : sub) {
    vs.insert(m.edge(e).a);
    vs.insert(m.edge(e).b);
  }
  return {vs.begin(), vs.end()};
}

}  // namespace

TEST_CASE("single edge") {
  const auto s = build_rectangle(1, 1, 4);
  const auto& ed = s.mesh.edge(5);
  const EdgeId sub[] = {5};
  const auto p = extract_path(s.mesh, sub, ed.a, ed.b);
  CHECK(p.edges == std::vector<EdgeId>{5});
  CHECK(p.length == doctest::Approx(ed.length));
  CHECK(p.injective);
  const auto w = double_traversal(s.mesh, sub, ed.a, ed.b);
  CHECK(w.edges == std::vector<EdgeId>{5});
  CHECK(w.length <= 2.0 * ed.length);
}

TEST_CASE("cycle takes the shorter arc") {
  // Boundary cycle of a square with weight 1 + x: the right arc is longer.
  const auto s = build_conformal(1, 1, 2, [](double x, double) { return 1.0 + x; });
  const auto& m = s.mesh;
  std::vector<EdgeId> cycle;
  for (EdgeId e = 0; e < static_cast<EdgeId>(m.num_edges()); ++e) {
    if (m.is_boundary_edge(e)) cycle.push_back(e);
  }
  REQUIRE(cycle.size() == 8);
  const VertexId x = vertex_at(m, 0.5, 0.0), y = vertex_at(m, 0.5, 1.0);
  const auto p = extract_path(m, cycle, x, y);
  CHECK(p.injective);
  const double left = m.length(m.find_edge(x, vertex_at(m, 0, 0))) +
                      m.length(m.find_edge(vertex_at(m, 0, 0), vertex_at(m, 0, 0.5))) +
                      m.length(m.find_edge(vertex_at(m, 0, 0.5), vertex_at(m, 0, 1))) +
                      m.length(m.find_edge(vertex_at(m, 0, 1), y));
  CHECK(p.length == doctest::Approx(left));
  CHECK(p.length < total_length(m, cycle) - left);
}

TEST_CASE("equal endpoints give the empty path") {
  const auto s = build_rectangle(1, 1, 4);
  const EdgeId sub[] = {0, 1, 2};
  const auto p = extract_path(s.mesh, sub, s.mesh.edge(0).a, s.mesh.edge(0).a);
  CHECK(p.edges.empty());
  CHECK(p.length == 0.0);
  CHECK(p.vertices.size() == 1);
}

TEST_CASE("unreachable endpoint") {
  const auto s = build_rectangle(1, 1, 4);
  const EdgeId sub[] = {0};
  const VertexId far = static_cast<VertexId>(s.mesh.num_vertices()) - 1;
  CHECK_THROWS_WITH_AS(extract_path(s.mesh, sub, s.mesh.edge(0).a, far), "not connected", InvalidInput);
}

TEST_CASE("star doubling") {
  const auto s = build_conformal(1, 1, 2, [](double, double) { return 2.0; });
  const auto& m = s.mesh;
  const VertexId c = vertex_at(m, 0.5, 0.5);
  std::vector<EdgeId> star;
  for (const auto& inc : m.neighbors(c)) {
    if (star.size() < 3) star.push_back(inc.edge);
  }
  for (EdgeId e : star) REQUIRE(m.length(e) == doctest::Approx(1.0));
  const auto w = double_traversal(m, star, c, c);
  CHECK(w.length == doctest::Approx(6.0));
  CHECK(w.vertices.front() == c);
  CHECK(w.vertices.back() == c);
  const auto mult = edge_multiplicity(w);
  CHECK(mult.size() == 3);
  for (const auto& [e, k] : mult) CHECK(k == 2);
}

TEST_CASE("random subgraphs of the 5x5 grid") {
  const auto s = build_rectangle(1, 1, 4);
  const auto& m = s.mesh;
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sub = random_subgraph(m, rng, 1 + trial % 16);
    const auto vs = subgraph_vertices(m, sub);
    std::uniform_int_distribution<std::size_t> pick(0, vs.size() - 1);
    const VertexId x = vs[pick(rng)], y = vs[pick(rng)];
    const double total = total_length(m, sub);

    const auto w = double_traversal(m, sub, x, y);
    CHECK(w.vertices.front() == x);
    CHECK(w.vertices.back() == y);
    CHECK(w.length <= 2.0 * total + 1e-12);
    const auto mult = edge_multiplicity(w);
    CHECK(mult.size() == sub.size());
    for (const auto& [e, k] : mult) {
      CHECK(std::binary_search(sub.begin(), sub.end(), e));
      CHECK(k <= 2);
    }
    CHECK_NOTHROW(make_curve(m, w.vertices, w.edges));

    const auto p = extract_path(m, sub, x, y);
    CHECK(p.injective);
    CHECK(p.length <= total + 1e-12);
    std::set<VertexId> distinct(p.vertices.begin(), p.vertices.end());
    CHECK(distinct.size() == p.vertices.size());

    // Same input, same walk.
    const auto again = double_traversal(m, sub, x, y);
    CHECK(again.edges == w.edges);
    CHECK(extract_path(m, sub, x, y).edges == p.edges);
  }
}

TEST_CASE("disconnected subgraph is rejected by double traversal") {
  const auto s = build_rectangle(1, 1, 4);
  const auto& m = s.mesh;
  const EdgeId a = m.find_edge(vertex_at(m, 0, 0), vertex_at(m, 0.25, 0));
  const EdgeId b = m.find_edge(vertex_at(m, 0.75, 1), vertex_at(m, 1, 1));
  const EdgeId sub[] = {a, b};
  CHECK_THROWS_AS(double_traversal(m, sub, vertex_at(m, 0, 0), vertex_at(m, 0.25, 0)), InvalidInput);
}

TEST_CASE("walk validation") {
  const auto s = build_rectangle(1, 1, 4);
  const auto& m = s.mesh;
  const auto& e0 = m.edge(0);
  const auto c = make_curve(m, {e0.a, e0.b, e0.a}, {0, 0});
  CHECK_FALSE(c.injective);
  CHECK(c.length == doctest::Approx(2.0 * e0.length));
  CHECK_THROWS_AS(make_curve(m, {e0.a, e0.b}, {0, 0}), InvalidInput);
  CHECK_THROWS_AS(make_curve(m, {e0.a, e0.a}, {0}), InvalidInput);
}
