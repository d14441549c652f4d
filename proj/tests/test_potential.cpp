#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "recipmod/modulus.hpp"
#include "recipmod/potential.hpp"
#include "recipmod/surface.hpp"

using namespace recipmod;

namespace {

struct Solved {
  Surface s;
  ModulusResult r;
  PotentialField u;
};

Solved solved(Surface s) {
  auto r = solve_modulus(s.mesh, gamma1(s.frame));
  auto u = build_potential(s.mesh, s.frame, r.density);
  return {std::move(s), std::move(r), std::move(u)};
}

VertexId nearest(const MetricMesh& m, double x, double y) {
  VertexId best = 0;
  for (VertexId v = 1; v < static_cast<VertexId>(m.num_vertices()); ++v) {
    if (std::hypot(m.position(v).x - x, m.position(v).y - y) <
        std::hypot(m.position(best).x - x, m.position(best).y - y)) {
      best = v;
    }
  }
  return best;
}

// Largest oscillation of u over the vertices of a single face.
double max_face_oscillation(const MetricMesh& m, const PotentialField& u) {
  double worst = 0.0;
  for (const auto& f : m.faces()) worst = std::max(worst, oscillation(u, f.cycle));
  return worst;
}

}  // namespace

TEST_CASE("square potential is the height function") {
  const auto d = solved(build_rectangle(1, 1, 32));
  double err = 0.0;
  for (VertexId v = 0; v < static_cast<VertexId>(d.s.mesh.num_vertices()); ++v) {
    err = std::max(err, std::abs(d.u[v] - d.s.mesh.position(v).y));
  }
  CHECK(err <= 0.02);
  for (VertexId v : d.s.frame.zeta(1)) CHECK(d.u[v] == 0.0);
  for (VertexId v : d.s.frame.zeta(3)) CHECK(d.u[v] == 1.0);
  CHECK(upper_gradient_violations(d.s.mesh, d.u).empty());
}

TEST_CASE("zero density gives the zero potential") {
  const auto s = build_rectangle(1, 1, 8);
  const auto u = build_potential(s.mesh, s.frame, Density(s.mesh.num_edges(), 0.0));
  CHECK(std::all_of(u.u.begin(), u.u.end(), [](double x) { return x == 0.0; }));
  const auto c = level_set(s.mesh, s.frame, u, 0.5);
  CHECK(c.degenerate);
  CHECK(c.crossed.empty());
  CHECK(c.components.empty());
}

TEST_CASE("density size mismatch is rejected") {
  const auto s = build_rectangle(1, 1, 4);
  CHECK_THROWS_AS(build_potential(s.mesh, s.frame, Density(3)), InvalidInput);
}

TEST_CASE("potential grows with the density") {
  const auto s = build_rectangle(1, 1, 8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.5);
  Density lo(s.mesh.num_edges()), hi(s.mesh.num_edges());
  for (std::size_t e = 0; e < lo.size(); ++e) {
    lo.values[e] = unit(rng);
    hi.values[e] = lo.values[e] + unit(rng);
  }
  const auto a = build_potential(s.mesh, s.frame, lo);
  const auto b = build_potential(s.mesh, s.frame, hi);
  for (std::size_t v = 0; v < a.u.size(); ++v) CHECK(a.u[v] <= b.u[v]);
  CHECK(upper_gradient_violations(s.mesh, a).empty());
  CHECK(upper_gradient_violations(s.mesh, b).empty());
}

TEST_CASE("upper gradient check flags a tampered field") {
  const auto d = solved(build_rectangle(1, 1, 8));
  auto u = d.u;
  u.u[nearest(d.s.mesh, 0.5, 0.5)] += 0.3;
  CHECK_FALSE(upper_gradient_violations(d.s.mesh, u).empty());
}

TEST_CASE("middle level of the square") {
  const auto d = solved(build_rectangle(1, 1, 32));
  const auto c = level_set(d.s.mesh, d.s.frame, d.u, 0.5);
  CHECK_FALSE(c.degenerate);
  REQUIRE(c.connected());
  CHECK(c.components[0].spans_2_4());
  CHECK(c.spanning_components() == 1);
  CHECK(c.length_estimate == doctest::Approx(1.0).epsilon(0.05));
  CHECK(c.components[0].length_estimate == doctest::Approx(c.length_estimate));
  CHECK_THROWS_AS(level_set(d.s.mesh, d.s.frame, d.u, 0.0), InvalidInput);
  CHECK_THROWS_AS(level_set(d.s.mesh, d.s.frame, d.u, 1.0), InvalidInput);
}

TEST_CASE("level length of planar linear fields is exact") {
  const auto s = build_rectangle(1, 1, 8);
  std::vector<double> y, diag;
  for (const auto& p : s.mesh.vertices()) {
    y.push_back(p.y);
    diag.push_back(p.x + p.y);
  }
  CHECK(level_length(s.mesh, y, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
  // x + y = 0.7 cuts the square in a segment of length 0.7 sqrt(2).
  CHECK(level_length(s.mesh, diag, generic_level(diag, 0.7)) ==
        doctest::Approx(0.7 * std::sqrt(2.0)).epsilon(1e-9));
  // Doubling the weight doubles the length.
  std::vector<double> g(s.mesh.num_edges(), 2.0);
  CHECK(level_length(s.mesh, y, 0.3, g) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("level through the collapsed cluster stays connected") {
  const auto d = solved(build_collapsed_disk(1.5, 8, 0.5));
  const double t = d.u[nearest(d.s.mesh, 0.0, 0.0)];
  REQUIRE(t > 0.0);
  REQUIRE(t < 1.0);
  const auto c = level_set(d.s.mesh, d.s.frame, d.u, t);
  CHECK(c.connected());
  CHECK(c.spanning_components() == 1);
  for (int k = 1; k <= 9; ++k) {
    const auto ck = level_set(d.s.mesh, d.s.frame, d.u, 0.1 * k);
    CHECK(ck.connected());
    CHECK(ck.components[0].spans_2_4());
  }
}

TEST_CASE("maximum principle") {
  const auto d = solved(build_rectangle(1, 1, 16));
  const auto& m = d.s.mesh;
  const VertexId c = nearest(m, 0.5, 0.5);
  CHECK(max_principle_check(m, d.s.frame, d.u, ball(m, c, 0.25)).passed());

  const VertexId single[] = {c};
  const auto one = max_principle_check(m, d.s.frame, d.u, single);
  CHECK(one.passed());
  CHECK(one.boundary_size == 4);

  auto bumped = d.u;
  double top = 0.0;
  for (const auto& inc : m.neighbors(c)) top = std::max(top, bumped.u[inc.neighbor]);
  bumped.u[c] = top + 0.1;
  CHECK_FALSE(max_principle_check(m, d.s.frame, bumped, single).passed());
  CHECK_THROWS_AS(max_principle_check(m, d.s.frame, d.u, std::vector<VertexId>{}), InvalidInput);
}

TEST_CASE("oscillation examples") {
  const auto d = solved(build_rectangle(1, 1, 32));
  const auto& m = d.s.mesh;
  std::vector<VertexId> all(m.num_vertices()), lower;
  for (VertexId v = 0; v < static_cast<VertexId>(all.size()); ++v) {
    all[v] = v;
    if (m.position(v).y < 0.5) lower.push_back(v);
  }
  CHECK(oscillation(d.u, all) == doctest::Approx(1.0));
  CHECK(std::abs(oscillation(d.u, lower) - 0.5) <= 1.0 / 32 + 0.02);
  const auto zero = build_potential(m, d.s.frame, Density(m.num_edges(), 0.0));
  CHECK(oscillation(zero, all) == 0.0);
  CHECK(oscillation(d.u, std::vector<VertexId>{}) == 0.0);
}

TEST_CASE("refinement shrinks the face oscillation") {
  for (const auto& w : std::vector<WeightField>{[](double, double) { return 1.0; },
                                                [](double x, double y) { return 1.0 + x * x + y * y; },
                                                [](double x, double) { return 1.0 + x; }}) {
    double previous = 2.0;
    for (int n : {8, 16, 32}) {
      const auto d = solved(build_conformal(1, 1, n, w));
      const double osc = max_face_oscillation(d.s.mesh, d.u);
      CHECK(osc <= 1.1 * previous);
      CHECK(osc < previous);
      previous = osc;
    }
  }
}
