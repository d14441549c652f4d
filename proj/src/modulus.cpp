#include "recipmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <unordered_set>

#include "electrical_flow.hpp"
#include "recipmod/shortest_path.hpp"

namespace recipmod {

std::string ModulusValue::to_string() const {
  if (infinite) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

const char* to_string(ModulusStatus s) {
  switch (s) {
    case ModulusStatus::kCertified: return "certified";
    case ModulusStatus::kNotCertified: return "not_certified";
    case ModulusStatus::kEmptyFamily: return "empty_family";
    case ModulusStatus::kInfinite: return "infinite";
  }
  return "?";
}

double ModulusResult::relative_gap() const {
  if (status != ModulusStatus::kCertified &&
      status != ModulusStatus::kNotCertified) {
    return 0.0;
  }
  if (primal_value <= 0.0) return 0.0;
  return (primal_value - dual_value) / primal_value;
}

double zero_area_cap(const MetricMesh& mesh) {
  const double lmin = mesh.min_positive_length();
  return lmin > 0.0 ? 1e6 / lmin : 1e6;
}

std::vector<double> rho_weights(const MetricMesh& mesh, const Density& density) {
  std::vector<double> w(mesh.num_edges());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = density.values[e] * mesh.length(e);
  return w;
}

double energy(const MetricMesh& mesh, const Density& density,
              const std::vector<char>& ambient) {
  const auto area = edge_areas_within(mesh, ambient);
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double a = area[e];
    if (a > 0.0) s += density.values[e] * density.values[e] * a;
  }
  return s;
}

double rho_length(const MetricMesh& mesh, const Density& density,
                  const std::vector<EdgeId>& path) {
  double s = 0.0;
  for (EdgeId e : path) s += density.values[e] * mesh.length(e);
  return s;
}

namespace {

struct OracleRun {
  PathTree tree;
  double min_length = kInf;
  VertexId best_sink = -1;
};

std::vector<char> mask_of(const MetricMesh& mesh, const std::vector<VertexId>& vs) {
  std::vector<char> m(mesh.num_vertices(), 0);
  for (VertexId v : vs) m[v] = 1;
  return m;
}

OracleRun run_oracle(const MetricMesh& mesh, const FamilySpec& family,
                     const std::vector<char>& sink_mask,
                     const std::vector<double>& weights) {
  OracleRun run;
  SearchScope scope;
  scope.ambient = &family.ambient;
  scope.terminal = &sink_mask;
  run.tree = shortest_paths(mesh, family.source, weights, scope);
  for (VertexId v : family.sink) {
    if (!run.tree.reached(v)) continue;
    const double d = run.tree.dist[v];
    if (run.best_sink < 0 || d < run.min_length ||
        (d == run.min_length &&
         (run.tree.hops[v] < run.tree.hops[run.best_sink] ||
          (run.tree.hops[v] == run.tree.hops[run.best_sink] && v < run.best_sink)))) {
      run.min_length = d;
      run.best_sink = v;
    }
  }
  return run;
}

// Active-set state of the dual coordinate ascent. The flow F(e) is the sum of
// the multipliers of the active paths through e; the density it induces is
// rho(e) = F(e) length(e) / (2 area(e)), so the rho-length of a path is
// sum_e F(e) r(e) with r(e) = length(e)^2 / (2 area(e)), area being
// edge_area restricted to the family's ambient set.
class ActiveSet {
 public:
  ActiveSet(const MetricMesh& mesh, const FamilySpec& family,
            std::vector<double> area, double relaxation)
      : mesh_(mesh),
        area_(std::move(area)),
        r_(mesh.num_edges(), 0.0),
        flow_(mesh.num_edges(), 0.0),
        capped_(mesh.num_edges(), 0),
        cap_(zero_area_cap(mesh)),
        omega_(relaxation) {
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      const double a = area_[e];
      const double len = mesh.length(e);
      const bool inside = family.allows(mesh.edge(e).a) && family.allows(mesh.edge(e).b);
      if (a > 0.0) {
        r_[e] = len * len / (2.0 * a);
      } else if (len > 0.0 && inside) {
        capped_[e] = 1;
      }
    }
  }

  std::vector<double> weights() const {
    std::vector<double> w(flow_.size());
    for (std::size_t e = 0; e < w.size(); ++e) {
      w[e] = capped_[e] ? cap_ * mesh_.length(e) : flow_[e] * r_[e];
    }
    return w;
  }

  Density density() const {
    Density rho(flow_.size());
    for (std::size_t e = 0; e < flow_.size(); ++e) {
      const double a = area_[e];
      if (capped_[e]) {
        rho[e] = cap_;
      } else if (a > 0.0) {
        rho[e] = flow_[e] * mesh_.length(e) / (2.0 * a);
      }
    }
    return rho;
  }

  // Energy of the induced density: 1/2 sum_e r(e) F(e)^2.
  double energy() const {
    double s = 0.0;
    for (std::size_t e = 0; e < flow_.size(); ++e) s += r_[e] * flow_[e] * flow_[e];
    return 0.5 * s;
  }

  double multiplier_sum() const {
    double s = 0.0;
    for (double l : lambda_) s += l;
    return s;
  }

  bool add(std::vector<EdgeId> path, double multiplier = 0.0) {
    double q = 0.0;
    for (EdgeId e : path) q += r_[e];
    if (!(q > 0.0)) return false;
    if (!keys_.insert(key_of(path)).second) return false;
    if (multiplier > 0.0) {
      for (EdgeId e : path) flow_[e] += multiplier;
    }
    paths_.push_back(std::move(path));
    inv_q_.push_back(1.0 / q);
    lambda_.push_back(multiplier);
    return true;
  }

  // Projected coordinate ascent on the restricted dual until every active
  // constraint is satisfied within tol (tight where the multiplier is
  // positive). Returns the final maximum residual.
  double solve(double tol, int max_sweeps) {
    double worst = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      worst = 0.0;
      const bool forward = (sweep % 2) == 0;
      const std::size_t np = paths_.size();
      for (std::size_t k = 0; k < np; ++k) {
        const std::size_t p = forward ? k : np - 1 - k;
        const auto& path = paths_[p];
        double s = 0.0;
        for (EdgeId e : path) s += r_[e] * flow_[e];
        const double resid = 1.0 - s;
        const double viol = lambda_[p] > 0.0 ? std::abs(resid) : std::max(0.0, resid);
        worst = std::max(worst, viol);
        const double next = std::max(0.0, lambda_[p] + omega_ * resid * inv_q_[p]);
        const double delta = next - lambda_[p];
        if (delta != 0.0) {
          lambda_[p] = next;
          for (EdgeId e : path) flow_[e] += delta;
        }
      }
      if (worst <= tol) break;
    }
    return worst;
  }

  void drop_inactive() {
    std::size_t out = 0;
    for (std::size_t p = 0; p < paths_.size(); ++p) {
      if (lambda_[p] > 0.0) {
        if (out != p) {
          paths_[out] = std::move(paths_[p]);
          inv_q_[out] = inv_q_[p];
          lambda_[out] = lambda_[p];
        }
        ++out;
      } else {
        keys_.erase(key_of(paths_[p]));
      }
    }
    paths_.resize(out);
    inv_q_.resize(out);
    lambda_.resize(out);
  }

  std::size_t size() const { return paths_.size(); }
  const std::vector<std::vector<EdgeId>>& paths() const { return paths_; }
  const std::vector<double>& multipliers() const { return lambda_; }

 private:
  const MetricMesh& mesh_;
  std::vector<double> area_;
  std::vector<double> r_;
  std::vector<double> flow_;
  std::vector<char> capped_;
  double cap_;
  double omega_;
  std::vector<std::vector<EdgeId>> paths_;
  std::vector<double> inv_q_;
  std::vector<double> lambda_;
  // Hashes of the active edge multisets. A collision only suppresses a
  // duplicate-looking constraint; certificates are unaffected.
  std::unordered_set<std::uint64_t> keys_;

  static std::uint64_t key_of(const std::vector<EdgeId>& path) {
    std::vector<EdgeId> sorted = path;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (EdgeId e : sorted) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(e));
      h *= 1099511628211ULL;
    }
    return h;
  }
};

ModulusResult trivial_result(const MetricMesh& mesh, ModulusStatus status) {
  ModulusResult res;
  res.status = status;
  res.density = Density(mesh.num_edges());
  res.value = status == ModulusStatus::kInfinite ? ModulusValue::infinity()
                                                 : ModulusValue::finite(0.0);
  return res;
}

}  // namespace

ViolatingPath shortest_violating_path(const MetricMesh& mesh,
                                      const FamilySpec& family,
                                      const Density& density) {
  family.validate(mesh);
  const auto sink_mask = mask_of(mesh, family.sink);
  const auto run = run_oracle(mesh, family, sink_mask, rho_weights(mesh, density));
  if (run.best_sink < 0) throw FamilyEmpty();
  ViolatingPath out;
  out.edges = run.tree.edges_to(mesh, run.best_sink);
  out.vertices = run.tree.vertices_to(mesh, run.best_sink);
  out.rho_length = run.min_length;
  return out;
}

ModulusResult solve_modulus(const MetricMesh& mesh, const FamilySpec& family,
                            const ModulusOptions& options) {
  family.validate(mesh);
  if (!(options.eps_adm > 0.0 && options.eps_adm < 1.0) ||
      !(options.eps_gap > 0.0 && options.eps_gap < 1.0)) {
    throw InvalidInput("tolerances must lie in (0, 1)");
  }
  if (!(options.relaxation > 0.0 && options.relaxation < 2.0)) {
    throw InvalidInput("relaxation must lie in (0, 2)");
  }
  const auto sink_mask = mask_of(mesh, family.sink);

  // Degenerate families: nothing to join, or a curve of zero length.
  {
    const auto run = run_oracle(mesh, family, sink_mask, length_weights(mesh));
    if (run.best_sink < 0) return trivial_result(mesh, ModulusStatus::kEmptyFamily);
    if (run.min_length == 0.0) return trivial_result(mesh, ModulusStatus::kInfinite);
  }

  const long long max_iter =
      options.max_iter > 0 ? options.max_iter
                           : 50LL * static_cast<long long>(mesh.num_edges());
  const double tight = std::min(options.eps_adm, options.eps_gap);
  double inner_tol = 0.1 * tight;
  const int max_sweeps = 20000;

  const auto area = edge_areas_within(mesh, family.ambient);
  ActiveSet active(mesh, family, area, options.relaxation);
  if (options.warm_start) {
    auto seed = detail::electrical_path_flow(mesh, family, area);
    for (std::size_t p = 0; p < seed.paths.size(); ++p) {
      active.add(std::move(seed.paths[p]), seed.amounts[p]);
    }
  }
  ModulusResult res;
  res.status = ModulusStatus::kNotCertified;
  long long iter = 0;
  for (; iter < max_iter; ++iter) {
    const auto run = run_oracle(mesh, family, sink_mask, active.weights());
    const double e = active.energy();
    const double dual = active.multiplier_sum() - e;
    const double primal =
        run.min_length > 0.0 ? e / (run.min_length * run.min_length) : kInf;
    res.primal_value = primal;
    res.dual_value = dual;
    res.min_length = run.min_length;
    if (run.min_length >= 1.0 - options.eps_adm && primal - dual <= options.eps_gap * primal) {
      res.status = ModulusStatus::kCertified;
      break;
    }

    // Violated sinks, most violated first.
    std::vector<VertexId> violated;
    for (VertexId v : family.sink) {
      if (run.tree.reached(v) && run.tree.dist[v] < 1.0 - inner_tol) violated.push_back(v);
    }
    std::sort(violated.begin(), violated.end(), [&](VertexId a, VertexId b) {
      if (run.tree.dist[a] != run.tree.dist[b]) return run.tree.dist[a] < run.tree.dist[b];
      return a < b;
    });
    const std::size_t limit = options.batch > 0 ? options.batch : violated.size();
    std::size_t added = 0;
    for (VertexId v : violated) {
      if (added >= limit) break;
      if (active.add(run.tree.edges_to(mesh, v))) ++added;
    }
    if (added == 0) {
      // Every path is nearly tight; the remaining gap comes from the inner
      // solve, so tighten it.
      if (inner_tol < 1e-15) break;
      inner_tol *= 0.25;
    }
    active.solve(inner_tol, max_sweeps);
    active.drop_inactive();
  }
  res.iterations = iter;

  // Rescale to an exactly admissible density (as evaluated by the oracle).
  Density rho = active.density();
  auto scale_positive = [&](double f) {
    for (std::size_t e = 0; e < rho.size(); ++e) {
      if (area[e] > 0.0) rho[e] *= f;
    }
  };
  auto oracle_min = [&]() {
    return run_oracle(mesh, family, sink_mask, rho_weights(mesh, rho)).min_length;
  };
  double m = oracle_min();
  if (m > 0.0 && m < 1.0) {
    scale_positive(1.0 / m);
    for (int k = 0; k < 8; ++k) {
      m = oracle_min();
      if (m >= 1.0) break;
      scale_positive(std::nextafter(1.0 / m, kInf) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()));
    }
  }
  res.min_length = m;
  res.density = std::move(rho);
  res.primal_value = energy(mesh, res.density, family.ambient);
  res.dual_value = active.multiplier_sum() - active.energy();
  res.value = ModulusValue::finite(res.primal_value);
  res.active_paths = active.paths();
  res.multipliers = active.multipliers();
  return res;
}

Certificate certify(const ModulusResult& result, const MetricMesh& mesh,
                    const FamilySpec& family, const ModulusOptions& options) {
  Certificate c;
  if (result.status == ModulusStatus::kEmptyFamily ||
      result.status == ModulusStatus::kInfinite) {
    c.admissible = c.gap_ok = c.slackness_ok = true;
    c.min_length = result.status == ModulusStatus::kInfinite ? 0.0 : kInf;
    return c;
  }
  family.validate(mesh);
  const auto sink_mask = mask_of(mesh, family.sink);
  const auto run = run_oracle(mesh, family, sink_mask, rho_weights(mesh, result.density));
  c.min_length = run.min_length;
  c.admissible = run.min_length >= 1.0 - options.eps_adm;
  c.primal = energy(mesh, result.density, family.ambient);
  const auto area = edge_areas_within(mesh, family.ambient);

  // Lagrangian dual: sum(lambda) - 1/2 sum_e r(e) F(e)^2.
  std::vector<double> flow(mesh.num_edges(), 0.0);
  double lambda_sum = 0.0;
  for (std::size_t p = 0; p < result.active_paths.size(); ++p) {
    lambda_sum += result.multipliers[p];
    for (EdgeId e : result.active_paths[p]) flow[e] += result.multipliers[p];
  }
  double quad = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const double a = area[e];
    if (a > 0.0) {
      const double len = mesh.length(e);
      quad += len * len / (2.0 * a) * flow[e] * flow[e];
    }
  }
  c.dual = lambda_sum - 0.5 * quad;
  c.relative_gap = c.primal > 0.0 ? (c.primal - c.dual) / c.primal : 0.0;
  c.gap_ok = c.relative_gap <= options.eps_gap && c.relative_gap >= -options.eps_gap;

  double worst = 0.0;
  for (std::size_t p = 0; p < result.active_paths.size(); ++p) {
    if (result.multipliers[p] <= 0.0) continue;
    const double len = rho_length(mesh, result.density, result.active_paths[p]);
    worst = std::max(worst, std::abs(len - 1.0));
  }
  c.slackness_residual = worst;
  c.slackness_ok = worst <= 4.0 * (options.eps_adm + options.eps_gap);
  return c;
}

}  // namespace recipmod
