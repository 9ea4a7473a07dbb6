#include "qwalk/acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#include "qwalk/crystal.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"
#include "qwalk/weak_limits.hpp"

namespace qwalk {

namespace instances {

SymmetricDigraph random_connected_graph(Rng& rng, int max_vertices, double loop_rate, int min_extra) {
  std::uniform_int_distribution<int> nv(2, std::max(2, max_vertices));
  const int v = nv(rng);
  EdgeList edges;
  for (int i = 1; i < v; ++i) edges.emplace_back(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
  const int extra = std::uniform_int_distribution<int>(min_extra, std::max(min_extra, v + 2))(rng);
  std::uniform_int_distribution<int> pick(0, v - 1);
  std::bernoulli_distribution loop(loop_rate);
  for (int j = 0; j < extra; ++j) {
    const int a = pick(rng);
    if (loop(rng)) {
      edges.emplace_back(a, a);
      continue;
    }
    int b = pick(rng);
    while (b == a) b = pick(rng);
    edges.emplace_back(a, b);
  }
  return build_graph(edges, v);
}

namespace {

std::vector<Cx> normalized_weights(const SymmetricDigraph& g, const std::vector<double>& modulus_sq, Rng& rng) {
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::vector<double> total(g.vertex_count(), 0.0);
  for (ArcId e = 0; e < g.arc_count(); ++e) total[g.origin(e)] += modulus_sq[e];
  std::vector<Cx> w(g.arc_count());
  for (ArcId e = 0; e < g.arc_count(); ++e) w[e] = std::polar(std::sqrt(modulus_sq[e] / total[g.origin(e)]), phase(rng));
  return w;
}

}  // namespace

WalkData random_walk_data(const SymmetricDigraph& g, Rng& rng) {
  const auto w = generic_weights(g, rng);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::vector<double> theta(g.edge_count());
  for (double& t : theta) t = angle(rng);
  return WalkData(g, w, theta);
}

std::vector<Cx> reversible_weights(const SymmetricDigraph& g, Rng& rng) {
  std::uniform_real_distribution<double> cond(0.2, 2.0);
  std::vector<double> m(g.arc_count());
  for (int i = 0; i < g.edge_count(); ++i) m[2 * i] = m[2 * i + 1] = cond(rng);
  return normalized_weights(g, m, rng);
}

std::vector<Cx> generic_weights(const SymmetricDigraph& g, Rng& rng) {
  std::uniform_real_distribution<double> mod(0.2, 2.0);
  std::vector<double> m(g.arc_count());
  for (double& x : m) x = mod(rng);
  return normalized_weights(g, m, rng);
}

bool tree_potential_reversible(const SymmetricDigraph& g, const std::vector<Cx>& w, double tol) {
  // pi(t(e)) = pi(o(e)) |w(e)|^2 / |w(ebar)|^2 along a BFS tree, then check every edge.
  std::vector<double> pi(g.vertex_count(), -1.0);
  std::vector<VertexId> queue{0};
  pi[0] = 1.0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const VertexId u = queue[h];
    for (ArcId e : g.out_arcs(u)) {
      const VertexId v = g.terminus(e);
      if (pi[v] >= 0.0) continue;
      pi[v] = pi[u] * std::norm(w[e]) / std::norm(w[e ^ 1]);
      queue.push_back(v);
    }
  }
  for (ArcId e = 0; e < g.arc_count(); e += 2) {
    const double lhs = pi[g.origin(e)] * std::norm(w[e]);
    const double rhs = pi[g.terminus(e)] * std::norm(w[e ^ 1]);
    if (std::abs(lhs - rhs) > tol * std::max(lhs, rhs)) return false;
  }
  return true;
}

}  // namespace instances

namespace {

using instances::Rng;
constexpr unsigned long long kSeed = 20240611ULL;

CriterionResult make_result(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int count_near(const std::vector<Cx>& values, Cx target, double tol) {
  int n = 0;
  for (const Cx& z : values)
    if (std::abs(z - target) < tol) ++n;
  return n;
}

CriterionResult spectral_mapping() {
  CriterionResult r = make_result(1, "spectral mapping");
  Rng rng(kSeed + 1);
  double worst = 0.0;
  int bad_flat = 0;
  for (int i = 0; i < 100; ++i) {
    const auto g = instances::random_connected_graph(rng, 12);
    const auto data = instances::random_walk_data(g, rng);
    const auto direct = unitary_eigenvalues(build_evolution(g, data));
    const RVector st = hermitian_eigenvalues(discriminant(g, data));
    const auto mapped = spectral_map(st, g.edge_count(), g.vertex_count());
    worst = std::max(worst, multiset_distance(direct, mapped));
    const auto [mp, mm] = unit_multiplicities(st);
    const int e = g.edge_count(), v = g.vertex_count();
    if (count_near(direct, 1.0, 1e-6) != mp + std::max(0, e - v + mp)) ++bad_flat;
    if (count_near(direct, -1.0, 1e-6) != mm + std::max(0, e - v + mm)) ++bad_flat;
  }
  r.pass = worst < 1e-8 && bad_flat == 0;
  r.detail = "max multiset distance " + fmt("%.2e", worst) + " over 100 graphs, flat-count mismatches " +
             std::to_string(bad_flat);
  return r;
}

CriterionResult cycle_eigenspaces_check() {
  CriterionResult r = make_result(2, "cycle eigenspaces");
  Rng rng(kSeed + 2);
  double worst = 0.0;
  int dim_fail = 0;
  for (int i = 0; i < 50; ++i) {
    const auto g = instances::random_connected_graph(rng, 10);
    const auto data = WalkData::grover(g);
    const CMatrix u = build_evolution(g, data);
    const auto ops = boundary_operators(g, data);
    const auto basis = cycle_eigenspaces(g);
    for (const auto& v : basis.plus)
      worst = std::max({worst, (u * v - v).norm(), (ops.d_a * v).norm(), (ops.d_b * v).norm()});
    for (const auto& v : basis.minus)
      worst = std::max({worst, (u * v + v).norm(), (ops.d_a * v).norm(), (ops.d_b * v).norm()});
    const int rank = g.edge_count() - g.vertex_count() + 1;
    if (span_rank(basis.plus) != rank) ++dim_fail;
    if (span_rank(basis.minus) != rank - 1 + (is_bipartite(g) ? 1 : 0)) ++dim_fail;
  }
  r.pass = worst < 1e-12 && dim_fail == 0;
  r.detail = "max residual " + fmt("%.2e", worst) + ", dimension mismatches " + std::to_string(dim_fail);
  return r;
}

CriterionResult reversibility() {
  CriterionResult r = make_result(3, "reversibility one-form");
  Rng rng(kSeed + 3);
  double worst_gap = 0.0;
  int failures = 0;
  for (int i = 0; i < 50; ++i) {
    const auto g = instances::random_connected_graph(rng, 10);
    const auto w = instances::reversible_weights(g, rng);
    if (!instances::tree_potential_reversible(g, w)) ++failures;
    const auto theta = reversibility_one_form(g, w);
    if (!theta) {
      ++failures;
      continue;
    }
    const RVector st = hermitian_eigenvalues(discriminant(g, WalkData(g, w, *theta)));
    const double top = st.maxCoeff();
    worst_gap = std::max(worst_gap, std::abs(1.0 - top));
    if (top < 1.0 - 1e-9 || top > 1.0 + 1e-9) ++failures;
  }
  int detected = 0;
  for (int i = 0; i < 20; ++i) {
    SymmetricDigraph g;
    std::vector<Cx> w;
    do {
      g = instances::random_connected_graph(rng, 10, 0.1, 1);
      w = instances::generic_weights(g, rng);
    } while (instances::tree_potential_reversible(g, w));
    if (!reversibility_one_form(g, w)) ++detected;
  }
  r.pass = failures == 0 && detected == 20;
  r.detail = "reversible: max |1 - max spec T| " + fmt("%.2e", worst_gap) + ", failures " + std::to_string(failures) +
             "; non-reversible reported absent " + std::to_string(detected) + "/20";
  return r;
}

LatticeState random_state(Rng& rng, Eigen::Index size) {
  std::normal_distribution<double> n01;
  LatticeState psi(size);
  for (Eigen::Index i = 0; i < size; ++i) psi[i] = Cx(n01(rng), n01(rng));
  return psi / psi.norm();
}

CriterionResult fourier_equivalence() {
  CriterionResult r = make_result(4, "fourier equivalence");
  Rng rng(kSeed + 4);
  auto sq = std::make_shared<const QuotientSpec>(square_lattice(2));
  auto hex = std::make_shared<const QuotientSpec>(hexagonal_lattice());
  const CoveringGraph c1(sq, 16), c2(hex, 8);
  const double d1 = fourier_equivalence_check(c1, random_state(rng, c1.graph().arc_count()), 30);
  const double d2 = fourier_equivalence_check(c2, random_state(rng, c2.graph().arc_count()), 20);
  r.pass = d1 < 1e-10 && d2 < 1e-10;
  r.detail = "Z^2 N=16 n=30: " + fmt("%.2e", d1) + ", hexagonal N=8 n=20: " + fmt("%.2e", d2);
  return r;
}

RVector kpt(double a, double b) {
  RVector k(2);
  k << a, b;
  return k;
}

CriterionResult critical_point_sets() {
  CriterionResult r = make_result(5, "critical points");
  struct Case {
    std::string name;
    std::vector<RVector> expected, excluded;
  };
  const double p = kPi, t = 2 * kPi / 3;
  const std::vector<Case> cases = {
      {"zd", {kpt(0, p), kpt(p, 0)}, {kpt(0, 0), kpt(p, p)}},
      {"triangular", {kpt(0, p), kpt(p, 0), kpt(t, t), kpt(-t, -t), kpt(p, p)}, {kpt(0, 0)}},
      {"hexagonal", {kpt(p, -p), kpt(-p, p), kpt(0, p), kpt(0, -p), kpt(p, 0), kpt(-p, 0)},
       {kpt(0, 0), kpt(t, -t), kpt(-t, t)}},
  };
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    const auto bs = band_structure(std::make_shared<const QuotientSpec>(lattice_preset(c.name, 2)), 64);
    const auto found = critical_points(bs);
    int unexpected = 0, missing = 0, excluded_hit = 0;
    for (const auto& cp : found.points) {
      bool match = false;
      for (const auto& e : c.expected) match = match || k_distance(cp.k, e) < 1e-6;
      if (!match) ++unexpected;
      for (const auto& e : c.excluded)
        if (k_distance(cp.k, e) < 1e-6) ++excluded_hit;
    }
    for (const auto& e : c.expected) {
      bool match = false;
      for (const auto& cp : found.points) match = match || k_distance(cp.k, e) < 1e-6;
      if (!match) ++missing;
    }
    ok = ok && unexpected == 0 && missing == 0 && excluded_hit == 0 && found.unrefined.empty();
    os << c.name << ": " << found.points.size() << " found, " << missing << " missing, " << unexpected
       << " unexpected, " << excluded_hit << " excluded present; ";
  }
  r.pass = ok;
  r.detail = os.str();
  return r;
}

CriterionResult hessian_check() {
  CriterionResult r = make_result(6, "hessian determinant");
  Rng rng(kSeed + 6);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  double worst = 0.0;
  for (int d = 2; d <= 4; ++d) {
    const QuotientSpec spec = square_lattice(d);
    int accepted = 0;
    while (accepted < 100) {
      RVector k(d);
      for (int j = 0; j < d; ++j) k[j] = angle(rng);
      const double c = k.array().cos().mean();
      if (std::sqrt(1.0 - c * c) < 0.2) continue;
      const double exact = det_hessian_formula(k);
      if (std::abs(exact) < 1e-2) continue;
      const double fd = hessian(spec, k, 0).determinant();
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
      ++accepted;
    }
  }
  double crit = 0.0;
  for (const auto& k : {kpt(0, kPi), kpt(kPi, 0)}) crit = std::max(crit, std::abs(std::abs(det_hessian_formula(k)) - 0.25));
  r.pass = worst < 1e-5 && crit < 1e-8;
  r.detail = "max relative error " + fmt("%.2e", worst) + " over 300 points, ||det| - 1/4| at critical points " +
             fmt("%.2e", crit);
  return r;
}

struct EnsembleRun {
  std::shared_ptr<CoveringGraph> cov;
  std::vector<LatticeDistribution> dist;
};

const EnsembleRun& ensemble_run(int d, int n_size, const std::vector<int>& record) {
  static std::map<std::pair<int, std::vector<int>>, EnsembleRun> cache;
  auto key = std::make_pair(d * 100000 + n_size, record);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto spec = std::make_shared<const QuotientSpec>(square_lattice(d));
  EnsembleRun run;
  run.cov = std::make_shared<CoveringGraph>(spec, auto_torus_side(*spec, n_size), false);
  run.dist = simulate_ensemble(*run.cov, origin_ensemble(*run.cov), record);
  return cache.emplace(key, std::move(run)).first->second;
}

CriterionResult weak_limit_atom() {
  CriterionResult r = make_result(7, "weak-limit atom");
  const auto& r2 = ensemble_run(2, 200, {200});
  const auto& r3 = ensemble_run(3, 150, {150});
  const double a2 = spread_observables(*r2.cov, r2.dist[0].mass, 200, 0.05).atom_mass;
  const double a3 = spread_observables(*r3.cov, r3.dist[0].mass, 150, 0.05).atom_mass;
  r.pass = std::abs(a2 - 0.5) <= 0.05 && std::abs(a3 - 2.0 / 3.0) <= 0.05;
  r.detail = "Z^2 n=200 N=" + std::to_string(r2.cov->side()) + ": " + fmt("%.4f", a2) + " (0.5); Z^3 n=150 N=" +
             std::to_string(r3.cov->side()) + ": " + fmt("%.4f", a3) + " (0.6667)";
  return r;
}

CriterionResult support_ball() {
  CriterionResult r = make_result(8, "support ball");
  const auto& r2 = ensemble_run(2, 200, {200});
  const auto& r3 = ensemble_run(3, 150, {150});
  const double o2 = spread_observables(*r2.cov, r2.dist[0].mass, 200, 0.05).outside_mass;
  const double o3 = spread_observables(*r3.cov, r3.dist[0].mass, 150, 0.05).outside_mass;
  const int res[] = {0, 4096, 512, 96, 28};
  double worst = -1.0;
  for (int d = 1; d <= 4; ++d) worst = std::max(worst, max_velocity_norm(d, res[d]) - 1.0 / std::sqrt(double(d)));
  r.pass = o2 < 0.01 && o3 < 0.01 && worst <= 1e-9;
  r.detail = "outside mass Z^2 " + fmt("%.2e", o2) + ", Z^3 " + fmt("%.2e", o3) + "; max(|grad phi| - 1/sqrt(d)) " +
             fmt("%.2e", worst);
  return r;
}

CriterionResult rho2_check() {
  CriterionResult r = make_result(9, "rho2 closed form");
  const auto norm = rho2_normalization(1e-4);
  const auto ev = rho_d_pushforward(2, 512, 100);
  double worst = 0.0;
  int compared = 0;
  const double hw = ev.half_width, bw = ev.bin_width();
  for (int i = 0; i < ev.bins; ++i)
    for (int j = 0; j < ev.bins; ++j) {
      const double x0 = -hw + i * bw, x1 = x0 + bw, y0 = -hw + j * bw, y1 = y0 + bw;
      bool inside = true;
      for (double x : {x0, x1})
        for (double y : {y0, y1}) inside = inside && x * x + y * y <= 0.5;
      const int idx = i * ev.bins + j;
      if (!inside || ev.mass[idx] <= 1e-4) continue;
      const double exact = rho2_bin_average(x0, x1, y0, y1);
      worst = std::max(worst, std::abs(ev.density(idx) - exact) / exact);
      ++compared;
    }
  const double origin = rho2(0.0, 0.0);
  const bool norm_ok = std::abs(norm.total() - 0.5) <= 1e-3;
  const bool hist_ok = compared > 0 && worst < 0.05;
  const bool origin_ok = std::abs(origin - 2.0 / (kPi * kPi)) <= 1e-12;
  r.pass = norm_ok && hist_ok && origin_ok;
  r.detail = "integral " + fmt("%.6f", norm.total()) + (norm_ok ? " ok" : " FAIL") + "; histogram max rel " +
             fmt("%.4f", worst) + " on " + std::to_string(compared) + " bins" + (hist_ok ? " ok" : " FAIL") +
             "; rho2(0,0) = " + fmt("%.12f", origin) + " vs 2/pi^2 = " + fmt("%.12f", 2.0 / (kPi * kPi)) +
             (origin_ok ? " ok" : " FAIL");
  return r;
}

CriterionResult localization() {
  CriterionResult r = make_result(10, "localization");
  auto spec = std::make_shared<const QuotientSpec>(square_lattice(2));
  const CoveringGraph small(spec, 16, false);
  const LatticeState gamma = cycle_state(small, 0, {0, 2, 1, 3});
  std::vector<int> rec(101);
  for (int n = 0; n <= 100; ++n) rec[n] = n;
  const auto run = simulate(small, gamma, 100, rec);
  double drift = 0.0;
  for (const auto& d : run.records) drift = std::max(drift, (d.mass - run.records[0].mass).cwiseAbs().maxCoeff());

  const CoveringGraph torus(spec, 64, false);
  const auto avg = time_averaged_measure(torus, lattice_delta(torus, 0, 0), 2000);
  const auto pred = flat_band_prediction(*spec, 0, {{0, 0}}, 256);
  const double err = std::abs(avg.mass[0] - pred.time_average[0]);
  r.pass = drift <= 1e-10 && err <= 0.02;
  r.detail = "gamma state max |mu_n - mu_0| " + fmt("%.2e", drift) + "; origin time average " + fmt("%.4f", avg.mass[0]) +
             " vs prediction " + fmt("%.4f", pred.time_average[0]) + " (|(P+ + P-)psi|^2 form " +
             fmt("%.4f", pred.combined[0]) + "), tail delta " + fmt("%.3f", avg.tail_delta);
  return r;
}

CriterionResult linear_spreading() {
  CriterionResult r = make_result(11, "linear spreading");
  std::vector<int> rec;
  for (int n = 50; n <= 400; n += 50) rec.push_back(n);
  const auto& run = ensemble_run(2, 400, rec);
  double m2 = 0.0;
  std::vector<double> xs, ys;
  for (const auto& d : run.dist) {
    if (d.step == 200) m2 = spread_observables(*run.cov, d.mass, 200, 0.05).second_moment;
    xs.push_back(d.step);
    ys.push_back(quantile_radius(*run.cov, d.mass, 0.99));
  }
  const double target = mean_velocity_square(2, 256) / 2.0;
  const double rel = std::abs(m2 - target) / target;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double r2 = vy > 0 ? cov * cov / (vx * vy) : 0.0;
  r.pass = rel <= 0.10 && r2 > 0.99;
  r.detail = "E|X/n|^2 at n=200 " + fmt("%.4f", m2) + " vs k-grid " + fmt("%.4f", target) + " (rel " +
             fmt("%.3f", rel) + "); 0.99-quantile slope " + fmt("%.4f", cov / vx) + ", R^2 " + fmt("%.5f", r2);
  return r;
}

struct Entry {
  CriterionResult (*fn)();
  double budget;
};

const std::map<int, Entry>& registry() {
  static const std::map<int, Entry> reg = {
      {1, {spectral_mapping, 30}},  {2, {cycle_eigenspaces_check, 10}}, {3, {reversibility, 10}},
      {4, {fourier_equivalence, 10}}, {5, {critical_point_sets, 20}},   {6, {hessian_check, 10}},
      {7, {weak_limit_atom, 180}},  {8, {support_ball, 60}},            {9, {rho2_check, 60}},
      {10, {localization, 120}},    {11, {linear_spreading, 120}},
  };
  return reg;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  if (suite == "spectral") return {1, 2, 3};
  if (suite == "crystal") return {4, 5, 6};
  if (suite == "lattice") return {7, 8, 10, 11};
  if (suite == "weak-limits") return {9};
  throw InvalidInput("unknown suite '" + suite + "' (spectral, crystal, lattice, weak-limits, all)");
}

CriterionResult run_criterion(int id) {
  const auto& reg = registry();
  const auto it = reg.find(id);
  if (it == reg.end()) throw InvalidInput("unknown criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = it->second.fn();
  } catch (const Error& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.budget = it->second.budget;
  if (r.seconds > r.budget) {
    r.pass = false;
    r.detail += "; over time budget";
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id));
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%-4s criterion %2d  %-24s %7.2fs / %3.0fs  ", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.budget);
  return head + r.detail;
}

}  // namespace qwalk
