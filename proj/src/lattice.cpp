#include "qwalk/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>

#include "qwalk/crystal.hpp"
#include "qwalk/parallel.hpp"

namespace qwalk {

LatticeState lattice_delta(const CoveringGraph& cov, int cell, ArcId quotient_arc) {
  const int channels = cov.quotient().graph().arc_count();
  if (cell < 0 || cell >= cov.cell_count() || quotient_arc < 0 || quotient_arc >= channels)
    throw InvalidInput("lattice_delta: cell or arc out of range");
  LatticeState psi = LatticeState::Zero(static_cast<Eigen::Index>(cov.cell_count()) * channels);
  psi[static_cast<Eigen::Index>(cell) * channels + quotient_arc] = 1.0;
  return psi;
}

ArcState to_cover_arcs(const CoveringGraph& cov, const LatticeState& psi) {
  const int channels = cov.quotient().graph().arc_count();
  ArcState out(psi.size());
  for (int cell = 0; cell < cov.cell_count(); ++cell)
    for (ArcId e = 0; e < channels; ++e) out[cov.arc_of(cell, e)] = psi[static_cast<Eigen::Index>(cell) * channels + e];
  return out;
}

LatticeState from_cover_arcs(const CoveringGraph& cov, const ArcState& psi) {
  const int channels = cov.quotient().graph().arc_count();
  LatticeState out(psi.size());
  for (int cell = 0; cell < cov.cell_count(); ++cell)
    for (ArcId e = 0; e < channels; ++e) out[static_cast<Eigen::Index>(cell) * channels + e] = psi[cov.arc_of(cell, e)];
  return out;
}

std::vector<std::pair<int, ArcId>> lift_closed_walk(const CoveringGraph& cov, int cell,
                                                    const std::vector<ArcId>& quotient_arcs) {
  const SymmetricDigraph& q = cov.quotient().graph();
  if (quotient_arcs.empty()) throw InvalidInput("closed walk needs at least one arc");
  std::vector<std::pair<int, ArcId>> out;
  int x = cell;
  for (std::size_t j = 0; j < quotient_arcs.size(); ++j) {
    const ArcId e = quotient_arcs[j];
    if (e < 0 || e >= q.arc_count()) throw InvalidInput("closed walk references unknown quotient arc");
    if (j > 0 && q.origin(e) != q.terminus(quotient_arcs[j - 1]))
      throw InvalidInput("closed walk breaks at position " + std::to_string(j));
    out.emplace_back(x, e);
    x = cov.shifted_cell(x, e);
  }
  if (x != cell || q.terminus(quotient_arcs.back()) != q.origin(quotient_arcs.front()))
    throw InvalidInput("lifted walk does not close on the covering");
  return out;
}

LatticeState cycle_state(const CoveringGraph& cov, int cell, const std::vector<ArcId>& quotient_arcs, bool tau) {
  const auto arcs = lift_closed_walk(cov, cell, quotient_arcs);
  if (tau && arcs.size() % 2 != 0) throw InvalidInput("tau state needs an even closed walk");
  const int channels = cov.quotient().graph().arc_count();
  LatticeState psi = LatticeState::Zero(static_cast<Eigen::Index>(cov.cell_count()) * channels);
  for (std::size_t j = 0; j < arcs.size(); ++j) {
    const auto [x, e] = arcs[j];
    const double sign = tau ? (j % 2 == 0 ? -1.0 : 1.0) : 1.0;
    const int y = cov.shifted_cell(x, e);
    psi[static_cast<Eigen::Index>(x) * channels + e] += sign;
    psi[static_cast<Eigen::Index>(y) * channels + (e ^ 1)] += tau ? sign : -sign;
  }
  const double n = psi.norm();
  if (n == 0.0) throw InvalidInput("closed walk has a vanishing cycle vector");
  return psi / n;
}

LatticeWalker::LatticeWalker(const CoveringGraph& cov) : cov_(cov) {
  const int d = cov.dimension();
  const SymmetricDigraph& q = cov.quotient().graph();
  for (ArcId e = 0; e < q.arc_count(); ++e)
    for (int j = 0; j < d; ++j)
      if (std::abs(cov.displacement(e)[j]) >= cov.side()) throw InvalidInput("displacement exceeds the torus side");
  stride_.assign(d, 1);
  for (int j = d - 2; j >= 0; --j) stride_[j] = stride_[j + 1] * cov.side();
}

int LatticeWalker::target_cell(int cell, ArcId f) const {
  const auto& h = cov_.displacement(f);
  const int n = cov_.side();
  int target = cell;
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (h[j] == 0) continue;
    const int c = (cell / stride_[j]) % n;
    int nc = (c + h[j]) % n;
    if (nc < 0) nc += n;
    target += (nc - c) * stride_[j];
  }
  return target;
}

void LatticeWalker::step_active(const LatticeState& in, LatticeState& out) {
  const SymmetricDigraph& q = cov_.quotient().graph();
  const int channels = q.arc_count();
  const int cells = cov_.cell_count();

  // out still holds the state before `in`; its support is flagged in stale_.
  parallel_for(cells, [&](int begin, int end) {
    for (int cell = begin; cell < end; ++cell)
      if (stale_[cell]) {
        std::fill_n(out.data() + static_cast<std::ptrdiff_t>(cell) * channels, channels, Cx(0.0));
        stale_[cell] = 0;
      }
  });

  std::vector<double> coin_scale(q.vertex_count());
  for (VertexId u = 0; u < q.vertex_count(); ++u) coin_scale[u] = 2.0 / q.degree(u);

  parallel_for(cells, [&](int begin, int end) {
    std::vector<Cx> local(channels);
    for (int cell = begin; cell < end; ++cell) {
      if (!live_[cell]) continue;
      const Cx* src = in.data() + static_cast<std::ptrdiff_t>(cell) * channels;
      for (VertexId u = 0; u < q.vertex_count(); ++u) {
        Cx sum = 0.0;
        for (ArcId f : q.out_arcs(u)) sum += src[f];
        sum *= coin_scale[u];
        for (ArcId f : q.out_arcs(u)) local[f] = sum - src[f];
      }
      for (ArcId f = 0; f < channels; ++f) {
        const int target = target_cell(cell, f);
        out[static_cast<Eigen::Index>(target) * channels + (f ^ 1)] = local[f];
        std::atomic_ref<unsigned char>(stale_[target]).store(1, std::memory_order_relaxed);
      }
    }
  });
  // stale_ now flags the support of out; live_ that of in, which becomes the scratch.
  live_.swap(stale_);
}

void LatticeWalker::advance(LatticeState& psi, int steps) {
  const int channels = cov_.quotient().graph().arc_count();
  if (psi.size() != static_cast<Eigen::Index>(cov_.cell_count()) * channels)
    throw InvalidInput("lattice state size does not match the covering");
  if (steps <= 0) return;
  if (scratch_.size() != psi.size()) {
    scratch_ = LatticeState::Zero(psi.size());
    stale_.assign(cov_.cell_count(), 0);
  }
  live_.assign(cov_.cell_count(), 0);
  for (int cell = 0; cell < cov_.cell_count(); ++cell) {
    const Cx* p = psi.data() + static_cast<std::ptrdiff_t>(cell) * channels;
    for (int e = 0; e < channels; ++e)
      if (p[e] != Cx(0.0)) {
        live_[cell] = 1;
        break;
      }
  }
  for (int s = 0; s < steps; ++s) {
    step_active(psi, scratch_);
    psi.swap(scratch_);
  }
}

RVector cell_distribution(const CoveringGraph& cov, const LatticeState& psi) {
  const int channels = cov.quotient().graph().arc_count();
  RVector mu(cov.cell_count());
  for (int cell = 0; cell < cov.cell_count(); ++cell) {
    double s = 0.0;
    for (int e = 0; e < channels; ++e) s += std::norm(psi[static_cast<Eigen::Index>(cell) * channels + e]);
    mu[cell] = s;
  }
  return mu;
}

double max_group_speed(const QuotientSpec& spec) {
  if (spec.is_square_lattice()) return 1.0 / std::sqrt(static_cast<double>(spec.dimension()));
  const int d = spec.dimension();
  const KGrid grid{d, d <= 2 ? 48 : 16, 0.5};
  double vmax = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const RVector k = grid.point(i);
    for (int b = 0; b < spec.graph().vertex_count(); ++b) {
      try {
        vmax = std::max(vmax, group_velocity(spec, k, b).norm());
      } catch (const InvalidInput&) {
      }
    }
  }
  return vmax;
}

int wrap_free_steps(const CoveringGraph& cov) {
  const double v = max_group_speed(cov.quotient());
  if (v <= 0.0) return std::numeric_limits<int>::max();
  return static_cast<int>(std::floor((cov.side() / 2.0) / v - 1e-12));
}

int auto_torus_side(const QuotientSpec& spec, int n_max) {
  return std::max(2, static_cast<int>(std::ceil(2.0 * n_max * max_group_speed(spec) + 8.0)));
}

SimulationResult simulate(const CoveringGraph& cov, const LatticeState& psi0, int n_max, const std::vector<int>& record) {
  const double norm0 = psi0.norm();
  if (std::abs(norm0 - 1.0) > 1e-10) throw InvalidInput("initial state is not normalized");
  if (n_max < 0) throw InvalidInput("step count must be non-negative");
  std::vector<int> steps(record);
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  for (int s : steps)
    if (s < 0 || s > n_max) throw InvalidInput("recorded step " + std::to_string(s) + " outside [0, n_max]");

  SimulationResult res;
  const int safe = wrap_free_steps(cov);
  if (n_max > safe)
    res.warning = "steps exceed the wrap-free bound on this torus (safe n <= " + std::to_string(safe) + ")";

  LatticeWalker walker(cov);
  LatticeState psi = psi0;
  int t = 0;
  for (int s : steps) {
    walker.advance(psi, s - t);
    t = s;
    res.records.push_back({s, cell_distribution(cov, psi)});
  }
  walker.advance(psi, n_max - t);
  res.norm_drift = std::abs(psi.norm() - norm0);
  if (res.norm_drift > 1e-9)
    throw NumericalPathology("norm drift " + std::to_string(res.norm_drift) + " after " + std::to_string(n_max) + " steps");
  res.final_state = std::move(psi);
  return res;
}

TimeAveragedMeasure time_averaged_measure(const CoveringGraph& cov, const LatticeState& psi0, int horizon) {
  if (horizon < 2) throw InvalidInput("time average needs a horizon of at least 2");
  LatticeWalker walker(cov);
  LatticeState psi = psi0;
  RVector sum = RVector::Zero(cov.cell_count());
  RVector half;
  for (int n = 0; n < horizon; ++n) {
    if (n == horizon / 2) half = sum / static_cast<double>(horizon / 2);
    sum += cell_distribution(cov, psi);
    walker.advance(psi, 1);
  }
  const double drift = std::abs(psi.norm() - psi0.norm());
  if (drift > 1e-9) throw NumericalPathology("norm drift " + std::to_string(drift) + " during time average");
  TimeAveragedMeasure m;
  m.mass = sum / static_cast<double>(horizon);
  m.horizon = horizon;
  m.tail_delta = (m.mass - half).lpNorm<1>();
  return m;
}

MixedEnsemble origin_ensemble(const CoveringGraph& cov) {
  MixedEnsemble ens;
  const int channels = cov.quotient().graph().arc_count();
  for (ArcId e = 0; e < channels; ++e) {
    ens.members.emplace_back(0, e);
    ens.weights.push_back(1.0 / channels);
  }
  return ens;
}

namespace {

bool is_symmetric_origin_ensemble(const CoveringGraph& cov, const MixedEnsemble& ensemble) {
  if (!cov.quotient().is_square_lattice()) return false;
  const int channels = cov.quotient().graph().arc_count();
  if (static_cast<int>(ensemble.members.size()) != channels) return false;
  for (int e = 0; e < channels; ++e)
    if (ensemble.members[e] != std::make_pair(0, e) || ensemble.weights[e] != ensemble.weights[0]) return false;
  return true;
}

// mu of the run started at (0, arc e) on Z^d, obtained from the run started at
// (0, arc 0) by the lattice symmetry sending +e_1 to the direction of e.
void add_symmetric_image(const CoveringGraph& cov, const RVector& mu0, ArcId e, double weight, RVector& acc) {
  const int axis = e / 2;
  const bool negative = (e & 1) != 0;
  const int n = cov.side();
  for (int cell = 0; cell < cov.cell_count(); ++cell) {
    auto y = cov.cell_coords(cell);
    if (negative) y[axis] = (n - y[axis]) % n;
    std::swap(y[0], y[axis]);
    acc[cell] += weight * mu0[cov.cell_index(y)];
  }
}

}  // namespace

std::vector<LatticeDistribution> simulate_ensemble(const CoveringGraph& cov, const MixedEnsemble& ensemble,
                                                   const std::vector<int>& record) {
  if (record.empty()) return {};
  const int n_max = *std::max_element(record.begin(), record.end());
  std::vector<LatticeDistribution> avg;
  if (is_symmetric_origin_ensemble(cov, ensemble)) {
    auto run = simulate(cov, lattice_delta(cov, 0, 0), n_max, record);
    for (const auto& r : run.records) {
      LatticeDistribution out{r.step, RVector::Zero(cov.cell_count())};
      for (std::size_t e = 0; e < ensemble.members.size(); ++e)
        add_symmetric_image(cov, r.mass, static_cast<ArcId>(e), ensemble.weights[e], out.mass);
      avg.push_back(std::move(out));
    }
    return avg;
  }
  return simulate_ensemble_direct(cov, ensemble, record);
}

std::vector<LatticeDistribution> simulate_ensemble_direct(const CoveringGraph& cov, const MixedEnsemble& ensemble,
                                                          const std::vector<int>& record) {
  if (record.empty()) return {};
  const int n_max = *std::max_element(record.begin(), record.end());
  std::vector<LatticeDistribution> avg;
  for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
    const auto [cell, e] = ensemble.members[m];
    auto run = simulate(cov, lattice_delta(cov, cell, e), n_max, record);
    if (avg.empty()) {
      avg = run.records;
      for (auto& r : avg) r.mass *= ensemble.weights[m];
    } else {
      for (std::size_t i = 0; i < avg.size(); ++i) avg[i].mass += ensemble.weights[m] * run.records[i].mass;
    }
  }
  return avg;
}

RVector cell_position(const CoveringGraph& cov, int cell) {
  const auto x = cov.cell_coords(cell);
  RVector p(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) p[j] = cov.centered(x[j]);
  return p;
}

SpreadObservables spread_observables(const CoveringGraph& cov, const RVector& mu, int n, double eps) {
  SpreadObservables o;
  const double d = cov.dimension();
  const double outer = (1.0 / std::sqrt(d) + eps) * n;
  for (int cell = 0; cell < cov.cell_count(); ++cell) {
    if (mu[cell] == 0.0) continue;
    const double r = cell_position(cov, cell).norm();
    o.second_moment += mu[cell] * (r / n) * (r / n);
    if (r <= eps * n) o.atom_mass += mu[cell];
    if (r > outer) o.outside_mass += mu[cell];
  }
  return o;
}

SpreadObservables moments_and_atom(const CoveringGraph& cov, const MixedEnsemble& ensemble, int n, double eps) {
  const auto dist = simulate_ensemble(cov, ensemble, {n});
  return spread_observables(cov, dist.front().mass, n, eps);
}

double quantile_radius(const CoveringGraph& cov, const RVector& mu, double q) {
  std::vector<std::pair<double, double>> rm;
  rm.reserve(cov.cell_count());
  for (int cell = 0; cell < cov.cell_count(); ++cell)
    if (mu[cell] > 0.0) rm.emplace_back(cell_position(cov, cell).norm(), mu[cell]);
  std::sort(rm.begin(), rm.end());
  const double total = mu.sum();
  double acc = 0.0;
  for (const auto& [r, m] : rm) {
    acc += m;
    if (acc >= q * total) return r;
  }
  return rm.empty() ? 0.0 : rm.back().first;
}

double empirical_characteristic(const CoveringGraph& cov, const RVector& mu, const RVector& xi, int n) {
  double s = 0.0;
  for (int cell = 0; cell < cov.cell_count(); ++cell)
    if (mu[cell] != 0.0) s += mu[cell] * std::cos(xi.dot(cell_position(cov, cell)) / n);
  return s;
}

}  // namespace qwalk
