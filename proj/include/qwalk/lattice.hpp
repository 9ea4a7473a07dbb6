#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwalk/covering.hpp"

namespace qwalk {

/// Lattice states use the cell-major layout: entry cell * |D0| + e holds the
/// amplitude of the arc (x, e) leaving cell x along quotient arc e.
using LatticeState = ArcState;

LatticeState lattice_delta(const CoveringGraph& cov, int cell, ArcId quotient_arc);
/// Converts between cell-major amplitudes and covering-graph arc ids.
ArcState to_cover_arcs(const CoveringGraph& cov, const LatticeState& psi);
LatticeState from_cover_arcs(const CoveringGraph& cov, const ArcState& psi);

/// Lift of a closed walk given as quotient arcs, started at (cell, o(arcs[0])).
/// Returns the lifted arcs as (cell, quotient arc) pairs; throws if it does not close.
std::vector<std::pair<int, ArcId>> lift_closed_walk(const CoveringGraph& cov, int cell,
                                                    const std::vector<ArcId>& quotient_arcs);
/// Normalized gamma (or tau, for even length) vector of a lifted closed walk.
LatticeState cycle_state(const CoveringGraph& cov, int cell, const std::vector<ArcId>& quotient_arcs,
                         bool tau = false);

/// Grover walk on a torus covering, applied arc-locally: coin at every
/// vertex, then the flip-flop shift. The |D| x |D| matrix is never formed.
/// Only cells that can carry amplitude (the support grown by one shift per
/// step) are visited.
class LatticeWalker {
 public:
  explicit LatticeWalker(const CoveringGraph& cov);

  void advance(LatticeState& psi, int steps = 1);
  const CoveringGraph& covering() const { return cov_; }

 private:
  void step_active(const LatticeState& in, LatticeState& out);
  int target_cell(int cell, ArcId f) const;

  const CoveringGraph& cov_;
  std::vector<int> stride_;
  std::vector<unsigned char> live_;   // cells that may be non-zero in the current state
  std::vector<unsigned char> stale_;  // cells that may be non-zero in scratch_
  LatticeState scratch_;
};

/// mu(x) = sum over arcs leaving cell x of |psi|^2.
RVector cell_distribution(const CoveringGraph& cov, const LatticeState& psi);

struct LatticeDistribution {
  int step = 0;
  RVector mass;
};

struct SimulationResult {
  std::vector<LatticeDistribution> records;
  LatticeState final_state;
  double norm_drift = 0.0;
  std::optional<std::string> warning;  // set when n_max exceeds the wrap-free bound
};

/// Largest group speed over the bands of the quotient (1/sqrt(d) on Z^d).
double max_group_speed(const QuotientSpec& spec);
/// Largest n with n * max speed < N / 2.
int wrap_free_steps(const CoveringGraph& cov);
/// N = ceil(2 n v_max + 8).
int auto_torus_side(const QuotientSpec& spec, int n_max);

/// Evolves psi0 for n_max steps, recording mu_n at the listed steps.
/// Throws NumericalPathology if the norm drifts by more than 1e-9.
SimulationResult simulate(const CoveringGraph& cov, const LatticeState& psi0, int n_max,
                          const std::vector<int>& record);

struct TimeAveragedMeasure {
  RVector mass;       // (1/T) sum_{n < T} mu_n
  int horizon = 0;
  double tail_delta = 0.0;  // || avg_T - avg_{T/2} ||_1
};

TimeAveragedMeasure time_averaged_measure(const CoveringGraph& cov, const LatticeState& psi0, int horizon);

/// Uniform mixture of delta_(origin, e) over all quotient arcs e.
struct MixedEnsemble {
  std::vector<std::pair<int, ArcId>> members;
  std::vector<double> weights;
};

MixedEnsemble origin_ensemble(const CoveringGraph& cov);

/// Ensemble-averaged distributions at the recorded steps with exact weights.
/// For the Z^d origin ensemble one run is made and the other members are its
/// images under the lattice symmetries; otherwise every member is run.
std::vector<LatticeDistribution> simulate_ensemble(const CoveringGraph& cov, const MixedEnsemble& ensemble,
                                                   const std::vector<int>& record);
/// One run per member, no symmetry reduction.
std::vector<LatticeDistribution> simulate_ensemble_direct(const CoveringGraph& cov, const MixedEnsemble& ensemble,
                                                          const std::vector<int>& record);

struct SpreadObservables {
  double second_moment = 0.0;  // sum |x/n|^2 mu(x)
  double atom_mass = 0.0;      // mass with |x| <= eps n
  double outside_mass = 0.0;   // mass with |x| > (1/sqrt(d) + eps) n
};

SpreadObservables spread_observables(const CoveringGraph& cov, const RVector& mu, int n, double eps);
SpreadObservables moments_and_atom(const CoveringGraph& cov, const MixedEnsemble& ensemble, int n,
                                   double eps = 0.05);

/// Smallest radius r (in cells) with mass(|x| <= r) >= q.
double quantile_radius(const CoveringGraph& cov, const RVector& mu, double q);
/// sum mu(x) cos(<xi, x> / n).
double empirical_characteristic(const CoveringGraph& cov, const RVector& mu, const RVector& xi, int n);

/// Centred coordinates of a cell as a real vector.
RVector cell_position(const CoveringGraph& cov, int cell);

}  // namespace qwalk
