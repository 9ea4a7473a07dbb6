#pragma once

#include <random>
#include <string>
#include <vector>

#include "qwalk/graph.hpp"

namespace qwalk {

/// Seeded instance generators shared by the acceptance suite and the tests.
namespace instances {

using Rng = std::mt19937_64;

/// Random spanning tree on 2..max_vertices vertices plus extra edges
/// (parallel edges allowed, self-loops with probability `loop_rate`).
SymmetricDigraph random_connected_graph(Rng& rng, int max_vertices, double loop_rate = 0.1, int min_extra = 0);
/// Weights with random moduli and phases, normalized per vertex, and a uniform random 1-form.
WalkData random_walk_data(const SymmetricDigraph& g, Rng& rng);
/// Weights |w(e)|^2 = c(edge) / sum_{o(f) = o(e)} c(f) for random conductances c, random phases.
std::vector<Cx> reversible_weights(const SymmetricDigraph& g, Rng& rng);
/// Weights with independent random moduli per arc, random phases.
std::vector<Cx> generic_weights(const SymmetricDigraph& g, Rng& rng);
/// Detailed balance test through a potential built along a spanning tree.
bool tree_potential_reversible(const SymmetricDigraph& g, const std::vector<Cx>& w, double tol = 1e-9);

}  // namespace instances

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;
};

/// Criterion ids of a named suite: spectral, crystal, lattice, weak-limits or all.
std::vector<int> suite_criteria(const std::string& suite);
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids);
std::string format_result(const CriterionResult& r);

}  // namespace qwalk
