#pragma once

#include <iosfwd>
#include <string>

#include "qwalk/graph.hpp"

namespace qwalk {

struct BoundaryOperators {
  CMatrix d_a;  // |V| x |D|
  CMatrix d_b;  // |V| x |D|
};

/// (d_A phi)(v) = sum_{o(e)=v} phi(e) conj(w(e));
/// (d_B phi)(v) = sum_{o(e)=v} phi(ebar) conj(w(e)) exp(-i theta(e)).
BoundaryOperators boundary_operators(const SymmetricDigraph& g, const WalkData& data);

/// (S f)(e) = exp(-i theta(e)) f(ebar).
CMatrix shift_operator(const SymmetricDigraph& g, const WalkData& data);
/// C = 2 d_A^* d_A - I.
CMatrix coin_operator(const SymmetricDigraph& g, const WalkData& data);

/// U = S C. Throws NumericalPathology if U fails the 1e-10 unitarity gate.
CMatrix build_evolution(const SymmetricDigraph& g, const WalkData& data);

/// T = d_A d_B^*. Throws NumericalPathology if T fails the 1e-10 Hermiticity gate.
CMatrix discriminant(const SymmetricDigraph& g, const WalkData& data);

/// Simple-walk transition matrix in the same orientation as T:
/// <delta_v, P delta_u> = #{arcs u->v} / deg(u), so columns sum to one.
RMatrix simple_walk_matrix(const SymmetricDigraph& g);

/// One step psi -> U psi. Throws NumericalPathology on norm drift above 1e-8.
ArcState step(const CMatrix& u, const ArcState& psi);

/// nu(u) = sum_{o(e)=u} |psi(e)|^2.
RVector finding_probability(const ArcState& psi, const SymmetricDigraph& g);

ArcState delta_arc(const SymmetricDigraph& g, ArcId e);

/// Debug dump: one "arc,re,im" row per arc.
void write_state_csv(std::ostream& out, const ArcState& psi);

}  // namespace qwalk
