#include "qwalk/walk.hpp"

#include <iomanip>
#include <ostream>

namespace qwalk {

namespace {
Cx phase(double angle) { return std::polar(1.0, angle); }
}  // namespace

BoundaryOperators boundary_operators(const SymmetricDigraph& g, const WalkData& data) {
  const int nv = g.vertex_count();
  const int nd = g.arc_count();
  BoundaryOperators ops{CMatrix::Zero(nv, nd), CMatrix::Zero(nv, nd)};
  for (ArcId e = 0; e < nd; ++e) {
    const VertexId v = g.origin(e);
    ops.d_a(v, e) += std::conj(data.w(e));
    ops.d_b(v, SymmetricDigraph::inverse(e)) += std::conj(data.w(e)) * phase(-data.theta(e));
  }
  return ops;
}

CMatrix shift_operator(const SymmetricDigraph& g, const WalkData& data) {
  const int nd = g.arc_count();
  CMatrix s = CMatrix::Zero(nd, nd);
  for (ArcId e = 0; e < nd; ++e) s(e, SymmetricDigraph::inverse(e)) = phase(-data.theta(e));
  return s;
}

CMatrix coin_operator(const SymmetricDigraph& g, const WalkData& data) {
  const CMatrix d_a = boundary_operators(g, data).d_a;
  return 2.0 * d_a.adjoint() * d_a - CMatrix::Identity(g.arc_count(), g.arc_count());
}

CMatrix build_evolution(const SymmetricDigraph& g, const WalkData& data) {
  CMatrix u = shift_operator(g, data) * coin_operator(g, data);
  if (!is_unitary(u, 1e-10)) throw NumericalPathology("evolution operator failed the unitarity gate");
  return u;
}

CMatrix discriminant(const SymmetricDigraph& g, const WalkData& data) {
  const auto ops = boundary_operators(g, data);
  CMatrix t = ops.d_a * ops.d_b.adjoint();
  if (!is_hermitian(t, 1e-10)) throw NumericalPathology("discriminant failed the Hermiticity gate");
  return t;
}

RMatrix simple_walk_matrix(const SymmetricDigraph& g) {
  RMatrix p = RMatrix::Zero(g.vertex_count(), g.vertex_count());
  for (ArcId e = 0; e < g.arc_count(); ++e) p(g.terminus(e), g.origin(e)) += 1.0 / g.degree(g.origin(e));
  return p;
}

ArcState step(const CMatrix& u, const ArcState& psi) {
  ArcState out = u * psi;
  const double drift = std::abs(out.norm() - psi.norm());
  if (drift > 1e-8) throw NumericalPathology("norm drift " + std::to_string(drift) + " after one step");
  return out;
}

RVector finding_probability(const ArcState& psi, const SymmetricDigraph& g) {
  RVector nu = RVector::Zero(g.vertex_count());
  for (ArcId e = 0; e < g.arc_count(); ++e) nu[g.origin(e)] += std::norm(psi[e]);
  return nu;
}

ArcState delta_arc(const SymmetricDigraph& g, ArcId e) {
  ArcState v = ArcState::Zero(g.arc_count());
  v[e] = 1.0;
  return v;
}

void write_state_csv(std::ostream& out, const ArcState& psi) {
  out << "arc,re,im\n" << std::setprecision(17);
  for (Eigen::Index e = 0; e < psi.size(); ++e) out << e << ',' << psi[e].real() << ',' << psi[e].imag() << '\n';
}

}  // namespace qwalk
