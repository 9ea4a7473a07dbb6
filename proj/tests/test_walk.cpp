#include <doctest.h>

#include <sstream>

#include "qwalk/acceptance.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;

namespace {

// Dense oracle built entry by entry from the defining formulas.
CMatrix oracle_evolution(const SymmetricDigraph& g, const WalkData& data) {
  const int m = g.arc_count();
  CMatrix u = CMatrix::Zero(m, m);
  for (ArcId e = 0; e < m; ++e)      // output arc
    for (ArcId f = 0; f < m; ++f) {  // input arc
      // (U psi)(e) = exp(-i theta(e)) (C psi)(ebar)
      const ArcId eb = e ^ 1;
      Cx c = (eb == f) ? Cx(-1.0) : Cx(0.0);
      if (g.origin(eb) == g.origin(f)) c += 2.0 * data.w(eb) * std::conj(data.w(f));
      u(e, f) = std::exp(Cx(0, -data.theta(e))) * c;
    }
  return u;
}

ArcState random_state(instances::Rng& rng, int n) {
  std::normal_distribution<double> z;
  ArcState psi(n);
  for (int i = 0; i < n; ++i) psi[i] = Cx(z(rng), z(rng));
  return psi / psi.norm();
}

}  // namespace

TEST_CASE("boundary operator identities on random data") {
  instances::Rng rng(21);
  for (int i = 0; i < 40; ++i) {
    const auto g = instances::random_connected_graph(rng, 12, 0.15);
    const auto data = instances::random_walk_data(g, rng);
    const auto ops = boundary_operators(g, data);
    const int v = g.vertex_count();
    CHECK(max_abs(ops.d_a * ops.d_a.adjoint() - CMatrix::Identity(v, v)) < 1e-12);
    CHECK(max_abs(ops.d_b * ops.d_b.adjoint() - CMatrix::Identity(v, v)) < 1e-12);
    const CMatrix s = shift_operator(g, data);
    CHECK(max_abs(ops.d_b - ops.d_a * s) < 1e-14);
    const CMatrix pa = ops.d_a.adjoint() * ops.d_a, pb = ops.d_b.adjoint() * ops.d_b;
    CHECK(max_abs(pa * pa - pa) < 1e-12);
    CHECK(max_abs(pb * pb - pb) < 1e-12);
    CHECK(max_abs(pa - pa.adjoint()) < 1e-12);
  }
}

TEST_CASE("1-bouquet operators") {
  const auto g = build_graph({{0, 0}}, 1);
  const double k = 0.7;
  const WalkData data(g, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}, {k});
  const auto ops = boundary_operators(g, data);
  CHECK(std::abs(ops.d_a(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(ops.d_a(0, 1) - 1.0 / std::sqrt(2.0)) < 1e-15);
  const CMatrix u = build_evolution(g, data);
  CHECK(std::abs(u(0, 0) - std::exp(Cx(0, -k))) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::exp(Cx(0, k))) < 1e-14);
  CHECK(std::abs(u(0, 1)) < 1e-15);
  CHECK(std::abs(u(1, 0)) < 1e-15);
  const CMatrix t = discriminant(g, data);
  CHECK(t.rows() == 1);
  CHECK(std::abs(t(0, 0) - std::cos(k)) < 1e-15);
}

TEST_CASE("evolution: factorization, involutions, oracle agreement") {
  instances::Rng rng(22);
  for (int i = 0; i < 40; ++i) {
    const auto g = instances::random_connected_graph(rng, 12, 0.15);
    const auto data = instances::random_walk_data(g, rng);
    const CMatrix s = shift_operator(g, data), c = coin_operator(g, data), u = build_evolution(g, data);
    const int m = g.arc_count();
    CHECK(max_abs(s * s - CMatrix::Identity(m, m)) < 1e-12);
    CHECK(max_abs(c * c - CMatrix::Identity(m, m)) < 1e-12);
    CHECK(max_abs(c - c.adjoint()) < 1e-12);
    CHECK(max_abs(u.adjoint() - c * s) < 1e-12);
    CHECK(max_abs(u - oracle_evolution(g, data)) < 1e-12);
    CHECK(is_unitary(u, 1e-10));
    for (const Cx& z : unitary_eigenvalues(u)) CHECK(std::abs(std::abs(z) - 1.0) < 1e-10);
  }
}

TEST_CASE("Grover coin blocks on a regular graph") {
  const auto g = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}}, 4);  // K4, degree 3
  const CMatrix c = coin_operator(g, WalkData::grover(g));
  for (ArcId e = 0; e < g.arc_count(); ++e)
    for (ArcId f = 0; f < g.arc_count(); ++f) {
      const double expect = g.origin(e) == g.origin(f) ? 2.0 / 3.0 - (e == f ? 1.0 : 0.0) : 0.0;
      CHECK(std::abs(c(e, f) - expect) < 1e-15);
    }
}

TEST_CASE("discriminant entries, Hermiticity and norm bound") {
  instances::Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto g = instances::random_connected_graph(rng, 20, 0.1);
    const auto data = instances::random_walk_data(g, rng);
    const CMatrix t = discriminant(g, data);
    CMatrix oracle = CMatrix::Zero(g.vertex_count(), g.vertex_count());
    for (ArcId f = 0; f < g.arc_count(); ++f)
      oracle(g.terminus(f), g.origin(f)) += data.w(f) * std::conj(data.w(f ^ 1)) * std::exp(Cx(0, data.theta(f)));
    CHECK(max_abs(t - oracle) < 1e-12);
    CHECK(is_hermitian(t, 1e-12));
    Eigen::JacobiSVD<CMatrix> svd(t);
    CHECK(svd.singularValues()[0] <= 1.0 + 1e-12);
  }
}

TEST_CASE("4-cycle Grover discriminant") {
  const auto g = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4);
  const CMatrix t = discriminant(g, WalkData::grover(g));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const bool adj = (a - b + 4) % 4 == 1 || (b - a + 4) % 4 == 1;
      CHECK(std::abs(t(a, b) - (adj ? 0.5 : 0.0)) < 1e-15);
    }
  const RVector ev = hermitian_eigenvalues(t);
  const double expect[] = {-1, 0, 0, 1};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ev[i] - expect[i]) < 1e-12);
}

TEST_CASE("Grover discriminant is similar to the simple walk") {
  instances::Rng rng(24);
  for (int i = 0; i < 30; ++i) {
    const auto g = instances::random_connected_graph(rng, 12, 0.2);
    const CMatrix t = discriminant(g, WalkData::grover(g));
    const RMatrix p = simple_walk_matrix(g);
    for (int c = 0; c < p.cols(); ++c) CHECK(std::abs(p.col(c).sum() - 1.0) < 1e-12);
    RVector dg(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) dg[v] = std::sqrt(static_cast<double>(g.degree(v)));
    const CMatrix sim = (dg.cwiseInverse().asDiagonal() * p * dg.asDiagonal()).cast<Cx>();
    CHECK(max_abs(t - sim) < 1e-12);
  }
}

TEST_CASE("step, finding probability and the vertex recurrence") {
  instances::Rng rng(25);
  const auto g = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4);
  const CMatrix u = build_evolution(g, WalkData::grover(g));
  const ArcState d0 = delta_arc(g, 0);
  const RVector nu0 = finding_probability(d0, g);
  CHECK(nu0[g.origin(0)] == 1.0);
  CHECK(nu0.sum() == 1.0);

  // one step from delta_e: brute-force matrix-vector product
  ArcState brute = ArcState::Zero(8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) brute[r] += u(r, c) * d0[c];
  const ArcState one = step(u, d0);
  CHECK((one - brute).norm() < 1e-15);
  const RVector nu1 = finding_probability(one, g);
  // the coin leaves delta_e on the other arc out of o(e) = 0, which the shift reverses
  CHECK(std::abs(nu1[3] - 1.0) < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const auto h = instances::random_connected_graph(rng, 10, 0.1);
    const auto data = instances::random_walk_data(h, rng);
    const CMatrix uh = build_evolution(h, data);
    ArcState psi = random_state(rng, h.arc_count());
    for (int n = 0; n < 30; ++n) psi = step(uh, psi);
    CHECK(std::abs(finding_probability(psi, h).sum() - 1.0) < 1e-10);

    // (U Psi) restricted to arcs out of u equals sum_{t(e)=u} P(e) Psi(o(e))
    const ArcState direct = uh * psi;
    ArcState rec = ArcState::Zero(h.arc_count());
    for (ArcId e = 0; e < h.arc_count(); ++e)
      for (ArcId f : h.out_arcs(h.origin(e))) rec[e ^ 1] += uh(e ^ 1, f) * psi[f];
    CHECK((direct - rec).norm() < 1e-12);
  }
}

TEST_CASE("step flags norm drift") {
  CMatrix bad = CMatrix::Identity(2, 2) * 1.1;
  ArcState psi = ArcState::Zero(2);
  psi[0] = 1.0;
  CHECK_THROWS_AS(step(bad, psi), NumericalPathology);
}

TEST_CASE("state CSV") {
  ArcState psi(2);
  psi << Cx(0.5, 0.0), Cx(0.0, -0.25);
  std::ostringstream os;
  write_state_csv(os, psi);
  CHECK(os.str().rfind("arc,re,im\n", 0) == 0);
  std::istringstream in(os.str());
  std::string header, l0, l1;
  std::getline(in, header);
  std::getline(in, l0);
  std::getline(in, l1);
  CHECK(l0 == "0,0.5,0");
  CHECK(l1 == "1,0,-0.25");
}
