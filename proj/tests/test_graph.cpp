#include <doctest.h>

#include <fstream>

#include "qwalk/acceptance.hpp"
#include "qwalk/covering.hpp"
#include "qwalk/graph.hpp"

using namespace qwalk;

namespace {

SymmetricDigraph cycle4() { return build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4); }

void check_involution(const SymmetricDigraph& g) {
  int deg_sum = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) deg_sum += g.degree(v);
  CHECK(deg_sum == g.arc_count());
  for (ArcId e = 0; e < g.arc_count(); ++e) {
    const ArcId b = SymmetricDigraph::inverse(e);
    CHECK(b != e);
    CHECK(SymmetricDigraph::inverse(b) == e);
    CHECK(g.origin(b) == g.terminus(e));
    CHECK(g.terminus(b) == g.origin(e));
  }
}

}  // namespace

TEST_CASE("build_graph counts") {
  const auto c4 = cycle4();
  CHECK(c4.vertex_count() == 4);
  CHECK(c4.arc_count() == 8);
  for (VertexId v = 0; v < 4; ++v) CHECK(c4.degree(v) == 2);

  const auto loop = build_graph({{0, 0}}, 1);
  CHECK(loop.vertex_count() == 1);
  CHECK(loop.arc_count() == 2);
  CHECK(loop.origin(0) == 0);
  CHECK(loop.terminus(0) == 0);
  CHECK(loop.origin(1) == 0);
  CHECK(loop.degree(0) == 2);

  const auto tri = build_graph({{0, 1}, {1, 2}, {2, 0}}, 3);
  CHECK(tri.arc_count() == 6);
  for (VertexId v = 0; v < 3; ++v) CHECK(tri.degree(v) == 2);
}

TEST_CASE("build_graph rejects disconnected input") {
  CHECK_THROWS_AS(build_graph({{0, 1}, {2, 3}}, 4), InvalidInput);
  CHECK_THROWS_AS(build_graph({{0, 5}}, 2), InvalidInput);
}

TEST_CASE("involution and degree sum on random graphs") {
  instances::Rng rng(11);
  for (int i = 0; i < 30; ++i) check_involution(instances::random_connected_graph(rng, 12, 0.2));
}

TEST_CASE("spanning tree and fundamental cycles") {
  const auto b4 = spanning_tree_and_cycles(cycle4());
  CHECK(b4.rank() == 1);
  CHECK(b4.cycles[0].length() == 4);

  const auto path = build_graph({{0, 1}, {1, 2}}, 3);
  CHECK(spanning_tree_and_cycles(path).rank() == 0);

  const auto bouquet = square_lattice(3).graph();
  const auto bb = spanning_tree_and_cycles(bouquet);
  CHECK(bb.rank() == 3);
  for (const auto& c : bb.cycles) CHECK(c.length() == 1);
}

TEST_CASE("cycle basis: rank, one non-tree edge each, independent gamma vectors") {
  instances::Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    const auto g = instances::random_connected_graph(rng, 10, 0.1);
    const auto basis = spanning_tree_and_cycles(g);
    REQUIRE(basis.rank() == g.edge_count() - g.vertex_count() + 1);
    if (basis.rank() == 0) continue;
    CMatrix m(g.arc_count(), basis.rank());
    for (int j = 0; j < basis.rank(); ++j) {
      const auto& c = basis.cycles[j];
      int non_tree = 0;
      for (ArcId e : c.arcs) non_tree += basis.tree_edge[SymmetricDigraph::edge_of(e)] ? 0 : 1;
      CHECK(non_tree == 1);
      CHECK(c.arcs.front() == 2 * basis.non_tree_edges[j]);
      m.col(j) = gamma_vector(c, g);
    }
    // Gram determinant of the gamma vectors
    CHECK(std::abs((m.adjoint() * m).determinant()) > 1e-8);
  }
}

TEST_CASE("gamma and tau vectors") {
  const auto tri = build_graph({{0, 1}, {1, 2}, {2, 0}}, 3);
  const auto ct = make_closed_path(tri, {0, 2, 4});
  CHECK(ct.kind == PathKind::OddCycle);
  const ArcState g = gamma_vector(ct, tri);
  for (ArcId e : {0, 2, 4}) {
    CHECK(g[e] == Cx(1.0));
    CHECK(g[e ^ 1] == Cx(-1.0));
  }

  const auto c4 = cycle4();
  const auto p = make_closed_path(c4, {0, 2, 4, 6});
  CHECK(p.kind == PathKind::EvenCycle);
  const ArcState t = tau_vector(p, c4);
  const double expected[] = {-1, 1, -1, 1};
  for (int j = 0; j < 4; ++j) {
    CHECK(t[2 * j] == Cx(expected[j]));
    CHECK(t[2 * j + 1] == Cx(expected[j]));
  }
  CHECK(std::abs(gamma_vector(p, c4).dot(t)) < 1e-14);
  CHECK_THROWS_AS(tau_vector(ct, tri), InvalidInput);

  // cycle followed by its reverse
  const auto back = make_closed_path(c4, {0, 2, 4, 6, 7, 5, 3, 1});
  CHECK(gamma_vector(back, c4).norm() == 0.0);
  CHECK_THROWS_AS(make_closed_path(c4, {0, 4}), InvalidInput);
}

TEST_CASE("gamma is orthogonal to tau for even cycles of random graphs") {
  instances::Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto g = instances::random_connected_graph(rng, 10, 0.0);
    for (const auto& c : spanning_tree_and_cycles(g).cycles)
      if (c.length() % 2 == 0) CHECK(std::abs(gamma_vector(c, g).dot(tau_vector(c, g))) < 1e-14);
  }
}

TEST_CASE("WalkData validation and one-form antisymmetry") {
  const auto c4 = cycle4();
  std::vector<Cx> w(8, 1.0 / std::sqrt(2.0));
  const WalkData d(c4, w, {0.3, -1.0, 2.0, 0.0});
  for (ArcId e = 0; e < 8; ++e) CHECK(d.theta(e ^ 1) == -d.theta(e));
  w[0] = 0.0;
  CHECK_THROWS_AS(WalkData(c4, w, {0, 0, 0, 0}), InvalidInput);
  w[0] = 0.5;
  CHECK_THROWS_AS(WalkData(c4, w, {0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("torus coverings") {
  const auto ring = build_torus_covering(square_lattice(1), 4);
  CHECK(ring.graph().vertex_count() == 4);
  CHECK(ring.graph().arc_count() == 8);
  for (VertexId v = 0; v < 4; ++v) CHECK(ring.graph().degree(v) == 2);

  const auto hex = build_torus_covering(hexagonal_lattice(), 2);
  CHECK(hex.graph().vertex_count() == 8);
  CHECK(hex.graph().arc_count() == 24);

  const auto sq = build_torus_covering(square_lattice(2), 3);
  CHECK(sq.graph().vertex_count() == 9);
  for (VertexId v = 0; v < 9; ++v) CHECK(sq.graph().degree(v) == 4);
  check_involution(sq.graph());
}

TEST_CASE("covering projection and displacements") {
  for (const auto& spec : {square_lattice(2), triangular_lattice(), hexagonal_lattice(), square_lattice(3)}) {
    const int n = 5;
    const auto cov = build_torus_covering(spec, n);
    const auto& g = cov.graph();
    CHECK(g.vertex_count() == cov.cell_count() * spec.graph().vertex_count());
    CHECK(g.arc_count() == cov.cell_count() * spec.graph().arc_count());
    for (ArcId a = 0; a < g.arc_count(); ++a) {
      const ArcId q = cov.quotient_arc_of(a);
      const int cell = cov.cell_of_arc(a);
      CHECK(cov.arc_of(cell, q) == a);
      CHECK(g.origin(a) == cov.vertex_of(cell, spec.graph().origin(q)));
      const int target = cov.shifted_cell(cell, q);
      CHECK(g.terminus(a) == cov.vertex_of(target, spec.graph().terminus(q)));
      const auto x = cov.cell_coords(cell), y = cov.cell_coords(target);
      const RVector h = spec.theta_hat(q);
      for (int j = 0; j < spec.dimension(); ++j)
        CHECK(((y[j] - x[j] - static_cast<int>(h[j])) % n + n) % n == 0);
    }
    // lifted fundamental cycles of the covering have zero total displacement mod N
    for (const auto& c : spanning_tree_and_cycles(g).cycles) {
      std::vector<int> total(spec.dimension(), 0);
      for (ArcId a : c.arcs) {
        const RVector h = spec.theta_hat(cov.quotient_arc_of(a));
        for (int j = 0; j < spec.dimension(); ++j) total[j] += static_cast<int>(h[j]);
      }
      for (int t : total) CHECK(t % n == 0);
    }
  }
}

TEST_CASE("covering without graph keeps the cell bookkeeping") {
  auto spec = std::make_shared<const QuotientSpec>(hexagonal_lattice());
  const CoveringGraph full(spec, 4), light(spec, 4, false);
  CHECK_FALSE(light.has_graph());
  CHECK_THROWS_AS(light.graph(), Error);
  for (ArcId a = 0; a < full.graph().arc_count(); ++a) {
    CHECK(light.cell_of_arc(a) == full.cell_of_arc(a));
    CHECK(light.quotient_arc_of(a) == full.quotient_arc_of(a));
  }
}

TEST_CASE("quotient spec JSON round trip and validation") {
  const auto tri = triangular_lattice();
  const auto back = quotient_from_json(quotient_to_json(tri));
  CHECK(back.dimension() == 2);
  CHECK(back.graph().edge_count() == 3);
  for (int i = 0; i < 3; ++i) CHECK((back.edge_theta_hat()[i] - tri.edge_theta_hat()[i]).norm() == 0.0);

  const auto defaulted = quotient_from_json(R"({"vertices": 2, "dimension": 1,
      "edges": [{"from": 0, "to": 1}, {"from": 0, "to": 1, "theta_hat": [1]}]})");
  CHECK(defaulted.edge_theta_hat()[0][0] == 0.0);
  CHECK(defaulted.edge_theta_hat()[1][0] == 1.0);

  CHECK_THROWS_AS(quotient_from_json("{not json"), InvalidInput);
  CHECK_THROWS_AS(quotient_from_json(R"({"vertices": 1, "dimension": 2, "edges": [{"from": 0, "to": 0, "theta_hat": [1, 0]}]})"),
                  InvalidInput);

  const std::string path = "quotient_roundtrip.json";
  std::ofstream(path) << quotient_to_json(hexagonal_lattice());
  CHECK(quotient_from_file(path).graph().vertex_count() == 2);
  CHECK_THROWS_AS(quotient_from_file("does_not_exist.json"), InvalidInput);
}

TEST_CASE("non-integral displacements are rejected for coverings") {
  auto g = build_graph({{0, 0}}, 1);
  RVector h(1);
  h << 0.5;
  const QuotientSpec spec(g, 1, {h});
  CHECK_FALSE(spec.has_integral_displacements());
  CHECK_THROWS_AS(build_torus_covering(spec, 4), InvalidInput);
}
