#include <doctest.h>

#include <numbers>

#include "qwalk/acceptance.hpp"
#include "qwalk/crystal.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;

namespace {

LatticeState random_lattice_state(instances::Rng& rng, int n) {
  std::normal_distribution<double> z;
  LatticeState psi(n);
  for (int i = 0; i < n; ++i) psi[i] = Cx(z(rng), z(rng));
  return psi / psi.norm();
}

}  // namespace

TEST_CASE("arc-local walker matches the dense covering evolution") {
  instances::Rng rng(51);
  for (const auto& spec : {square_lattice(2), triangular_lattice(), hexagonal_lattice(), square_lattice(1)}) {
    const auto cov = build_torus_covering(spec, 4);
    const CMatrix u = build_evolution(cov.graph(), WalkData::grover(cov.graph()));
    LatticeWalker walker(cov);
    LatticeState psi = random_lattice_state(rng, cov.graph().arc_count());
    ArcState dense = to_cover_arcs(cov, psi);
    CHECK((from_cover_arcs(cov, dense) - psi).norm() == 0.0);
    for (int n = 1; n <= 20; ++n) {
      walker.advance(psi);
      dense = u * dense;
      CHECK((to_cover_arcs(cov, psi) - dense).norm() < 1e-12);
    }
  }
}

TEST_CASE("walker from a localized state matches the dense evolution") {
  const auto cov = build_torus_covering(hexagonal_lattice(), 6);
  const CMatrix u = build_evolution(cov.graph(), WalkData::grover(cov.graph()));
  LatticeWalker walker(cov);
  LatticeState psi = lattice_delta(cov, 7, 3);
  ArcState dense = to_cover_arcs(cov, psi);
  walker.advance(psi, 3);
  walker.advance(psi, 9);
  for (int n = 0; n < 12; ++n) dense = u * dense;
  CHECK((to_cover_arcs(cov, psi) - dense).norm() < 1e-12);
}

TEST_CASE("Z^1 Grover walk moves ballistically") {
  const auto cov = build_torus_covering(square_lattice(1), 64);
  LatticeWalker walker(cov);
  for (ArcId e : {0, 1}) {
    LatticeState psi = lattice_delta(cov, 0, e);
    walker.advance(psi, 10);
    const RVector mu = cell_distribution(cov, psi);
    Eigen::Index at;
    CHECK(std::abs(mu.maxCoeff(&at) - 1.0) < 1e-14);
    CHECK(std::abs(cov.centered(cov.cell_coords(static_cast<int>(at))[0])) == 10);
  }
}

TEST_CASE("lifted gamma states are stationary") {
  const auto cov = build_torus_covering(square_lattice(2), 8);
  const LatticeState g = cycle_state(cov, 0, {0, 2, 1, 3});
  CHECK(std::abs(g.norm() - 1.0) < 1e-14);
  LatticeWalker walker(cov);
  LatticeState psi = g;
  for (int n = 0; n < 50; ++n) {
    walker.advance(psi);
    CHECK((psi - g).norm() < 1e-12);
  }
  const LatticeState t = cycle_state(cov, 0, {0, 2, 1, 3}, true);
  psi = t;
  walker.advance(psi);
  CHECK((psi + t).norm() < 1e-12);
  CHECK_THROWS_AS(lift_closed_walk(cov, 0, {0, 2}), InvalidInput);
}

TEST_CASE("symmetry-reduced ensemble equals the direct ensemble") {
  for (int d : {2, 3}) {
    const auto cov = build_torus_covering(square_lattice(d), d == 2 ? 24 : 12, false);
    const auto ens = origin_ensemble(cov);
    CHECK(ens.members.size() == static_cast<std::size_t>(2 * d));
    const std::vector<int> rec{0, 3, 5};
    const auto a = simulate_ensemble(cov, ens, rec), b = simulate_ensemble_direct(cov, ens, rec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].step == b[i].step);
      CHECK((a[i].mass - b[i].mass).lpNorm<Eigen::Infinity>() < 1e-14);
      CHECK(std::abs(a[i].mass.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("ensemble on a non-square lattice") {
  const auto cov = build_torus_covering(hexagonal_lattice(), 20, false);
  const auto ens = origin_ensemble(cov);
  CHECK(ens.members.size() == 6);
  const auto a = simulate_ensemble(cov, ens, {4});
  CHECK(std::abs(a[0].mass.sum() - 1.0) < 1e-12);
}

TEST_CASE("norm is conserved over long runs") {
  instances::Rng rng(52);
  const auto cov = build_torus_covering(square_lattice(2), 12, false);
  const LatticeState psi0 = random_lattice_state(rng, cov.cell_count() * 4);
  const auto res = simulate(cov, psi0, 10000, {10000});
  CHECK(res.norm_drift < 1e-9);
  CHECK(std::abs(res.final_state.norm() - 1.0) < 1e-9);
  CHECK(std::abs(res.records[0].mass.sum() - 1.0) < 1e-9);
  CHECK(res.warning.has_value());
  CHECK_THROWS_AS(simulate(cov, 2.0 * psi0, 1, {}), InvalidInput);
}

TEST_CASE("torus size and wrap-free horizon") {
  const auto spec = square_lattice(2);
  CHECK(std::abs(max_group_speed(spec) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(auto_torus_side(spec, 100) == 150);
  const auto cov = build_torus_covering(spec, 150, false);
  CHECK(wrap_free_steps(cov) >= 100);
  const double vhex = max_group_speed(hexagonal_lattice());
  CHECK(vhex > 0.0);
  CHECK(vhex < 1.0);
}

TEST_CASE("spread observables, quantiles and characteristic function on simple measures") {
  const auto cov = build_torus_covering(square_lattice(2), 21, false);
  RVector mu = RVector::Zero(cov.cell_count());
  mu[cov.cell_index({0, 0})] = 0.5;
  mu[cov.cell_index({3, 4})] = 0.5;
  const auto obs = spread_observables(cov, mu, 5, 0.05);
  CHECK(std::abs(obs.second_moment - 0.5 * 25.0 / 25.0) < 1e-14);
  CHECK(std::abs(obs.atom_mass - 0.5) < 1e-14);
  CHECK(std::abs(obs.outside_mass - 0.5) < 1e-14);
  CHECK(quantile_radius(cov, mu, 0.4) == 0.0);
  CHECK(std::abs(quantile_radius(cov, mu, 0.9) - 5.0) < 1e-12);
  RVector xi(2);
  xi << 1.0, 0.0;
  CHECK(std::abs(empirical_characteristic(cov, mu, xi, 3) - 0.5 * (1.0 + std::cos(1.0))) < 1e-14);
  const RVector pos = cell_position(cov, cov.cell_index({-2, 7}));
  CHECK(pos[0] == -2.0);
  CHECK(pos[1] == 7.0);
}

TEST_CASE("time average converges for a localized start") {
  const auto cov = build_torus_covering(square_lattice(2), 64, false);
  const auto avg = time_averaged_measure(cov, lattice_delta(cov, 0, 0), 400);
  CHECK(avg.horizon == 400);
  CHECK(std::abs(avg.mass.sum() - 1.0) < 1e-10);
  CHECK(avg.tail_delta < 0.5);
  const auto pred = flat_band_prediction(square_lattice(2), 0, {{0, 0}}, 64);
  CHECK(avg.mass[0] >= 0.5 * pred.time_average[0]);
  CHECK(std::abs(avg.mass[0] - pred.time_average[0]) < 0.03);
}
