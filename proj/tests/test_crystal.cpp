#include <doctest.h>

#include <numbers>

#include "qwalk/acceptance.hpp"
#include "qwalk/crystal.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"
#include "qwalk/weak_limits.hpp"

using namespace qwalk;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("twisted quotient walk matches the discriminant entry formula") {
  instances::Rng rng(41);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (const auto& spec : {square_lattice(2), triangular_lattice(), hexagonal_lattice(), square_lattice(3)}) {
    for (int i = 0; i < 10; ++i) {
      RVector k(spec.dimension());
      for (int j = 0; j < k.size(); ++j) k[j] = ang(rng);
      const KWalk kw = quotient_walk_at_k(spec, k);
      CHECK(max_abs(kw.t - discriminant_at_k(spec, k)) < 1e-12);
      CHECK(is_unitary(kw.u, 1e-12));
      const RVector bands = band_values(spec, k);
      for (int b = 1; b < bands.size(); ++b) CHECK(bands[b - 1] >= bands[b]);
      const auto& g = spec.graph();
      CHECK(multiset_distance(unitary_eigenvalues(kw.u),
                              spectral_map(hermitian_eigenvalues(kw.t), g.edge_count(), g.vertex_count())) < 1e-8);
    }
  }
}

TEST_CASE("Z^d band is the mean of the cosines") {
  const auto spec = square_lattice(3);
  const RVector k = vec({0.3, 2.0, -1.2});
  CHECK(std::abs(band_values(spec, k)[0] - (std::cos(0.3) + std::cos(2.0) + std::cos(-1.2)) / 3.0) < 1e-14);
  CHECK(std::abs(band_phase(spec, k, 0) - std::acos(band_values(spec, k)[0])) < 1e-14);
}

TEST_CASE("hexagonal bands are +-|1 + e^{ik1} + e^{ik2}| / 3") {
  const auto spec = hexagonal_lattice();
  const RVector k = vec({0.4, 1.7});
  const double r = std::abs(1.0 + std::exp(Cx(0, 0.4)) + std::exp(Cx(0, 1.7))) / 3.0;
  const RVector b = band_values(spec, k);
  CHECK(std::abs(b[0] - r) < 1e-14);
  CHECK(std::abs(b[1] + r) < 1e-14);
}

TEST_CASE("torus spectrum is the union of the twisted quotient spectra") {
  for (const auto& spec : {square_lattice(2), hexagonal_lattice(), triangular_lattice()}) {
    const int n = spec.graph().vertex_count() == 1 ? 8 : 6;
    const auto cov = build_torus_covering(spec, n);
    const auto direct = unitary_eigenvalues(build_evolution(cov.graph(), WalkData::grover(cov.graph())));
    std::vector<Cx> joined;
    const KGrid grid{spec.dimension(), n, 0.0};
    for (int i = 0; i < grid.size(); ++i) {
      const auto part = unitary_eigenvalues(quotient_walk_at_k(spec, grid.point(i)).u);
      joined.insert(joined.end(), part.begin(), part.end());
    }
    CHECK(multiset_distance(direct, joined) < 1e-8);
  }
}

TEST_CASE("grid points and DFT round trip") {
  const KGrid g{2, 4, 0.5};
  CHECK(g.size() == 16);
  CHECK(std::abs(g.point(0)[0] - 2.0 * kPi * 0.5 / 4) < 1e-15);
  CHECK(std::abs(g.point(1)[1] - 2.0 * kPi * 1.5 / 4) < 1e-15);

  instances::Rng rng(42);
  std::normal_distribution<double> z;
  const auto cov = build_torus_covering(hexagonal_lattice(), 5);
  ArcState psi(cov.graph().arc_count());
  for (int i = 0; i < psi.size(); ++i) psi[i] = Cx(z(rng), z(rng));
  const ArcState back = idft(cov, dft(cov, psi));
  CHECK((back - psi).norm() < 1e-12 * psi.norm());
  // Parseval
  double khat = 0.0;
  for (const auto& v : dft(cov, psi)) khat += v.squaredNorm();
  CHECK(std::abs(khat / cov.cell_count() - psi.squaredNorm()) < 1e-9 * psi.squaredNorm());
}

TEST_CASE("direct and Fourier evolution agree") {
  instances::Rng rng(43);
  std::normal_distribution<double> z;
  for (const auto& spec : {square_lattice(2), triangular_lattice(), hexagonal_lattice()}) {
    const auto cov = build_torus_covering(spec, 6);
    ArcState psi(cov.graph().arc_count());
    for (int i = 0; i < psi.size(); ++i) psi[i] = Cx(z(rng), z(rng));
    psi /= psi.norm();
    CHECK(fourier_equivalence_check(cov, psi, 15) < 1e-10);
  }
}

TEST_CASE("flat bands from the counting on U_k") {
  struct Case {
    QuotientSpec spec;
    int plus, minus;
  };
  const Case cases[] = {{square_lattice(2), 1, 1}, {triangular_lattice(), 2, 2}, {hexagonal_lattice(), 1, 1}};
  for (const auto& c : cases) {
    const auto bs = band_structure(std::make_shared<const QuotientSpec>(c.spec), 16);
    CHECK(bs.flat_plus == c.plus);
    CHECK(bs.flat_minus == c.minus);
    CHECK(flat_bands(bs).empty());
  }
  CHECK_THROWS_AS(band_structure(std::make_shared<const QuotientSpec>(square_lattice(2)), 4), InvalidInput);
}

TEST_CASE("unit eigenprojectors") {
  const auto spec = square_lattice(2);
  const CMatrix u = quotient_walk_at_k(spec, vec({0.9, -2.1})).u;
  for (double s : {1.0, -1.0}) {
    const CMatrix p = unit_eigenprojector(u, s);
    CHECK(max_abs(p * p - p) < 1e-12);
    CHECK(max_abs(p - p.adjoint()) < 1e-12);
    CHECK(max_abs(u * p - s * p) < 1e-12);
    CHECK(std::abs(p.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("group velocity: closed form against finite differences") {
  instances::Rng rng(44);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int d = 1; d <= 3; ++d) {
    const auto spec = square_lattice(d);
    for (int i = 0; i < 20; ++i) {
      RVector k(d);
      for (int j = 0; j < d; ++j) k[j] = ang(rng);
      if (std::sin(band_phase(spec, k, 0)) < 0.1) continue;
      CHECK((group_velocity_zd(k) - group_velocity_fd(spec, k, 0)).norm() < 1e-7);
      CHECK((group_velocity(spec, k, 0) - group_velocity_zd(k)).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(group_velocity(square_lattice(2), vec({0.0, 0.0}), 0), InvalidInput);
}

TEST_CASE("Hessian determinant agrees with the closed form on Z^2") {
  const auto spec = square_lattice(2);
  for (const RVector& k : {vec({0.5, 2.0}), vec({1.0, -1.3}), vec({kPi / 2, 0.8})}) {
    const double fd = hessian(spec, k, 0).determinant();
    const double cf = det_hessian_formula(k);
    CHECK(std::abs(fd - cf) < 1e-5 * std::max(1.0, std::abs(cf)));
  }
  CHECK(std::abs(std::abs(det_hessian_formula(vec({0.0, kPi}))) - 0.25) < 1e-12);
  // (pi/2, pi/2) maps to a vertex of the velocity square, where the map folds
  CHECK(std::abs(det_hessian_formula(vec({kPi / 2, kPi / 2}))) < 1e-12);
  CHECK((group_velocity_zd(vec({kPi / 2, kPi / 2})) - vec({0.5, 0.5})).norm() < 1e-15);
}

TEST_CASE("critical points of the Z^2 band") {
  const auto bs = band_structure(std::make_shared<const QuotientSpec>(square_lattice(2)), 32);
  const auto cps = critical_points(bs);
  CHECK(cps.unrefined.empty());
  auto found = [](const std::vector<CriticalPoint>& set, const RVector& k) {
    for (const auto& p : set)
      if (k_distance(p.k, k) < 1e-6) return true;
    return false;
  };
  CHECK(found(cps.points, vec({0.0, kPi})));
  CHECK(found(cps.points, vec({kPi, 0.0})));
  CHECK_FALSE(found(cps.points, vec({0.0, 0.0})));
  CHECK_FALSE(found(cps.points, vec({kPi, kPi})));
  for (const auto& p : cps.points) CHECK(p.gradient_norm < 1e-8);
}

TEST_CASE("periodic k distance") {
  CHECK(k_distance(vec({0.1, 0.0}), vec({2.0 * kPi - 0.1, 0.0})) < 0.2 + 1e-12);
  CHECK(k_distance(vec({kPi, -kPi}), vec({-kPi, kPi})) < 1e-12);
}
