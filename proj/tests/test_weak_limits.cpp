#include <doctest.h>

#include <numbers>

#include "qwalk/lattice.hpp"
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

TEST_CASE("rho2 symmetries and support") {
  for (const auto& [x, y] : {std::pair{0.1, 0.2}, {0.3, -0.45}, {-0.6, 0.05}}) {
    const double r = rho2(x, y);
    CHECK(r > 0.0);
    CHECK(rho2(-x, y) == doctest::Approx(r).epsilon(1e-14));
    CHECK(rho2(x, -y) == doctest::Approx(r).epsilon(1e-14));
    CHECK(rho2(y, x) == doctest::Approx(r).epsilon(1e-14));
    CHECK(velocity_law_density2(x, y) == doctest::Approx(2.0 * r).epsilon(1e-14));
  }
  CHECK(rho2(0.6, 0.6) == 0.0);
  CHECK(rho2_expression(0.5, 0.5) == kSingular);
  CHECK(std::abs(rho2(0.0, 0.0) - 1.0 / (kPi * kPi)) < 1e-15);
}

TEST_CASE("rho2 normalization") {
  const auto n = rho2_normalization();
  CHECK(std::abs(n.total() - 0.5) < 1e-6);
  CHECK(n.boundary_layer > 0.0);
  CHECK(std::abs(rho2_bin_average(0.1, 0.1 + 1e-6, 0.2, 0.2 + 1e-6) - rho2(0.1, 0.2)) < 1e-6);
}

TEST_CASE("preimage cosines reproduce the velocity") {
  for (const auto& [k, l] : {std::pair{0.4, 1.9}, {2.2, 0.3}, {1.0, 1.2}, {2.8, 1.6}}) {
    const RVector v = zd_velocity(vec({k, l}));
    const auto [ck, cl] = rho2_preimage_cosines(v[0], v[1]);
    // (k, l) and (pi - k, pi - l) share the velocity
    const double sign = ck * std::cos(k) >= 0.0 ? 1.0 : -1.0;
    CHECK(std::abs(sign * ck - std::cos(k)) < 1e-8);
    CHECK(std::abs(sign * cl - std::cos(l)) < 1e-8);
  }
}

TEST_CASE("pushforward histogram") {
  const auto h = rho_d_pushforward(2, 128, 40);
  CHECK(std::abs(h.total_mass() - 0.5 * (1.0 - h.skip_fraction)) < 1e-9);
  CHECK(h.skip_fraction < 1e-3);
  CHECK(h.max_speed <= 1.0 / std::sqrt(2.0) + 1e-9);
  for (int i = 0; i < static_cast<int>(h.mass.size()); ++i) {
    CHECK(h.mass[i] >= 0.0);
    if (h.bin_center(i).norm() > 1.0 / std::sqrt(2.0) + h.bin_width()) CHECK(h.mass[i] == 0.0);
  }
  CHECK(h.mass[0] == h.mass[h.mass.size() - 1]);

  const auto h3 = rho_d_pushforward(3, 32, 12);
  CHECK(std::abs(h3.total_mass() - 1.0 / 3.0) < 1e-9);
  CHECK(h3.max_speed <= 1.0 / std::sqrt(3.0) + 1e-9);
}

TEST_CASE("Hessian determinant closed form handles cos k = 0") {
  const RVector k = vec({kPi / 2, 1.0});
  const RVector near = vec({kPi / 2 + 1e-9, 1.0});
  CHECK(std::abs(det_hessian_formula(k) - det_hessian_formula(near)) < 1e-6);
  CHECK_THROWS_AS(det_hessian_formula(vec({0.0, 0.0})), InvalidInput);
}

TEST_CASE("characteristic function of the limit") {
  CHECK(std::abs(limit_characteristic_function(vec({0.0, 0.0}), 64) - 1.0) < 1e-14);
  // d = 1: velocity is +-1 with equal weight
  CHECK(std::abs(limit_characteristic_function(vec({1.3}), 256) - std::cos(1.3)) < 1e-12);
}

TEST_CASE("characteristic function matches a lattice simulation") {
  const int n = 120;
  const auto cov = build_torus_covering(square_lattice(2), auto_torus_side(square_lattice(2), n), false);
  const auto runs = simulate_ensemble(cov, origin_ensemble(cov), {n});
  const RVector xi = vec({3.0, 0.0});
  CHECK(std::abs(empirical_characteristic(cov, runs[0].mass, xi, n) - limit_characteristic_function(xi, 256)) < 0.03);
}

TEST_CASE("velocity bounds") {
  for (int d = 1; d <= 3; ++d) CHECK(max_velocity_norm(d, d == 3 ? 48 : 256) <= 1.0 / std::sqrt(double(d)) + 1e-12);
  CHECK(std::abs(mean_velocity_square(1, 64) - 1.0) < 1e-12);
  const double m2 = mean_velocity_square(2, 256);
  CHECK(m2 > 0.0);
  CHECK(m2 < 0.5);
}

TEST_CASE("boundary behaviour of the limit density") {
  const auto r2 = singular_scan(2, 200, {});
  CHECK(r2.vertices.size() == 4);
  CHECK(r2.max_relative_error < 1e-6);
  int vertex_like = 0;
  for (const auto& s : r2.samples) vertex_like += s.cls == BoundaryClass::Vertex;
  CHECK(vertex_like < 10);

  const auto r3 = singular_scan(3, 0, {64, 128});
  CHECK(r3.vertices.size() == 8);
  REQUIRE(r3.shell_ratio.size() == 2);
  CHECK(r3.shell_ratio[1] < r3.shell_ratio[0] + 0.05);
  CHECK(r3.vertex_ratio[1] > r3.shell_ratio[1]);
}
