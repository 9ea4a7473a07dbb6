#pragma once

#include <limits>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

inline constexpr double kSingular = std::numeric_limits<double>::infinity();

/// Continuous part of the Z^2 weak limit, normalized to mass 1/2:
/// 1{x^2+y^2 <= 1/2} / (pi^2 (x+y-1)(x+y+1)(x-y+1)(x-y-1)); kSingular where the
/// denominator vanishes.
double rho2(double x, double y);
/// Rational part of rho2 without the disk indicator.
double rho2_expression(double x, double y);
/// Density of grad(phi)(K) for K uniform on the 2-torus (= 2 rho2, mass 1).
double velocity_law_density2(double x, double y);

/// Mean of rho2 over the box [x0, x1] x [y0, y1] by tensor Gauss-Legendre quadrature.
double rho2_bin_average(double x0, double x1, double y0, double y1, int order = 16);

struct Rho2Normalization {
  double interior = 0.0;        // polar quadrature over r <= 1/sqrt(2) - delta
  double boundary_layer = 0.0;  // closed-form radial integral over the last delta
  double total() const { return interior + boundary_layer; }
};
Rho2Normalization rho2_normalization(double delta = 1e-4);

/// (cos k, cos l) of a preimage of the velocity (x, y) on Z^2.
std::pair<double, double> rho2_preimage_cosines(double x, double y);

/// Z^d group velocity sin(k_j) / (d sin(phi)) with cos(phi) = mean cos(k_j).
RVector zd_velocity(const RVector& k);

/// Histogram of the symmetrized law of grad(phi) on Z^d with total mass 1/d.
struct DensityEvaluator {
  int dim = 2;
  int resolution = 0;
  int bins = 0;
  double half_width = 0.0;    // bins cover [-half_width, half_width]^d
  std::vector<double> mass;   // row-major bins
  double skip_fraction = 0.0; // share of k-samples dropped near sin(phi) = 0
  double max_speed = 0.0;     // largest |grad phi| seen
  bool resolution_warning = false;

  double bin_width() const { return 2.0 * half_width / bins; }
  double bin_volume() const;
  double density(int index) const { return mass[index] / bin_volume(); }
  RVector bin_center(int index) const;
  double total_mass() const;
};

/// d = 2 uses a piecewise-linear pushforward (each grid cell split into two
/// triangles mapped affinely, mass deposited by exact overlap area).
/// Other d count grid samples at cell midpoints.
DensityEvaluator rho_d_pushforward(int d, int resolution, int bins);

/// Closed form for det Hess(phi) on Z^d. Throws InvalidInput if sin(phi) < 1e-8.
double det_hessian_formula(const RVector& k);

enum class BoundaryClass { Vertex, Zero, Finite };

struct BoundarySample {
  RVector x;
  BoundaryClass cls = BoundaryClass::Finite;
  double value = 0.0;     // density from the closed form (d = 2) or histogram (d >= 3)
  double predicted = 0.0; // 4/(pi^2 cos^2 2 gamma) for d = 2, 0 for d >= 3
};

struct SingularReport {
  int dim = 2;
  std::vector<RVector> vertices;       // the 2^d points with coordinates +-1/d
  std::vector<BoundarySample> samples;
  double max_relative_error = 0.0;     // d = 2 boundary values against the prediction
  // d >= 3 refinement study, one entry per resolution
  std::vector<int> resolutions;
  std::vector<double> shell_ratio;     // mean shell density away from vertices / interior median
  std::vector<double> vertex_ratio;    // mean vertex-neighbourhood density / interior median
};

SingularReport singular_scan(int d, int boundary_samples, const std::vector<int>& resolutions = {64, 128, 256});

/// (1 - 1/d) + (1/d) mean_k cos(<xi, grad phi(k)>) on a midpoint grid.
double limit_characteristic_function(const RVector& xi, int resolution);

/// Max |grad phi| and mean |grad phi|^2 over a midpoint k-grid (samples with
/// |sin phi| < 1e-6 skipped).
double max_velocity_norm(int d, int resolution);
double mean_velocity_square(int d, int resolution);

}  // namespace qwalk
