#pragma once

#include <memory>
#include <vector>

#include "qwalk/covering.hpp"

namespace qwalk {

/// Grover data on the quotient twisted by theta(e) = <k, theta_hat(e)>.
WalkData quotient_data_at_k(const QuotientSpec& spec, const RVector& k);

struct KWalk {
  CMatrix u;  // twisted walk on quotient arcs
  CMatrix t;  // discriminant
  CMatrix p;  // twisted simple walk, p = D t D^{-1} with D = diag(sqrt(deg))
};

/// Throws NumericalPathology if D^{-1} p D differs from t by more than 1e-12.
KWalk quotient_walk_at_k(const QuotientSpec& spec, const RVector& k);

/// Discriminant of the twisted quotient walk from the entry formula
/// <delta_v, T delta_u> = sum_{f: u -> v} exp(i theta(f)) / sqrt(deg(u) deg(v)).
CMatrix discriminant_at_k(const QuotientSpec& spec, const RVector& k);
/// Eigenvalues of discriminant_at_k in descending order (band b has phase acos of entry b).
RVector band_values(const QuotientSpec& spec, const RVector& k);

/// Regular grid 2 pi j / n per axis, points numbered row-major like torus cells.
struct KGrid {
  int dim = 1;
  int side = 1;
  double offset = 0.0;  // shift in units of the spacing (0.5 gives midpoints)

  int size() const;
  RVector point(int index) const;
};

/// Arc amplitudes of a covering state grouped per k (or per cell): entry
/// [i] holds the |D0| quotient-arc components for grid point / cell i.
using KSpaceState = std::vector<ArcState>;

/// hat Psi(k, e) = sum_x Psi(x, e) exp(i <k, x>) on the grid k = 2 pi j / N.
KSpaceState dft(const CoveringGraph& cov, const ArcState& psi);
/// Psi(x, e) = N^{-d} sum_k hat Psi(k, e) exp(-i <k, x>).
ArcState idft(const CoveringGraph& cov, const KSpaceState& psi_hat);

/// Applies U_k^n independently at every grid point of a side-N torus grid.
KSpaceState fourier_evolve(const QuotientSpec& spec, int side, const KSpaceState& psi_hat, int n);

/// max |Psi_n(direct) - Psi_n(Fourier)| over all arcs of the covering.
double fourier_equivalence_check(const CoveringGraph& cov, const ArcState& psi0, int n);

struct BandStructure {
  std::shared_ptr<const QuotientSpec> spec;
  KGrid grid;
  RMatrix cos_phi;                 // grid point x band, descending per row
  std::vector<CMatrix> vectors;    // eigenvectors of T_k (columns in band order)
  std::vector<std::vector<int>> matched;  // overlap-continued band label per point and sorted band
  bool crossing_ambiguity = false;
  int flat_plus = 0;   // eigenvalue +1 of U_k not produced by T_k, at a generic k
  int flat_minus = 0;

  int band_count() const { return static_cast<int>(cos_phi.cols()); }
};

/// Throws InvalidInput for resolution < 8.
BandStructure band_structure(std::shared_ptr<const QuotientSpec> spec, int resolution);
/// Bands whose cos(phi) has variance below 1e-10 over the grid.
std::vector<int> flat_bands(const BandStructure& bs);

/// Eigenphase phi_b(k) = acos(b-th largest eigenvalue of T_k), in [0, pi].
double band_phase(const QuotientSpec& spec, const RVector& k, int band);

/// grad phi_b(k): closed form on Z^d, otherwise 5-point central differences (h = 1e-4).
/// Throws InvalidInput near sin(phi) = 0 or near a band crossing.
RVector group_velocity(const QuotientSpec& spec, const RVector& k, int band);
/// 5-point finite differences without the singularity checks.
RVector group_velocity_fd(const QuotientSpec& spec, const RVector& k, int band, double h = 1e-4);
/// Closed-form Z^d velocity sin(k_j) / (d sin(phi)).
RVector group_velocity_zd(const RVector& k);
/// Central differences of group_velocity, symmetrized.
RMatrix hessian(const QuotientSpec& spec, const RVector& k, int band, double h = 1e-4);

struct CriticalPoint {
  RVector k;
  int band = 0;
  double gradient_norm = 0.0;
  double det_hessian = 0.0;
  bool degenerate = false;  // |det Hess| < 1e-8
  bool converged = true;
};

struct CriticalPointSearch {
  std::vector<CriticalPoint> points;
  std::vector<CriticalPoint> excluded;  // band edges and crossings rejected by the limit test
  std::vector<CriticalPoint> unrefined;  // seeds where Newton refinement did not converge in 50 steps
};

/// Critical points of every non-flat band, k reduced to [0, 2 pi)^d.
CriticalPointSearch critical_points(const BandStructure& bs);

/// Projector onto ker(U_k - sign I) from a singular value decomposition.
CMatrix unit_eigenprojector(const CMatrix& u, double sign, double tol = 1e-8);

/// Flat-band prediction for the time average of delta_(0, e) at the listed cells.
/// With a_pm(x) = (2 pi)^{-d} int exp(-i <k, x>) Pi_pm(k) delta_e dk:
/// time_average = |a_+(x)|^2 + |a_-(x)|^2 (the -1 part alternates in sign, so
/// its cross term with a_+ averages out); combined = |a_+(x) + a_-(x)|^2.
struct FlatBandPrediction {
  std::vector<double> time_average;
  std::vector<double> combined;
};
FlatBandPrediction flat_band_prediction(const QuotientSpec& spec, ArcId e, const std::vector<std::vector<int>>& cells,
                                        int resolution);

/// Periodic distance between two k-points.
double k_distance(const RVector& a, const RVector& b);

}  // namespace qwalk
