#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwalk/graph.hpp"

namespace qwalk {

/// Eigenvalues within this distance of +-1 are treated as exactly +-1.
inline constexpr double kUnitEigenTol = 1e-9;

/// Clustered multiset of eigenvalues.
struct Spectrum {
  std::vector<Cx> values;
  std::vector<int> multiplicity;
  double gap = 1e-7;

  int total() const;
  /// Flat multiset with every value repeated by its multiplicity.
  std::vector<Cx> expanded() const;
};

/// Clusters values whose distance is below gap * max(1, |value|).
/// Values are ordered by argument (real values by size) before clustering.
Spectrum cluster_spectrum(std::vector<Cx> values, double gap = 1e-7);
Spectrum cluster_spectrum(const RVector& values, double gap = 1e-7);

/// Greedy nearest-neighbour matching of two multisets of equal size.
/// Returns the largest matched distance, or +inf if the sizes differ.
double multiset_distance(const std::vector<Cx>& a, const std::vector<Cx>& b);

RVector hermitian_eigenvalues(const CMatrix& m);
std::vector<Cx> unitary_eigenvalues(const CMatrix& u);

/// Number of eigenvalues within kUnitEigenTol of +1 and of -1.
std::pair<int, int> unit_multiplicities(const RVector& spec_t);

/// Eigenvalues of U predicted from those of T: cos(phi) -> exp(+-i phi),
/// +-1 once each, plus max(0, E - V + m_{+-1}) copies of +-1.
/// Throws InvalidInput if some |lambda| > 1 + 1e-9.
std::vector<Cx> spectral_map(const RVector& spec_t, int edge_count, int vertex_count);

struct EigenPair {
  Cx value;
  ArcState vector;
  double residual = 0.0;
};

/// Lifts an eigenvector nu of T (T nu = cos(phi) nu) to eigenvectors of U.
/// For cos(phi) = +-1 returns d_A^* nu; otherwise omega_{+phi} and omega_{-phi}.
/// Throws NumericalPathology on a residual above 1e-9 or a near-zero sin(phi)
/// away from +-1.
std::vector<EigenPair> lift_eigenvector(const SymmetricDigraph& g, const WalkData& data,
                                        const VertexState& nu, double cos_phi);

/// Lifts an orthonormal eigenbasis of T; degenerate eigenspaces are lifted vector by vector.
std::vector<EigenPair> lift_all(const SymmetricDigraph& g, const WalkData& data);

/// Bases of the +1 and -1 eigenspaces of the Grover walk built from closed paths.
struct CycleEigenbasis {
  std::vector<ClosedPath> plus_paths;
  std::vector<ClosedPath> minus_paths;
  std::vector<ArcState> plus;   // gamma vectors
  std::vector<ArcState> minus;  // tau vectors
};

CycleEigenbasis cycle_eigenspaces(const SymmetricDigraph& g);
CycleEigenbasis cycle_eigenspaces(const SymmetricDigraph& g, const CycleBasis& basis);

/// Orthogonal projector onto span(vectors).
CMatrix span_projector(const std::vector<ArcState>& vectors, double tol = 1e-10);
int span_rank(const std::vector<ArcState>& vectors, double tol = 1e-10);

/// sum_{e in c} (arg w(e) - arg w(ebar) + theta(e)).
double cycle_phase(const ClosedPath& c, const WalkData& data);
/// sum_{e in c} (log |w(e)|^2 - log |w(ebar)|^2); zero for every cycle iff |w|^2 is reversible.
double cycle_log_ratio(const ClosedPath& c, const std::vector<Cx>& w);

/// Edge-indexed 1-form that makes eigenvalue 1 of T appear, or nullopt if
/// the modulus |w|^2 is not reversible (Kolmogorov test at 1e-9).
std::optional<std::vector<double>> reversibility_one_form(const SymmetricDigraph& g, const std::vector<Cx>& w);

enum class WalkCase { I, II, III, IV };
std::string to_string(WalkCase c);

struct CaseReport {
  WalkCase walk_case = WalkCase::IV;
  int m_plus = 0;   // predicted multiplicity of +1 in spec(T)
  int m_minus = 0;  // predicted multiplicity of -1 in spec(T)
  int counted_plus = 0;
  int counted_minus = 0;
  bool bipartite = false;
  bool reversible = false;
  bool ambiguous = false;  // some cycle phase sits between 1e-9 and 1e-6 of a branch
  bool consistent() const { return m_plus == counted_plus && m_minus == counted_minus; }
};

CaseReport classify_case(const SymmetricDigraph& g, const WalkData& data);

}  // namespace qwalk
