#include "qwalk/spectral.hpp"

#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qwalk/walk.hpp"

namespace qwalk {

int Spectrum::total() const {
  int s = 0;
  for (int m : multiplicity) s += m;
  return s;
}

std::vector<Cx> Spectrum::expanded() const {
  std::vector<Cx> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.insert(out.end(), multiplicity[i], values[i]);
  return out;
}

Spectrum cluster_spectrum(std::vector<Cx> values, double gap) {
  std::sort(values.begin(), values.end(), [](Cx a, Cx b) {
    const double pa = wrap_angle(std::arg(a)), pb = wrap_angle(std::arg(b));
    return pa != pb ? pa < pb : std::abs(a) < std::abs(b);
  });
  Spectrum s;
  s.gap = gap;
  for (const Cx v : values) {
    if (!s.values.empty() && std::abs(v - s.values.back()) < gap * std::max(1.0, std::abs(v))) {
      ++s.multiplicity.back();
    } else {
      s.values.push_back(v);
      s.multiplicity.push_back(1);
    }
  }
  // The first and last cluster can meet across the positive real axis.
  if (s.values.size() > 1 && std::abs(s.values.front() - s.values.back()) < gap * std::max(1.0, std::abs(s.values.front()))) {
    s.multiplicity.front() += s.multiplicity.back();
    s.values.pop_back();
    s.multiplicity.pop_back();
  }
  return s;
}

Spectrum cluster_spectrum(const RVector& values, double gap) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  Spectrum s;
  s.gap = gap;
  for (const double x : v) {
    if (!s.values.empty() && std::abs(x - s.values.back().real()) < gap * std::max(1.0, std::abs(x))) {
      ++s.multiplicity.back();
    } else {
      s.values.emplace_back(x, 0.0);
      s.multiplicity.push_back(1);
    }
  }
  return s;
}

double multiset_distance(const std::vector<Cx>& a, const std::vector<Cx>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const Cx x : a) {
    std::size_t best = b.size();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dj = std::abs(x - b[j]);
      if (dj < d) {
        d = dj;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, d);
  }
  return worst;
}

RVector hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalPathology("Hermitian eigensolver did not converge");
  return es.eigenvalues();
}

std::vector<Cx> unitary_eigenvalues(const CMatrix& u) {
  Eigen::ComplexEigenSolver<CMatrix> es(u, false);
  if (es.info() != Eigen::Success) throw NumericalPathology("complex eigensolver did not converge");
  const auto& ev = es.eigenvalues();
  return std::vector<Cx>(ev.data(), ev.data() + ev.size());
}

std::pair<int, int> unit_multiplicities(const RVector& spec_t) {
  int plus = 0, minus = 0;
  for (Eigen::Index i = 0; i < spec_t.size(); ++i) {
    if (std::abs(spec_t[i] - 1.0) < kUnitEigenTol) ++plus;
    if (std::abs(spec_t[i] + 1.0) < kUnitEigenTol) ++minus;
  }
  return {plus, minus};
}

std::vector<Cx> spectral_map(const RVector& spec_t, int edge_count, int vertex_count) {
  std::vector<Cx> out;
  for (Eigen::Index i = 0; i < spec_t.size(); ++i) {
    const double lambda = spec_t[i];
    if (std::abs(lambda) > 1.0 + kUnitEigenTol)
      throw InvalidInput("eigenvalue " + std::to_string(lambda) + " of T lies outside [-1, 1]");
    if (std::abs(lambda - 1.0) < kUnitEigenTol) {
      out.emplace_back(1.0, 0.0);
    } else if (std::abs(lambda + 1.0) < kUnitEigenTol) {
      out.emplace_back(-1.0, 0.0);
    } else {
      const double phi = std::acos(lambda);
      out.push_back(std::polar(1.0, phi));
      out.push_back(std::polar(1.0, -phi));
    }
  }
  const auto [m1, m_1] = unit_multiplicities(spec_t);
  const int flat_plus = std::max(0, edge_count - vertex_count + m1);
  const int flat_minus = std::max(0, edge_count - vertex_count + m_1);
  out.insert(out.end(), flat_plus, Cx(1.0, 0.0));
  out.insert(out.end(), flat_minus, Cx(-1.0, 0.0));
  return out;
}

std::vector<EigenPair> lift_eigenvector(const SymmetricDigraph& g, const WalkData& data,
                                        const VertexState& nu, double cos_phi) {
  const auto ops = boundary_operators(g, data);
  const CMatrix u = build_evolution(g, data);
  const CMatrix t = ops.d_a * ops.d_b.adjoint();
  const double in_res = (t * nu - cos_phi * nu).norm();
  if (in_res > kUnitEigenTol) throw InvalidInput("input is not an eigenvector of T (residual " + std::to_string(in_res) + ")");

  const ArcState a = ops.d_a.adjoint() * nu;
  std::vector<EigenPair> out;
  auto push = [&](Cx value, ArcState v) {
    v /= v.norm();
    const double res = (u * v - value * v).norm();
    if (res > 1e-9) throw NumericalPathology("lifted eigenvector residual " + std::to_string(res));
    out.push_back({value, std::move(v), res});
  };

  if (std::abs(cos_phi - 1.0) < kUnitEigenTol) {
    push(1.0, a);
  } else if (std::abs(cos_phi + 1.0) < kUnitEigenTol) {
    push(-1.0, a);
  } else {
    const double phi = std::acos(std::clamp(cos_phi, -1.0, 1.0));
    const double s = std::sin(phi);
    if (s < 1e-8) throw NumericalPathology("sin(phi) vanishes at an eigenvalue away from +-1");
    const CMatrix shift = shift_operator(g, data);
    const ArcState b = shift * a;
    for (const double sign : {1.0, -1.0}) {
      const Cx z = std::polar(1.0, sign * phi);
      push(z, (a - z * b) / (std::sqrt(2.0) * s));
    }
  }
  return out;
}

std::vector<EigenPair> lift_all(const SymmetricDigraph& g, const WalkData& data) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(discriminant(g, data));
  std::vector<EigenPair> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    auto pairs = lift_eigenvector(g, data, es.eigenvectors().col(i), es.eigenvalues()[i]);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

CycleEigenbasis cycle_eigenspaces(const SymmetricDigraph& g) {
  return cycle_eigenspaces(g, spanning_tree_and_cycles(g));
}

CycleEigenbasis cycle_eigenspaces(const SymmetricDigraph& g, const CycleBasis& basis) {
  CycleEigenbasis out;
  const ClosedPath* first_odd = nullptr;
  for (const ClosedPath& c : basis.cycles) {
    out.plus_paths.push_back(c);
    out.plus.push_back(gamma_vector(c, g));
    if (c.length() % 2 == 0) {
      out.minus_paths.push_back(c);
      out.minus.push_back(tau_vector(c, g));
    } else if (first_odd == nullptr) {
      first_odd = &c;
    } else {
      ClosedPath bridge = odd_odd_bridge(g, basis, *first_odd, c);
      out.minus.push_back(tau_vector(bridge, g));
      out.minus_paths.push_back(std::move(bridge));
    }
  }
  return out;
}

namespace {
CMatrix stack_columns(const std::vector<ArcState>& vectors) {
  if (vectors.empty()) return CMatrix(0, 0);
  CMatrix a(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) a.col(j) = vectors[j];
  return a;
}
}  // namespace

CMatrix span_projector(const std::vector<ArcState>& vectors, double tol) {
  if (vectors.empty()) throw InvalidInput("span_projector needs at least one vector to fix the dimension");
  const CMatrix a = stack_columns(vectors);
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  const CMatrix q = svd.matrixU().leftCols(r);
  return q * q.adjoint();
}

int span_rank(const std::vector<ArcState>& vectors, double tol) {
  if (vectors.empty()) return 0;
  Eigen::BDCSVD<CMatrix> svd(stack_columns(vectors));
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv[0]);
  int r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  return r;
}

double cycle_phase(const ClosedPath& c, const WalkData& data) {
  double s = 0.0;
  for (ArcId e : c.arcs) s += std::arg(data.w(e)) - std::arg(data.w(SymmetricDigraph::inverse(e))) + data.theta(e);
  return s;
}

double cycle_log_ratio(const ClosedPath& c, const std::vector<Cx>& w) {
  double s = 0.0;
  for (ArcId e : c.arcs) s += std::log(std::norm(w[e])) - std::log(std::norm(w[SymmetricDigraph::inverse(e)]));
  return s;
}

std::optional<std::vector<double>> reversibility_one_form(const SymmetricDigraph& g, const std::vector<Cx>& w) {
  if (static_cast<int>(w.size()) != g.arc_count()) throw InvalidInput("weight vector length does not match arc count");
  const CycleBasis basis = spanning_tree_and_cycles(g);
  std::vector<double> theta(g.edge_count(), 0.0);
  for (int j = 0; j < basis.rank(); ++j) {
    const ClosedPath& c = basis.cycles[j];
    if (std::abs(cycle_log_ratio(c, w)) > 1e-9) return std::nullopt;
    double holonomy = 0.0;
    for (ArcId e : c.arcs) holonomy += std::arg(w[e]) - std::arg(w[SymmetricDigraph::inverse(e)]);
    theta[basis.non_tree_edges[j]] = -holonomy;
  }
  return theta;
}

std::string to_string(WalkCase c) {
  switch (c) {
    case WalkCase::I: return "i";
    case WalkCase::II: return "ii";
    case WalkCase::III: return "iii";
    case WalkCase::IV: return "iv";
  }
  return "?";
}

CaseReport classify_case(const SymmetricDigraph& g, const WalkData& data) {
  CaseReport r;
  r.bipartite = is_bipartite(g);
  const CycleBasis basis = spanning_tree_and_cycles(g);
  r.reversible = true;
  bool integral = true;
  bool signed_integral = true;
  auto check = [&](double dist) {
    if (dist > 1e-9 && dist < 1e-6) r.ambiguous = true;
    return dist <= 1e-9;
  };
  for (const ClosedPath& c : basis.cycles) {
    if (std::abs(cycle_log_ratio(c, data.weights())) > 1e-9) r.reversible = false;
    const double phase = cycle_phase(c, data);
    if (!check(distance_mod_2pi(phase))) integral = false;
    if (!check(distance_mod_2pi(phase, kPi * c.length()))) signed_integral = false;
  }
  if (r.reversible && integral) {
    r.walk_case = r.bipartite ? WalkCase::I : WalkCase::II;
  } else if (r.reversible && signed_integral && !r.bipartite) {
    r.walk_case = WalkCase::III;
  } else {
    r.walk_case = WalkCase::IV;
  }
  switch (r.walk_case) {
    case WalkCase::I: r.m_plus = 1, r.m_minus = 1; break;
    case WalkCase::II: r.m_plus = 1, r.m_minus = 0; break;
    case WalkCase::III: r.m_plus = 0, r.m_minus = 1; break;
    case WalkCase::IV: r.m_plus = 0, r.m_minus = 0; break;
  }
  const auto [p, m] = unit_multiplicities(hermitian_eigenvalues(discriminant(g, data)));
  r.counted_plus = p;
  r.counted_minus = m;
  return r;
}

}  // namespace qwalk
