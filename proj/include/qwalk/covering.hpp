#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qwalk/graph.hpp"

namespace qwalk {

/// Finite quotient graph plus a displacement vector theta_hat per edge.
/// Arc 2i carries theta_hat[i], arc 2i + 1 carries -theta_hat[i].
class QuotientSpec {
 public:
  QuotientSpec(SymmetricDigraph graph, int dimension, std::vector<RVector> edge_theta_hat,
               std::string name = "custom");

  const SymmetricDigraph& graph() const { return graph_; }
  int dimension() const { return dimension_; }
  const std::string& name() const { return name_; }
  RVector theta_hat(ArcId e) const {
    return SymmetricDigraph::is_canonical(e) ? edge_theta_hat_[e >> 1] : RVector(-edge_theta_hat_[e >> 1]);
  }
  const std::vector<RVector>& edge_theta_hat() const { return edge_theta_hat_; }
  /// theta(e) = <k, theta_hat(e)> per edge.
  std::vector<double> one_form_at(const RVector& k) const;
  /// True for the d-bouquet with the standard basis as displacements.
  bool is_square_lattice() const;
  bool has_integral_displacements() const;

 private:
  SymmetricDigraph graph_;
  int dimension_;
  std::vector<RVector> edge_theta_hat_;
  std::string name_;
};

/// d-bouquet with theta_hat = standard basis (Z^d).
QuotientSpec square_lattice(int d);
/// 3-bouquet with theta_hat = (1,0), (0,1), (-1,-1).
QuotientSpec triangular_lattice();
/// Two vertices joined by three parallel edges, theta_hat = (0,0), (1,0), (0,1).
QuotientSpec hexagonal_lattice();
/// Preset by name ("zd", "triangular", "hexagonal"); dimension only used for "zd".
QuotientSpec lattice_preset(const std::string& name, int d = 2);

/// {"vertices": n, "edges": [{"from": u, "to": v, "theta_hat": [...]}], "dimension": d}
QuotientSpec quotient_from_json(const std::string& text);
QuotientSpec quotient_from_file(const std::string& path);
std::string quotient_to_json(const QuotientSpec& spec);

/// Periodic (Z/N)^d covering of a quotient spec. Vertex (x, u) has id
/// cell(x) * |V0| + u; arc (x, e) of quotient arc e originates in cell x.
/// With build_graph = false only the cell bookkeeping is kept, which is all
/// the arc-local lattice evolution needs.
class CoveringGraph {
 public:
  CoveringGraph(std::shared_ptr<const QuotientSpec> spec, int side, bool build_graph = true);

  bool has_graph() const { return has_graph_; }
  /// Throws Error if the covering was built without its graph.
  const SymmetricDigraph& graph() const;
  const QuotientSpec& quotient() const { return *spec_; }
  std::shared_ptr<const QuotientSpec> quotient_ptr() const { return spec_; }
  int side() const { return side_; }
  int dimension() const { return spec_->dimension(); }
  int cell_count() const { return cell_count_; }

  std::vector<int> cell_coords(int cell) const;
  int cell_index(const std::vector<int>& coords) const;  // coordinates taken mod N
  /// Cell reached from `cell` by adding the integer displacement of quotient arc e.
  int shifted_cell(int cell, ArcId quotient_arc) const;
  /// Signed representative of a coordinate in (-N/2, N/2].
  int centered(int coord) const;

  VertexId vertex_of(int cell, VertexId u) const { return cell * spec_->graph().vertex_count() + u; }
  ArcId arc_of(int cell, ArcId quotient_arc) const;
  int cell_of_arc(ArcId cover_arc) const;
  ArcId quotient_arc_of(ArcId cover_arc) const;
  const std::vector<int>& displacement(ArcId quotient_arc) const { return int_hat_[quotient_arc]; }

 private:
  std::shared_ptr<const QuotientSpec> spec_;
  int side_;
  int cell_count_;
  std::vector<std::vector<int>> int_hat_;  // per quotient arc
  bool has_graph_ = false;
  SymmetricDigraph graph_;
};

CoveringGraph build_torus_covering(const QuotientSpec& spec, int side, bool build_graph = true);

}  // namespace qwalk
