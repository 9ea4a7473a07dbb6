#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

using VertexId = int;
using ArcId = int;
using EdgeList = std::vector<std::pair<VertexId, VertexId>>;

/// Undirected multigraph stored as arcs. Edge i owns arcs 2i (u -> v) and
/// 2i + 1 (v -> u); the inverse of an arc is obtained by flipping the low bit.
/// Self-loops give two distinct arcs with equal origin and terminus.
class SymmetricDigraph {
 public:
  SymmetricDigraph() = default;

  int vertex_count() const { return vertex_count_; }
  int arc_count() const { return static_cast<int>(origin_.size()); }
  int edge_count() const { return arc_count() / 2; }

  VertexId origin(ArcId e) const { return origin_[e]; }
  VertexId terminus(ArcId e) const { return origin_[e ^ 1]; }
  static constexpr ArcId inverse(ArcId e) { return e ^ 1; }
  static constexpr bool is_canonical(ArcId e) { return (e & 1) == 0; }
  static constexpr int edge_of(ArcId e) { return e >> 1; }

  int degree(VertexId v) const { return static_cast<int>(out_[v].size()); }
  /// Outgoing arcs of v in ascending arc-id order.
  std::span<const ArcId> out_arcs(VertexId v) const { return out_[v]; }

  EdgeList edges() const;

 private:
  friend SymmetricDigraph build_graph(const EdgeList& edges, int vertex_count);
  friend SymmetricDigraph build_graph_unchecked(const EdgeList& edges, int vertex_count);

  int vertex_count_ = 0;
  std::vector<VertexId> origin_;
  std::vector<std::vector<ArcId>> out_;
};

/// Builds the graph and rejects it unless it is connected.
SymmetricDigraph build_graph(const EdgeList& edges, int vertex_count);
SymmetricDigraph build_graph_unchecked(const EdgeList& edges, int vertex_count);

/// Component label per vertex, labels numbered in order of first appearance.
std::vector<int> connected_components(const SymmetricDigraph& g);
bool is_connected(const SymmetricDigraph& g);
/// Two-colouring if one exists. Self-loops make a graph non-bipartite.
std::optional<std::vector<int>> bipartition(const SymmetricDigraph& g);
inline bool is_bipartite(const SymmetricDigraph& g) { return bipartition(g).has_value(); }

/// Weight w and 1-form theta on arcs. theta is stored per edge on the
/// canonical arc; theta(ebar) = -theta(e) therefore holds by construction.
class WalkData {
 public:
  /// Throws InvalidInput if some w(e) == 0 or a vertex is not normalized.
  WalkData(const SymmetricDigraph& g, std::vector<Cx> weight, std::vector<double> edge_theta);

  /// w = 1/sqrt(deg(o(e))), theta = 0.
  static WalkData grover(const SymmetricDigraph& g);
  static WalkData grover(const SymmetricDigraph& g, std::vector<double> edge_theta);

  Cx w(ArcId e) const { return weight_[e]; }
  double theta(ArcId e) const {
    return SymmetricDigraph::is_canonical(e) ? edge_theta_[e >> 1] : -edge_theta_[e >> 1];
  }
  const std::vector<Cx>& weights() const { return weight_; }
  const std::vector<double>& edge_theta() const { return edge_theta_; }

 private:
  std::vector<Cx> weight_;
  std::vector<double> edge_theta_;
};

enum class PathKind { EvenCycle, OddCycle, OddOddBridge, GenericEvenClosedPath, GenericOddClosedPath };

std::string to_string(PathKind kind);

/// A closed path (e_1, ..., e_n) with t(e_j) = o(e_{j+1}) and t(e_n) = o(e_1).
struct ClosedPath {
  std::vector<ArcId> arcs;
  PathKind kind = PathKind::GenericEvenClosedPath;

  int length() const { return static_cast<int>(arcs.size()); }
  VertexId base(const SymmetricDigraph& g) const { return g.origin(arcs.front()); }
};

/// Validates incidence and tags the path. Throws InvalidInput if not closed.
ClosedPath make_closed_path(const SymmetricDigraph& g, std::vector<ArcId> arcs);
ClosedPath reversed(const ClosedPath& c);

/// BFS spanning tree from vertex 0 plus one fundamental cycle per non-tree edge.
struct CycleBasis {
  std::vector<bool> tree_edge;         // per edge
  std::vector<ArcId> parent_arc;       // arc from parent into v; -1 at the root
  std::vector<int> depth;
  std::vector<int> non_tree_edges;     // ascending edge ids
  std::vector<ClosedPath> cycles;      // cycles[j] starts with arc 2 * non_tree_edges[j]

  int rank() const { return static_cast<int>(cycles.size()); }
};

CycleBasis spanning_tree_and_cycles(const SymmetricDigraph& g);

/// Arcs of the unique tree path from a to b (empty when a == b).
std::vector<ArcId> tree_path(const SymmetricDigraph& g, const CycleBasis& basis, VertexId a, VertexId b);

/// gamma(p) = sum_j (delta_{e_j} - delta_{ebar_j}).
ArcState gamma_vector(const ClosedPath& c, const SymmetricDigraph& g);
/// tau(p) = sum_j (-1)^j (delta_{e_j} + delta_{ebar_j}), j counted from 1.
/// Odd-length paths are rejected unless allow_odd is set.
ArcState tau_vector(const ClosedPath& c, const SymmetricDigraph& g, bool allow_odd = false);

/// Closed path (c1, p, c2, p^{-1}) with p the tree path between the base points.
ClosedPath odd_odd_bridge(const SymmetricDigraph& g, const CycleBasis& basis, const ClosedPath& c1,
                          const ClosedPath& c2);

}  // namespace qwalk
