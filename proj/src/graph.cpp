#include "qwalk/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace qwalk {

EdgeList SymmetricDigraph::edges() const {
  EdgeList out;
  out.reserve(edge_count());
  for (int i = 0; i < edge_count(); ++i) out.emplace_back(origin(2 * i), terminus(2 * i));
  return out;
}

SymmetricDigraph build_graph_unchecked(const EdgeList& edges, int vertex_count) {
  if (vertex_count < 1) throw InvalidInput("graph needs at least one vertex");
  SymmetricDigraph g;
  g.vertex_count_ = vertex_count;
  g.origin_.resize(2 * edges.size());
  g.out_.assign(vertex_count, {});
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
      std::ostringstream msg;
      msg << "edge " << i << " (" << u << "," << v << ") references a vertex outside [0," << vertex_count
          << ")";
      throw InvalidInput(msg.str());
    }
    g.origin_[2 * i] = u;
    g.origin_[2 * i + 1] = v;
  }
  for (int e = 0; e < g.arc_count(); ++e) g.out_[g.origin_[e]].push_back(e);
  return g;
}

SymmetricDigraph build_graph(const EdgeList& edges, int vertex_count) {
  SymmetricDigraph g = build_graph_unchecked(edges, vertex_count);
  const auto comp = connected_components(g);
  const int n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (n_comp > 1) {
    std::vector<int> sizes(n_comp, 0);
    for (int c : comp) ++sizes[c];
    std::ostringstream msg;
    msg << "graph is disconnected: " << n_comp << " components of sizes";
    for (int s : sizes) msg << ' ' << s;
    msg << "; vertex 0 lies in a component of size " << sizes[0];
    throw InvalidInput(msg.str());
  }
  return g;
}

std::vector<int> connected_components(const SymmetricDigraph& g) {
  std::vector<int> label(g.vertex_count(), -1);
  int next = 0;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < g.vertex_count(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (ArcId e : g.out_arcs(u)) {
        const VertexId v = g.terminus(e);
        if (label[v] < 0) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

bool is_connected(const SymmetricDigraph& g) {
  const auto comp = connected_components(g);
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

std::optional<std::vector<int>> bipartition(const SymmetricDigraph& g) {
  std::vector<int> colour(g.vertex_count(), -1);
  std::deque<VertexId> queue;
  for (VertexId s = 0; s < g.vertex_count(); ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    queue.push_back(s);
    while (!queue.empty()) {
      const VertexId u = queue.front();
      queue.pop_front();
      for (ArcId e : g.out_arcs(u)) {
        const VertexId v = g.terminus(e);
        if (colour[v] < 0) {
          colour[v] = 1 - colour[u];
          queue.push_back(v);
        } else if (colour[v] == colour[u]) {
          return std::nullopt;
        }
      }
    }
  }
  return colour;
}

WalkData::WalkData(const SymmetricDigraph& g, std::vector<Cx> weight, std::vector<double> edge_theta)
    : weight_(std::move(weight)), edge_theta_(std::move(edge_theta)) {
  if (static_cast<int>(weight_.size()) != g.arc_count())
    throw InvalidInput("weight vector length does not match arc count");
  if (static_cast<int>(edge_theta_.size()) != g.edge_count())
    throw InvalidInput("1-form length does not match edge count");
  for (int e = 0; e < g.arc_count(); ++e) {
    if (weight_[e] == Cx(0.0)) throw InvalidInput("weight vanishes on arc " + std::to_string(e));
  }
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    double s = 0.0;
    for (ArcId e : g.out_arcs(u)) s += std::norm(weight_[e]);
    if (std::abs(s - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "weight not normalized at vertex " << u << ": sum |w|^2 = " << s;
      throw InvalidInput(msg.str());
    }
  }
}

WalkData WalkData::grover(const SymmetricDigraph& g) {
  return grover(g, std::vector<double>(g.edge_count(), 0.0));
}

WalkData WalkData::grover(const SymmetricDigraph& g, std::vector<double> edge_theta) {
  std::vector<Cx> w(g.arc_count());
  for (int e = 0; e < g.arc_count(); ++e) w[e] = 1.0 / std::sqrt(static_cast<double>(g.degree(g.origin(e))));
  return WalkData(g, std::move(w), std::move(edge_theta));
}

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::EvenCycle: return "even-cycle";
    case PathKind::OddCycle: return "odd-cycle";
    case PathKind::OddOddBridge: return "odd-odd-bridge";
    case PathKind::GenericEvenClosedPath: return "generic-even-closed-path";
    case PathKind::GenericOddClosedPath: return "generic-odd-closed-path";
  }
  return "unknown";
}

ClosedPath make_closed_path(const SymmetricDigraph& g, std::vector<ArcId> arcs) {
  if (arcs.empty()) throw InvalidInput("closed path must contain at least one arc");
  const int n = static_cast<int>(arcs.size());
  for (int j = 0; j < n; ++j) {
    if (arcs[j] < 0 || arcs[j] >= g.arc_count()) throw InvalidInput("closed path references unknown arc");
  }
  for (int j = 0; j < n; ++j) {
    const ArcId cur = arcs[j];
    const ArcId nxt = arcs[(j + 1) % n];
    if (g.terminus(cur) != g.origin(nxt)) {
      std::ostringstream msg;
      msg << "path is not closed: t(arc " << cur << ") = " << g.terminus(cur) << " but o(arc " << nxt
          << ") = " << g.origin(nxt);
      throw InvalidInput(msg.str());
    }
  }
  std::vector<VertexId> origins(n);
  for (int j = 0; j < n; ++j) origins[j] = g.origin(arcs[j]);
  std::sort(origins.begin(), origins.end());
  const bool simple = std::adjacent_find(origins.begin(), origins.end()) == origins.end();
  // A back-and-forth pair (e, ebar) has distinct origins but is not a cycle.
  const bool backtrack = n == 2 && arcs[1] == SymmetricDigraph::inverse(arcs[0]);
  ClosedPath c{std::move(arcs), PathKind::GenericEvenClosedPath};
  if (simple && !backtrack)
    c.kind = (n % 2 == 0) ? PathKind::EvenCycle : PathKind::OddCycle;
  else
    c.kind = (n % 2 == 0) ? PathKind::GenericEvenClosedPath : PathKind::GenericOddClosedPath;
  return c;
}

ClosedPath reversed(const ClosedPath& c) {
  ClosedPath r;
  r.arcs.reserve(c.arcs.size());
  for (auto it = c.arcs.rbegin(); it != c.arcs.rend(); ++it) r.arcs.push_back(SymmetricDigraph::inverse(*it));
  r.kind = c.kind;
  return r;
}

CycleBasis spanning_tree_and_cycles(const SymmetricDigraph& g) {
  if (!is_connected(g)) throw InvalidInput("spanning tree requires a connected graph");
  CycleBasis b;
  b.tree_edge.assign(g.edge_count(), false);
  b.parent_arc.assign(g.vertex_count(), -1);
  b.depth.assign(g.vertex_count(), -1);

  std::deque<VertexId> queue{0};
  b.depth[0] = 0;
  while (!queue.empty()) {
    const VertexId u = queue.front();
    queue.pop_front();
    std::vector<ArcId> arcs(g.out_arcs(u).begin(), g.out_arcs(u).end());
    std::stable_sort(arcs.begin(), arcs.end(),
                     [&](ArcId a, ArcId c) { return g.terminus(a) < g.terminus(c); });
    for (ArcId e : arcs) {
      const VertexId v = g.terminus(e);
      if (b.depth[v] >= 0) continue;
      b.depth[v] = b.depth[u] + 1;
      b.parent_arc[v] = e;
      b.tree_edge[SymmetricDigraph::edge_of(e)] = true;
      queue.push_back(v);
    }
  }

  for (int i = 0; i < g.edge_count(); ++i) {
    if (b.tree_edge[i]) continue;
    b.non_tree_edges.push_back(i);
    const ArcId a = 2 * i;
    std::vector<ArcId> arcs{a};
    const auto back = tree_path(g, b, g.terminus(a), g.origin(a));
    arcs.insert(arcs.end(), back.begin(), back.end());
    b.cycles.push_back(make_closed_path(g, std::move(arcs)));
  }
  return b;
}

std::vector<ArcId> tree_path(const SymmetricDigraph& g, const CycleBasis& basis, VertexId a, VertexId b) {
  std::vector<ArcId> up;    // arcs from a upward, oriented away from a
  std::vector<ArcId> down;  // arcs from b upward, oriented toward b
  while (a != b) {
    if (basis.depth[a] >= basis.depth[b]) {
      const ArcId p = basis.parent_arc[a];
      up.push_back(SymmetricDigraph::inverse(p));
      a = g.origin(p);
    } else {
      const ArcId p = basis.parent_arc[b];
      down.push_back(p);
      b = g.origin(p);
    }
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

ArcState gamma_vector(const ClosedPath& c, const SymmetricDigraph& g) {
  ArcState v = ArcState::Zero(g.arc_count());
  for (ArcId e : c.arcs) {
    v[e] += 1.0;
    v[SymmetricDigraph::inverse(e)] -= 1.0;
  }
  return v;
}

ArcState tau_vector(const ClosedPath& c, const SymmetricDigraph& g, bool allow_odd) {
  if (c.length() % 2 != 0 && !allow_odd)
    throw InvalidInput("tau vector needs an even-length closed path");
  ArcState v = ArcState::Zero(g.arc_count());
  for (int j = 0; j < c.length(); ++j) {
    const double sign = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^(j+1) with 0-based j
    v[c.arcs[j]] += sign;
    v[SymmetricDigraph::inverse(c.arcs[j])] += sign;
  }
  return v;
}

ClosedPath odd_odd_bridge(const SymmetricDigraph& g, const CycleBasis& basis, const ClosedPath& c1,
                          const ClosedPath& c2) {
  const auto p = tree_path(g, basis, c1.base(g), c2.base(g));
  std::vector<ArcId> arcs(c1.arcs);
  arcs.insert(arcs.end(), p.begin(), p.end());
  arcs.insert(arcs.end(), c2.arcs.begin(), c2.arcs.end());
  for (auto it = p.rbegin(); it != p.rend(); ++it) arcs.push_back(SymmetricDigraph::inverse(*it));
  ClosedPath c = make_closed_path(g, std::move(arcs));
  c.kind = PathKind::OddOddBridge;
  return c;
}

}  // namespace qwalk
