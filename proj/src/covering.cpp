#include "qwalk/covering.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qwalk {

QuotientSpec::QuotientSpec(SymmetricDigraph graph, int dimension, std::vector<RVector> edge_theta_hat,
                           std::string name)
    : graph_(std::move(graph)), dimension_(dimension), edge_theta_hat_(std::move(edge_theta_hat)),
      name_(std::move(name)) {
  if (dimension_ < 1) throw InvalidInput("quotient dimension must be >= 1");
  if (static_cast<int>(edge_theta_hat_.size()) != graph_.edge_count())
    throw InvalidInput("theta_hat must be given for every edge");
  RMatrix stacked(dimension_, graph_.edge_count());
  for (int i = 0; i < graph_.edge_count(); ++i) {
    if (edge_theta_hat_[i].size() != dimension_)
      throw InvalidInput("theta_hat of edge " + std::to_string(i) + " has wrong length");
    stacked.col(i) = edge_theta_hat_[i];
  }
  Eigen::FullPivLU<RMatrix> lu(stacked);
  lu.setThreshold(1e-10);
  if (graph_.edge_count() == 0 || lu.rank() != dimension_)
    throw InvalidInput("theta_hat vectors must span R^" + std::to_string(dimension_));
}

std::vector<double> QuotientSpec::one_form_at(const RVector& k) const {
  if (k.size() != dimension_) throw InvalidInput("k has wrong dimension");
  std::vector<double> theta(graph_.edge_count());
  for (int i = 0; i < graph_.edge_count(); ++i) theta[i] = k.dot(edge_theta_hat_[i]);
  return theta;
}

bool QuotientSpec::is_square_lattice() const {
  if (graph_.vertex_count() != 1 || graph_.edge_count() != dimension_) return false;
  for (int i = 0; i < dimension_; ++i) {
    if ((edge_theta_hat_[i] - RVector::Unit(dimension_, i)).cwiseAbs().maxCoeff() > 0) return false;
  }
  return true;
}

bool QuotientSpec::has_integral_displacements() const {
  for (const auto& v : edge_theta_hat_)
    for (int j = 0; j < v.size(); ++j)
      if (std::abs(v[j] - std::round(v[j])) > 1e-12) return false;
  return true;
}

QuotientSpec square_lattice(int d) {
  if (d < 1) throw InvalidInput("square lattice dimension must be >= 1");
  EdgeList edges(d, {0, 0});
  std::vector<RVector> hat;
  for (int j = 0; j < d; ++j) hat.push_back(RVector::Unit(d, j));
  return QuotientSpec(build_graph(edges, 1), d, std::move(hat), "zd");
}

QuotientSpec triangular_lattice() {
  EdgeList edges(3, {0, 0});
  std::vector<RVector> hat{RVector::Unit(2, 0), RVector::Unit(2, 1), RVector::Constant(2, -1.0)};
  return QuotientSpec(build_graph(edges, 1), 2, std::move(hat), "triangular");
}

QuotientSpec hexagonal_lattice() {
  EdgeList edges(3, {0, 1});
  std::vector<RVector> hat{RVector::Zero(2), RVector::Unit(2, 0), RVector::Unit(2, 1)};
  return QuotientSpec(build_graph(edges, 2), 2, std::move(hat), "hexagonal");
}

QuotientSpec lattice_preset(const std::string& name, int d) {
  if (name == "zd") return square_lattice(d);
  if (name == "triangular") return triangular_lattice();
  if (name == "hexagonal") return hexagonal_lattice();
  throw InvalidInput("unknown lattice preset '" + name + "'");
}

QuotientSpec quotient_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("quotient spec is not valid JSON: ") + e.what());
  }
  try {
    const int n = j.at("vertices").get<int>();
    const int d = j.at("dimension").get<int>();
    EdgeList edges;
    std::vector<RVector> hat;
    for (const auto& e : j.at("edges")) {
      edges.emplace_back(e.at("from").get<int>(), e.at("to").get<int>());
      RVector h = RVector::Zero(d);
      if (e.contains("theta_hat")) {
        const auto v = e.at("theta_hat").get<std::vector<double>>();
        if (static_cast<int>(v.size()) != d) throw InvalidInput("theta_hat length differs from dimension");
        for (int k = 0; k < d; ++k) h[k] = v[k];
      }
      hat.push_back(h);
    }
    return QuotientSpec(build_graph(edges, n), d, std::move(hat), j.value("name", std::string("custom")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("quotient spec: ") + e.what());
  }
}

QuotientSpec quotient_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open quotient spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return quotient_from_json(ss.str());
}

std::string quotient_to_json(const QuotientSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name();
  j["vertices"] = spec.graph().vertex_count();
  j["dimension"] = spec.dimension();
  j["edges"] = nlohmann::json::array();
  const auto edges = spec.graph().edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& h = spec.edge_theta_hat()[i];
    j["edges"].push_back({{"from", edges[i].first},
                          {"to", edges[i].second},
                          {"theta_hat", std::vector<double>(h.data(), h.data() + h.size())}});
  }
  return j.dump(2);
}

CoveringGraph::CoveringGraph(std::shared_ptr<const QuotientSpec> spec, int side, bool build_graph_now)
    : spec_(std::move(spec)), side_(side) {
  if (side_ < 2) throw InvalidInput("torus side length must be >= 2");
  if (!spec_->has_integral_displacements())
    throw InvalidInput("covering construction needs integral theta_hat (k-space routines accept real ones)");
  const int d = spec_->dimension();
  cell_count_ = 1;
  for (int j = 0; j < d; ++j) {
    if (cell_count_ > (1 << 28) / side_) throw InvalidInput("torus too large");
    cell_count_ *= side_;
  }
  const SymmetricDigraph& q = spec_->graph();
  int_hat_.resize(q.arc_count());
  for (ArcId e = 0; e < q.arc_count(); ++e) {
    const RVector h = spec_->theta_hat(e);
    int_hat_[e].resize(d);
    for (int j = 0; j < d; ++j) int_hat_[e][j] = static_cast<int>(std::lround(h[j]));
  }
  if (!build_graph_now) return;
  EdgeList edges;
  edges.reserve(static_cast<std::size_t>(cell_count_) * q.edge_count());
  for (int cell = 0; cell < cell_count_; ++cell) {
    for (int i = 0; i < q.edge_count(); ++i) {
      const ArcId a = 2 * i;
      edges.emplace_back(vertex_of(cell, q.origin(a)), vertex_of(shifted_cell(cell, a), q.terminus(a)));
    }
  }
  graph_ = build_graph(edges, cell_count_ * q.vertex_count());
  has_graph_ = true;
}

const SymmetricDigraph& CoveringGraph::graph() const {
  if (!has_graph_) throw Error("covering was built without its graph");
  return graph_;
}

std::vector<int> CoveringGraph::cell_coords(int cell) const {
  const int d = dimension();
  std::vector<int> x(d);
  for (int j = d - 1; j >= 0; --j) {
    x[j] = cell % side_;
    cell /= side_;
  }
  return x;
}

int CoveringGraph::cell_index(const std::vector<int>& coords) const {
  int idx = 0;
  for (int c : coords) idx = idx * side_ + ((c % side_) + side_) % side_;
  return idx;
}

int CoveringGraph::shifted_cell(int cell, ArcId quotient_arc) const {
  auto x = cell_coords(cell);
  for (int j = 0; j < dimension(); ++j) x[j] += int_hat_[quotient_arc][j];
  return cell_index(x);
}

int CoveringGraph::centered(int coord) const {
  int c = ((coord % side_) + side_) % side_;
  if (c > side_ / 2) c -= side_;
  return c;
}

ArcId CoveringGraph::arc_of(int cell, ArcId quotient_arc) const {
  const int edges = spec_->graph().edge_count();
  const int i = quotient_arc >> 1;
  if (SymmetricDigraph::is_canonical(quotient_arc)) return 2 * (cell * edges + i);
  // The inverse arc lives in the cell its canonical partner points to.
  const int source = shifted_cell(cell, quotient_arc);
  return 2 * (source * edges + i) + 1;
}

int CoveringGraph::cell_of_arc(ArcId cover_arc) const {
  const int edges = spec_->graph().edge_count();
  const int cell = (cover_arc >> 1) / edges;
  if (SymmetricDigraph::is_canonical(cover_arc)) return cell;
  return shifted_cell(cell, quotient_arc_of(cover_arc) ^ 1);
}

ArcId CoveringGraph::quotient_arc_of(ArcId cover_arc) const {
  const int edges = spec_->graph().edge_count();
  const int i = (cover_arc >> 1) % edges;
  return 2 * i + (cover_arc & 1);
}

CoveringGraph build_torus_covering(const QuotientSpec& spec, int side, bool build_graph) {
  return CoveringGraph(std::make_shared<const QuotientSpec>(spec), side, build_graph);
}

}  // namespace qwalk
