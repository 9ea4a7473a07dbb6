#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "qwalk/acceptance.hpp"
#include "qwalk/crystal.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"
#include "qwalk/weak_limits.hpp"

using namespace qwalk;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kVerify = 2, kPathology = 3 };

std::shared_ptr<const QuotientSpec> load_lattice(const std::string& name, int dim) {
  if (name == "zd" || name == "triangular" || name == "hexagonal")
    return std::make_shared<const QuotientSpec>(lattice_preset(name, dim));
  return std::make_shared<const QuotientSpec>(quotient_from_file(name));
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidInput("cannot parse number '" + item + "'");
    }
  }
  return out;
}

RVector to_rvector(const std::vector<double>& v) {
  RVector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i];
  return r;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json complex_list(const std::vector<Cx>& z) {
  json a = json::array();
  for (const Cx& c : z) a.push_back({c.real(), c.imag()});
  return a;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct Options {
  std::string lattice = "zd";
  int dim = 2;
  int size = 0;
  int steps = 0;
  std::string init = "mixed";
  std::string record;
  int grid = 256;
  int bins = 100;
  std::string out;
  std::string k;
  int torus = 0;
  long long seed = -1;
  std::string xi;
  std::string suite = "all";
  std::vector<std::string> files;
  double tol = 0.05;
  double min_mass = 1e-4;
  bool analytic = false;
  int threads = 0;
};

int cmd_spectrum(const Options& o) {
  auto spec = load_lattice(o.lattice, o.dim);
  SymmetricDigraph g;
  std::unique_ptr<WalkData> data;
  if (o.torus > 0) {
    const CoveringGraph cov(spec, o.torus);
    g = cov.graph();
    data = std::make_unique<WalkData>(WalkData::grover(g));
  } else {
    g = spec->graph();
    if (o.seed >= 0) {
      instances::Rng rng(static_cast<unsigned long long>(o.seed));
      data = std::make_unique<WalkData>(instances::random_walk_data(g, rng));
    } else if (!o.k.empty()) {
      data = std::make_unique<WalkData>(quotient_data_at_k(*spec, to_rvector(parse_list(o.k))));
    } else {
      data = std::make_unique<WalkData>(WalkData::grover(g));
    }
  }
  const RVector st = hermitian_eigenvalues(discriminant(g, *data));
  const auto predicted = spectral_map(st, g.edge_count(), g.vertex_count());
  const auto direct = unitary_eigenvalues(build_evolution(g, *data));
  const CaseReport rep = classify_case(g, *data);
  json j;
  j["eigenvalues_T"] = std::vector<double>(st.data(), st.data() + st.size());
  j["eigenvalues_U_predicted"] = complex_list(predicted);
  j["eigenvalues_U_direct"] = complex_list(direct);
  j["max_deviation"] = multiset_distance(direct, predicted);
  j["case"] = to_string(rep.walk_case);
  j["m1"] = rep.m_plus;
  j["m_1"] = rep.m_minus;
  j["ambiguous"] = rep.ambiguous;
  Output(o.out).stream() << j.dump(2) << "\n";
  return kOk;
}

int cmd_band(const Options& o) {
  auto spec = load_lattice(o.lattice, o.dim);
  const auto bs = band_structure(spec, o.grid);
  const int d = spec->dimension();
  Output out(o.out);
  std::ostream& os = out.stream();
  for (int j = 0; j < d; ++j) os << "k" << j + 1 << ",";
  os << "band,cos_phi";
  for (int j = 0; j < d; ++j) os << ",v" << j + 1;
  os << ",detH\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < bs.grid.size(); ++i) {
    const RVector k = bs.grid.point(i);
    for (int b = 0; b < bs.band_count(); ++b) {
      RVector v = RVector::Constant(d, nan);
      double det = nan;
      try {
        v = group_velocity(*spec, k, b);
        det = spec->is_square_lattice() ? det_hessian_formula(k) : hessian(*spec, k, b).determinant();
      } catch (const InvalidInput&) {
      }
      for (int j = 0; j < d; ++j) os << num(k[j]) << ",";
      os << b << "," << num(bs.cos_phi(i, b));
      for (int j = 0; j < d; ++j) os << "," << num(v[j]);
      os << "," << num(det) << "\n";
    }
  }
  return kOk;
}

json point_json(const CriticalPoint& p) {
  return {{"k", std::vector<double>(p.k.data(), p.k.data() + p.k.size())},
          {"band", p.band},
          {"gradient_norm", p.gradient_norm},
          {"det_hessian", p.det_hessian},
          {"degenerate", p.degenerate}};
}

int cmd_critical(const Options& o) {
  auto spec = load_lattice(o.lattice, o.dim);
  const auto bs = band_structure(spec, o.grid);
  const auto cps = critical_points(bs);
  json j;
  j["lattice"] = spec->name();
  j["points"] = json::array();
  for (const auto& p : cps.points) j["points"].push_back(point_json(p));
  j["excluded"] = json::array();
  for (const auto& p : cps.excluded) j["excluded"].push_back(point_json(p));
  j["unrefined"] = json::array();
  for (const auto& p : cps.unrefined) j["unrefined"].push_back(point_json(p));
  j["crossing_ambiguity"] = bs.crossing_ambiguity;
  Output(o.out).stream() << j.dump(2) << "\n";
  return kOk;
}

std::vector<ArcId> parse_arcs(const std::string& text) {
  std::vector<ArcId> arcs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '-')) {
    try {
      arcs.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InvalidInput("cannot parse arc id '" + item + "'");
    }
  }
  return arcs;
}

int cmd_evolve(const Options& o) {
  auto spec = load_lattice(o.lattice, o.dim);
  if (o.steps < 0) throw InvalidInput("--steps must be non-negative");
  const int side = o.size > 0 ? o.size : auto_torus_side(*spec, o.steps);
  const CoveringGraph cov(spec, side, false);
  std::vector<int> record;
  if (o.record.empty()) {
    record.push_back(o.steps);
  } else {
    for (double x : parse_list(o.record)) record.push_back(static_cast<int>(x));
  }
  std::vector<LatticeDistribution> dist;
  if (o.init == "mixed") {
    dist = simulate_ensemble(cov, origin_ensemble(cov), record);
  } else {
    LatticeState psi0;
    if (o.init.rfind("arc:", 0) == 0) {
      psi0 = lattice_delta(cov, 0, std::stoi(o.init.substr(4)));
    } else if (o.init.rfind("cycle:", 0) == 0) {
      psi0 = cycle_state(cov, 0, parse_arcs(o.init.substr(6)));
    } else if (o.init.rfind("tau:", 0) == 0) {
      psi0 = cycle_state(cov, 0, parse_arcs(o.init.substr(4)), true);
    } else {
      throw InvalidInput("--init must be mixed, arc:<id>, cycle:<a-b-...> or tau:<a-b-...>");
    }
    auto run = simulate(cov, psi0, *std::max_element(record.begin(), record.end()), record);
    if (run.warning) std::cerr << "warning: " << *run.warning << "\n";
    dist = std::move(run.records);
  }
  const int safe = wrap_free_steps(cov);
  if (o.init == "mixed" && o.steps > safe) std::cerr << "warning: steps exceed the wrap-free bound (" << safe << ")\n";
  Output out(o.out);
  std::ostream& os = out.stream();
  os << "step";
  for (int j = 0; j < cov.dimension(); ++j) os << ",x" << j + 1;
  os << ",mass\n";
  for (const auto& d : dist)
    for (int cell = 0; cell < cov.cell_count(); ++cell) {
      if (d.mass[cell] == 0.0) continue;
      os << d.step;
      for (int c : cov.cell_coords(cell)) os << "," << cov.centered(c);
      os << "," << num(d.mass[cell]) << "\n";
    }
  return kOk;
}

void write_bins(std::ostream& os, int d, int bins, double half_width, const std::function<double(int)>& value) {
  for (int j = 0; j < d; ++j) os << "x" << j + 1 << ",";
  os << "density\n";
  long long total = 1;
  for (int j = 0; j < d; ++j) total *= bins;
  const double w = 2.0 * half_width / bins;
  for (long long i = 0; i < total; ++i) {
    long long rest = i;
    std::vector<double> c(d);
    for (int j = d - 1; j >= 0; --j) {
      c[j] = -half_width + (rest % bins + 0.5) * w;
      rest /= bins;
    }
    for (int j = 0; j < d; ++j) os << num(c[j]) << ",";
    os << num(value(static_cast<int>(i))) << "\n";
  }
}

int cmd_density(const Options& o) {
  const auto ev = rho_d_pushforward(o.dim, o.grid, o.bins);
  if (ev.resolution_warning) std::cerr << "warning: " << ev.skip_fraction << " of the k-samples were skipped\n";
  write_bins(Output(o.out).stream(), o.dim, o.bins, ev.half_width, [&](int i) { return ev.density(i); });
  return kOk;
}

int cmd_rho2(const Options& o) {
  if (!o.analytic) throw InvalidInput("rho2 needs --analytic");
  const double hw = 1.0 / std::sqrt(2.0), w = 2.0 * hw / o.bins;
  write_bins(Output(o.out).stream(), 2, o.bins, hw, [&](int i) {
    const double x0 = -hw + (i / o.bins) * w, y0 = -hw + (i % o.bins) * w;
    return rho2_bin_average(x0, x0 + w, y0, y0 + w);
  });
  return kOk;
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_list(line));
  return rows;
}

int cmd_compare(const Options& o) {
  if (o.files.size() != 2) throw InvalidInput("compare needs two CSV files");
  const auto a = read_csv(o.files[0]), b = read_csv(o.files[1]);
  if (a.size() != b.size() || a.empty()) throw InvalidInput("CSV files have different bin layouts");
  const int d = static_cast<int>(a[0].size()) - 1;
  std::set<double> xs;
  for (const auto& r : a) xs.insert(r[0]);
  if (xs.size() < 2) throw InvalidInput("need at least two bins per axis");
  const double w = *std::next(xs.begin()) - *xs.begin();
  const double radius = -(*xs.begin()) + 0.5 * w;
  double worst = 0.0;
  int compared = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int j = 0; j < d; ++j)
      if (std::abs(a[i][j] - b[i][j]) > 1e-9 * w) throw InvalidInput("CSV files have different bin centres");
    double far = 0.0;
    for (int j = 0; j < d; ++j) far += (std::abs(a[i][j]) + 0.5 * w) * (std::abs(a[i][j]) + 0.5 * w);
    if (std::sqrt(far) > radius) continue;
    if (a[i][d] * std::pow(w, d) <= o.min_mass || b[i][d] <= 0.0) continue;
    worst = std::max(worst, std::abs(a[i][d] - b[i][d]) / b[i][d]);
    ++compared;
  }
  const bool ok = compared > 0 && worst <= o.tol;
  std::cout << (ok ? "PASS" : "FAIL") << " max relative deviation " << worst << " on " << compared
            << " interior bins (tolerance " << o.tol << ")\n";
  return ok ? kOk : kVerify;
}

int cmd_chf(const Options& o) {
  const RVector xi = to_rvector(parse_list(o.xi));
  if (xi.size() != o.dim) throw InvalidInput("--xi must have --dim components");
  std::cout << num(limit_characteristic_function(xi, o.grid)) << "\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  bool ok = true;
  for (int id : suite_criteria(o.suite)) {
    const auto r = run_criterion(id);
    std::cout << format_result(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted Szegedy and Grover walks on graphs and crystal lattices"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker threads (default: QWALK_THREADS or logical cores)");

  auto lattice_opts = [&](CLI::App* c) {
    c->add_option("--lattice", o.lattice, "zd, triangular, hexagonal or a quotient JSON file");
    c->add_option("--dim", o.dim, "dimension for zd")->check(CLI::Range(1, 8));
  };

  auto* spectrum = app.add_subcommand("spectrum", "spectra of T and U with the spectral-map prediction (JSON)");
  lattice_opts(spectrum);
  spectrum->add_option("--k", o.k, "twist theta = <k, theta_hat>, comma separated");
  spectrum->add_option("--torus", o.torus, "use the Grover walk on the N-torus covering instead of the quotient");
  spectrum->add_option("--seed", o.seed, "random weights and 1-form from this seed");
  spectrum->add_option("--out", o.out);

  auto* band = app.add_subcommand("band", "band structure on a k-grid (CSV)");
  lattice_opts(band);
  band->add_option("--grid", o.grid, "k-grid side")->check(CLI::PositiveNumber);
  band->add_option("--out", o.out);

  auto* crit = app.add_subcommand("critical-points", "critical points of the non-flat bands (JSON)");
  lattice_opts(crit);
  crit->add_option("--grid", o.grid, "seed grid side")->check(CLI::PositiveNumber);
  crit->add_option("--out", o.out);

  auto* evolve = app.add_subcommand("evolve", "Grover walk on a torus covering; finding distributions (CSV)");
  lattice_opts(evolve);
  evolve->add_option("--size", o.size, "torus side N (default: sized from --steps)");
  evolve->add_option("--steps", o.steps)->required();
  evolve->add_option("--init", o.init, "mixed, arc:<id>, cycle:<a-b-...> or tau:<a-b-...>");
  evolve->add_option("--record", o.record, "steps to record, comma separated (default: --steps)");
  evolve->add_option("--out", o.out);

  auto* density = app.add_subcommand("density", "histogram of the weak-limit density on Z^d (CSV)");
  density->add_option("--dim", o.dim)->check(CLI::Range(1, 6));
  density->add_option("--grid", o.grid, "k-grid side")->check(CLI::PositiveNumber);
  density->add_option("--bins", o.bins)->check(CLI::PositiveNumber);
  density->add_option("--out", o.out);

  auto* rho = app.add_subcommand("rho2", "closed-form Z^2 density averaged over bins (CSV)");
  rho->add_flag("--analytic", o.analytic);
  rho->add_option("--bins", o.bins)->check(CLI::PositiveNumber);
  rho->add_option("--out", o.out);

  auto* compare = app.add_subcommand("compare", "compare two density CSVs on interior bins");
  compare->add_option("files", o.files)->required()->expected(2);
  compare->add_option("--tol", o.tol);
  compare->add_option("--min-mass", o.min_mass);

  auto* chf = app.add_subcommand("chf", "limit characteristic function on Z^d");
  chf->add_option("--dim", o.dim)->check(CLI::Range(1, 6));
  chf->add_option("--xi", o.xi)->required();
  chf->add_option("--grid", o.grid)->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "run acceptance criteria and print a pass/fail table");
  verify->add_option("--suite", o.suite, "spectral, crystal, lattice, weak-limits or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (o.threads > 0) set_thread_count(o.threads);

  const std::map<CLI::App*, int (*)(const Options&)> handlers = {
      {spectrum, cmd_spectrum}, {band, cmd_band},   {crit, cmd_critical}, {evolve, cmd_evolve}, {density, cmd_density},
      {rho, cmd_rho2},          {compare, cmd_compare}, {chf, cmd_chf},   {verify, cmd_verify},
  };
  try {
    for (const auto& [sub, fn] : handlers)
      if (sub->parsed()) return fn(o);
  } catch (const NumericalPathology& e) {
    std::cerr << "numerical pathology: " << e.what() << "\n";
    return kPathology;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
