#include "qwalk/crystal.hpp"

#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qwalk/lattice.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

WalkData quotient_data_at_k(const QuotientSpec& spec, const RVector& k) {
  return WalkData::grover(spec.graph(), spec.one_form_at(k));
}

KWalk quotient_walk_at_k(const QuotientSpec& spec, const RVector& k) {
  const SymmetricDigraph& g = spec.graph();
  const WalkData data = quotient_data_at_k(spec, k);
  KWalk out{build_evolution(g, data), discriminant(g, data), CMatrix::Zero(g.vertex_count(), g.vertex_count())};
  for (ArcId f = 0; f < g.arc_count(); ++f)
    out.p(g.terminus(f), g.origin(f)) += std::polar(1.0, data.theta(f)) / static_cast<double>(g.degree(g.origin(f)));
  RVector sq(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) sq[v] = std::sqrt(static_cast<double>(g.degree(v)));
  const CMatrix back = sq.cwiseInverse().asDiagonal() * out.p * sq.asDiagonal();
  if (max_abs(back - out.t) > 1e-12) throw NumericalPathology("twisted transition matrix is not similar to T_k");
  return out;
}

CMatrix discriminant_at_k(const QuotientSpec& spec, const RVector& k) {
  const SymmetricDigraph& g = spec.graph();
  CMatrix t = CMatrix::Zero(g.vertex_count(), g.vertex_count());
  for (ArcId f = 0; f < g.arc_count(); ++f) {
    const VertexId u = g.origin(f), v = g.terminus(f);
    const double theta = k.dot(spec.theta_hat(f));
    t(v, u) += std::polar(1.0, theta) / std::sqrt(static_cast<double>(g.degree(u) * g.degree(v)));
  }
  return t;
}

RVector band_values(const QuotientSpec& spec, const RVector& k) {
  const CMatrix t = discriminant_at_k(spec, k);
  if (t.rows() == 1) return RVector::Constant(1, t(0, 0).real());
  return hermitian_eigenvalues(t).reverse();
}

int KGrid::size() const {
  int s = 1;
  for (int j = 0; j < dim; ++j) s *= side;
  return s;
}

RVector KGrid::point(int index) const {
  RVector k(dim);
  for (int j = dim - 1; j >= 0; --j) {
    k[j] = kTwoPi * ((index % side) + offset) / side;
    index /= side;
  }
  return k;
}

namespace {

// One-dimensional DFT along `axis` of a cells x channels block, in place.
void dft_axis(std::vector<Cx>& data, int side, int dim, int channels, int axis, double sign) {
  std::vector<Cx> twiddle(side);
  for (int m = 0; m < side; ++m) twiddle[m] = std::polar(1.0, sign * kTwoPi * m / side);
  int stride = channels;
  for (int j = dim - 1; j > axis; --j) stride *= side;
  const int block = stride * side;
  const int total = static_cast<int>(data.size());
  std::vector<Cx> line(side), out(side);
  for (int base = 0; base < total; base += block) {
    for (int off = 0; off < stride; ++off) {
      for (int x = 0; x < side; ++x) line[x] = data[base + off + x * stride];
      for (int m = 0; m < side; ++m) {
        Cx s = 0.0;
        for (int x = 0; x < side; ++x) s += line[x] * twiddle[(static_cast<long long>(m) * x) % side];
        out[m] = s;
      }
      for (int m = 0; m < side; ++m) data[base + off + m * stride] = out[m];
    }
  }
}

}  // namespace

KSpaceState dft(const CoveringGraph& cov, const ArcState& psi) {
  const int channels = cov.quotient().graph().arc_count();
  if (psi.size() != static_cast<Eigen::Index>(cov.cell_count()) * channels)
    throw InvalidInput("lattice state size does not match the covering");
  std::vector<Cx> data(psi.data(), psi.data() + psi.size());
  for (int axis = 0; axis < cov.dimension(); ++axis) dft_axis(data, cov.side(), cov.dimension(), channels, axis, +1.0);
  KSpaceState out(cov.cell_count());
  for (int i = 0; i < cov.cell_count(); ++i) out[i] = Eigen::Map<const ArcState>(data.data() + i * channels, channels);
  return out;
}

ArcState idft(const CoveringGraph& cov, const KSpaceState& psi_hat) {
  const int channels = cov.quotient().graph().arc_count();
  if (static_cast<int>(psi_hat.size()) != cov.cell_count()) throw InvalidInput("k-space state has wrong grid size");
  std::vector<Cx> data(static_cast<std::size_t>(cov.cell_count()) * channels);
  for (int i = 0; i < cov.cell_count(); ++i) {
    if (psi_hat[i].size() != channels) throw InvalidInput("k-space state has wrong component count");
    for (int c = 0; c < channels; ++c) data[static_cast<std::size_t>(i) * channels + c] = psi_hat[i][c];
  }
  for (int axis = 0; axis < cov.dimension(); ++axis) dft_axis(data, cov.side(), cov.dimension(), channels, axis, -1.0);
  ArcState out = Eigen::Map<ArcState>(data.data(), static_cast<Eigen::Index>(data.size()));
  return out / static_cast<double>(cov.cell_count());
}

KSpaceState fourier_evolve(const QuotientSpec& spec, int side, const KSpaceState& psi_hat, int n) {
  const KGrid grid{spec.dimension(), side, 0.0};
  if (static_cast<int>(psi_hat.size()) != grid.size()) throw InvalidInput("k-space state does not match the grid");
  KSpaceState out(psi_hat.size());
  parallel_for(grid.size(), [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      if (psi_hat[i].size() != spec.graph().arc_count()) throw InvalidInput("k-space state has wrong component count");
      const CMatrix u = quotient_walk_at_k(spec, grid.point(i)).u;
      ArcState v = psi_hat[i];
      for (int s = 0; s < n; ++s) v = u * v;
      out[i] = std::move(v);
    }
  });
  return out;
}

double fourier_equivalence_check(const CoveringGraph& cov, const ArcState& psi0, int n) {
  const ArcState via_k = idft(cov, fourier_evolve(cov.quotient(), cov.side(), dft(cov, psi0), n));
  LatticeWalker walker(cov);
  ArcState direct = psi0;
  walker.advance(direct, n);
  return max_abs(via_k - direct);
}

namespace {

int predecessor(const KGrid& grid, int index) {
  int stride = 1;
  int rest = index;
  for (int j = grid.dim - 1; j >= 0; --j) {
    if (rest % grid.side > 0) return index - stride;
    rest /= grid.side;
    stride *= grid.side;
  }
  return -1;
}

RVector generic_k(int d) {
  RVector k(d);
  for (int j = 0; j < d; ++j) k[j] = 0.3137 + 0.4219 * j + 0.1 * j * j;
  return k;
}

}  // namespace

BandStructure band_structure(std::shared_ptr<const QuotientSpec> spec, int resolution) {
  if (resolution < 8) throw InvalidInput("band structure needs at least 8 grid points per dimension");
  BandStructure bs;
  bs.spec = spec;
  bs.grid = KGrid{spec->dimension(), resolution, 0.0};
  const int nb = spec->graph().vertex_count();
  const int np = bs.grid.size();
  bs.cos_phi.resize(np, nb);
  bs.vectors.resize(np);
  parallel_for(np, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(discriminant_at_k(*spec, bs.grid.point(i)));
      bs.cos_phi.row(i) = es.eigenvalues().reverse().transpose();
      bs.vectors[i] = es.eigenvectors().rowwise().reverse();
    }
  });

  bs.matched.assign(np, std::vector<int>(nb));
  for (int b = 0; b < nb; ++b) bs.matched[0][b] = b;
  for (int i = 1; i < np; ++i) {
    const int p = predecessor(bs.grid, i);
    const RMatrix overlap = (bs.vectors[i].adjoint() * bs.vectors[p]).cwiseAbs();
    std::vector<bool> taken(nb, false);
    bool ok = true;
    for (int b = 0; b < nb; ++b) {
      Eigen::Index best;
      const double top = overlap.row(b).maxCoeff(&best);
      int ties = 0;
      for (int c = 0; c < nb; ++c)
        if (top - overlap(b, c) < 1e-6) ++ties;
      if (ties > 1 || taken[best]) ok = false;
      taken[best] = true;
      bs.matched[i][b] = bs.matched[p][best];
    }
    if (!ok) {
      bs.crossing_ambiguity = true;
      for (int b = 0; b < nb; ++b) bs.matched[i][b] = b;
    }
  }

  const RVector kg = generic_k(spec->dimension());
  const auto spec_u = unitary_eigenvalues(quotient_walk_at_k(*spec, kg).u);
  const auto [m1, m_1] = unit_multiplicities(band_values(*spec, kg));
  int plus = 0, minus = 0;
  for (const Cx z : spec_u) {
    if (std::abs(z - 1.0) < 1e-8) ++plus;
    if (std::abs(z + 1.0) < 1e-8) ++minus;
  }
  bs.flat_plus = plus - m1;
  bs.flat_minus = minus - m_1;
  return bs;
}

std::vector<int> flat_bands(const BandStructure& bs) {
  std::vector<int> out;
  for (int b = 0; b < bs.band_count(); ++b) {
    const auto col = bs.cos_phi.col(b);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    if (var < 1e-10) out.push_back(b);
  }
  return out;
}

double band_phase(const QuotientSpec& spec, const RVector& k, int band) {
  const RVector lam = band_values(spec, k);
  if (band < 0 || band >= lam.size()) throw InvalidInput("band index out of range");
  return std::acos(std::clamp(lam[band], -1.0, 1.0));
}

RVector group_velocity_zd(const RVector& k) {
  const int d = static_cast<int>(k.size());
  const double c = k.array().cos().sum() / d;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return k.array().sin() / (d * s);
}

namespace {

template <typename F>
RVector five_point_gradient(F&& f, const RVector& k, double h) {
  RVector g(k.size());
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    RVector a = k, b = k, c = k, e = k;
    a[j] += 2 * h;
    b[j] += h;
    c[j] -= h;
    e[j] -= 2 * h;
    g[j] = (-f(a) + 8 * f(b) - 8 * f(c) + f(e)) / (12 * h);
  }
  return g;
}

template <typename F>
RMatrix fd_hessian(F&& f, const RVector& k, double h) {
  const Eigen::Index d = k.size();
  RMatrix hm(d, d);
  const double f0 = f(k);
  for (Eigen::Index i = 0; i < d; ++i) {
    RVector a = k, b = k, c = k, e = k;
    a[i] += 2 * h;
    b[i] += h;
    c[i] -= h;
    e[i] -= 2 * h;
    hm(i, i) = (-f(a) + 16 * f(b) - 30 * f0 + 16 * f(c) - f(e)) / (12 * h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      RVector pp = k, pm = k, mp = k, mm = k;
      pp[i] += h, pp[j] += h;
      pm[i] += h, pm[j] -= h;
      mp[i] -= h, mp[j] += h;
      mm[i] -= h, mm[j] -= h;
      hm(i, j) = hm(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
    }
  }
  return hm;
}

double band_gap(const QuotientSpec& spec, const RVector& k, int band) {
  const RVector lam = band_values(spec, k);
  double gap = std::numeric_limits<double>::infinity();
  if (band > 0) gap = std::min(gap, lam[band - 1] - lam[band]);
  if (band + 1 < lam.size()) gap = std::min(gap, lam[band] - lam[band + 1]);
  return gap;
}

}  // namespace

RVector group_velocity_fd(const QuotientSpec& spec, const RVector& k, int band, double h) {
  return five_point_gradient([&](const RVector& q) { return band_phase(spec, q, band); }, k, h);
}

RVector group_velocity(const QuotientSpec& spec, const RVector& k, int band) {
  if (k.size() != spec.dimension()) throw InvalidInput("k has wrong dimension");
  const double lam = band_values(spec, k)[band];
  if (std::sqrt(std::max(0.0, 1.0 - lam * lam)) < 1e-6)
    throw InvalidInput("group velocity undefined: sin(phi) = 0 at this k (band edge)");
  if (spec.is_square_lattice()) return group_velocity_zd(k);
  if (band_gap(spec, k, band) < 1e-3) throw InvalidInput("group velocity undefined: k lies on a band crossing");
  return group_velocity_fd(spec, k, band);
}

RMatrix hessian(const QuotientSpec& spec, const RVector& k, int band, double h) {
  const Eigen::Index d = k.size();
  if (!spec.is_square_lattice())
    return fd_hessian([&](const RVector& q) { return band_phase(spec, q, band); }, k, h);
  RMatrix hm(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    RVector a = k, b = k, c = k, e = k;
    a[j] += 2 * h;
    b[j] += h;
    c[j] -= h;
    e[j] -= 2 * h;
    hm.col(j) =
        (-group_velocity_zd(a) + 8 * group_velocity_zd(b) - 8 * group_velocity_zd(c) + group_velocity_zd(e)) /
        (12 * h);
  }
  return 0.5 * (hm + hm.transpose());
}

CMatrix unit_eigenprojector(const CMatrix& u, double sign, double tol) {
  const CMatrix m = u - sign * CMatrix::Identity(u.rows(), u.cols());
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  CMatrix p = CMatrix::Zero(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (sv[j] < tol) p += svd.matrixV().col(j) * svd.matrixV().col(j).adjoint();
  return p;
}

FlatBandPrediction flat_band_prediction(const QuotientSpec& spec, ArcId e, const std::vector<std::vector<int>>& cells,
                                        int resolution) {
  const int d = spec.dimension();
  const int channels = spec.graph().arc_count();
  if (e < 0 || e >= channels) throw InvalidInput("flat_band_prediction: arc out of range");
  for (const auto& x : cells)
    if (static_cast<int>(x.size()) != d) throw InvalidInput("flat_band_prediction: cell has wrong dimension");
  const KGrid grid{d, resolution, 0.5};
  const int count = static_cast<int>(cells.size());
  std::vector<CMatrix> plus(thread_count(), CMatrix::Zero(channels, count));
  std::vector<CMatrix> minus = plus;
  const int chunks = std::min(thread_count(), grid.size());
  parallel_for(chunks, [&](int begin, int end) {
    for (int w = begin; w < end; ++w) {
      const int i0 = static_cast<int>(static_cast<long long>(grid.size()) * w / chunks);
      const int i1 = static_cast<int>(static_cast<long long>(grid.size()) * (w + 1) / chunks);
      for (int i = i0; i < i1; ++i) {
        const RVector k = grid.point(i);
        const CMatrix u = quotient_walk_at_k(spec, k).u;
        const ArcState pe = unit_eigenprojector(u, 1.0).col(e);
        const ArcState me = unit_eigenprojector(u, -1.0).col(e);
        for (int c = 0; c < count; ++c) {
          double kx = 0.0;
          for (int j = 0; j < d; ++j) kx += k[j] * cells[c][j];
          const Cx phase = std::exp(Cx(0.0, -kx));
          plus[w].col(c) += phase * pe;
          minus[w].col(c) += phase * me;
        }
      }
    }
  });
  CMatrix ap = CMatrix::Zero(channels, count), am = ap;
  for (int w = 0; w < chunks; ++w) {
    ap += plus[w];
    am += minus[w];
  }
  ap /= static_cast<double>(grid.size());
  am /= static_cast<double>(grid.size());
  FlatBandPrediction out;
  for (int c = 0; c < count; ++c) {
    out.time_average.push_back(ap.col(c).squaredNorm() + am.col(c).squaredNorm());
    out.combined.push_back((ap.col(c) + am.col(c)).squaredNorm());
  }
  return out;
}

double k_distance(const RVector& a, const RVector& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double r = distance_mod_2pi(a[j] - b[j]);
    s += r * r;
  }
  return std::sqrt(s);
}

namespace {

RVector wrap_k(RVector k) {
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    k[j] = wrap_angle(k[j]);
    if (kTwoPi - k[j] < 1e-12) k[j] = 0.0;
  }
  return k;
}

std::vector<RVector> limit_directions(int d) {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> n01;
  std::vector<RVector> dirs;
  for (int i = 0; i < 32; ++i) {
    RVector v(d);
    for (int j = 0; j < d; ++j) v[j] = n01(rng);
    dirs.push_back(v.normalized());
  }
  return dirs;
}

// True when every directional limit of |grad phi| at k stays above 1e-3.
bool limit_avoids_zero(const QuotientSpec& spec, const RVector& k, int band) {
  const double eps = 1e-3;
  for (const RVector& dir : limit_directions(spec.dimension())) {
    const RVector q = k + eps * dir;
    const RVector v = spec.is_square_lattice() ? group_velocity_zd(q) : group_velocity_fd(spec, q, band, 1e-5);
    if (v.norm() <= 1e-3) return false;
  }
  return true;
}

// Local minima of a periodic grid function (ties allowed).
std::vector<int> grid_minima(const KGrid& grid, const std::vector<double>& f) {
  std::vector<int> out;
  const int d = grid.dim, n = grid.side;
  int neighbours = 1;
  for (int j = 0; j < d; ++j) neighbours *= 3;
  for (int i = 0; i < grid.size(); ++i) {
    std::vector<int> c(d);
    int rest = i;
    for (int j = d - 1; j >= 0; --j) c[j] = rest % n, rest /= n;
    bool is_min = true;
    for (int m = 0; m < neighbours && is_min; ++m) {
      int code = m, idx = 0;
      for (int j = 0; j < d; ++j) {
        const int off = code % 3 - 1;
        code /= 3;
        idx = idx * n + ((c[j] + off) % n + n) % n;
      }
      if (f[idx] < f[i]) is_min = false;
    }
    if (is_min) out.push_back(i);
  }
  return out;
}

template <typename F>
std::optional<RVector> newton_stationary(F&& f, RVector k, double grad_tol) {
  for (int it = 0; it < 50; ++it) {
    const RVector g = five_point_gradient(f, k, 1e-4);
    if (g.norm() < grad_tol) return k;
    const RMatrix h = fd_hessian(f, k, 1e-4);
    const RVector stepv = h.fullPivLu().solve(g);
    if (!stepv.allFinite()) return std::nullopt;
    k -= stepv;
    if (stepv.norm() < 1e-13) break;
  }
  if (five_point_gradient(f, k, 1e-4).norm() < grad_tol) return k;
  return std::nullopt;
}

bool contains(const std::vector<CriticalPoint>& set, const RVector& k, int band) {
  for (const auto& p : set)
    if (p.band == band && k_distance(p.k, k) < 1e-6) return true;
  return false;
}

}  // namespace

CriticalPointSearch critical_points(const BandStructure& bs) {
  const QuotientSpec& spec = *bs.spec;
  const KGrid& grid = bs.grid;
  const int nb = bs.band_count();
  const auto flat = flat_bands(bs);
  CriticalPointSearch out;

  auto describe = [&](const RVector& k, int band, bool converged) {
    CriticalPoint p;
    p.k = wrap_k(k);
    p.band = band;
    p.converged = converged;
    const double lam = band_values(spec, p.k)[band];
    const double s = std::sqrt(std::max(0.0, 1.0 - lam * lam));
    if (s > 1e-6) {
      const auto lam_f = [&](const RVector& q) { return band_values(spec, q)[band]; };
      p.gradient_norm = five_point_gradient(lam_f, p.k, 1e-4).norm() / s;
      p.det_hessian = hessian(spec, p.k, band).determinant();
      p.degenerate = std::abs(p.det_hessian) < 1e-8;
    }
    return p;
  };

  for (int b = 0; b < nb; ++b) {
    if (std::find(flat.begin(), flat.end(), b) != flat.end()) continue;
    const auto lam_f = [&](const RVector& q) { return band_values(spec, q)[b]; };

    // Crossings with the neighbouring bands: minima of the squared gap.
    std::vector<RVector> crossings;
    for (const int other : {b - 1, b + 1}) {
      if (other < 0 || other >= nb) continue;
      std::vector<double> gap2(grid.size());
      for (int i = 0; i < grid.size(); ++i) gap2[i] = std::pow(bs.cos_phi(i, b) - bs.cos_phi(i, other), 2);
      for (int seed : grid_minima(grid, gap2)) {
        if (gap2[seed] > 1e-2) continue;
        const auto g2 = [&](const RVector& q) {
          const RVector l = band_values(spec, q);
          return std::pow(l[b] - l[other], 2);
        };
        const auto k = newton_stationary(g2, grid.point(seed), 1e-14);
        if (k && g2(*k) < 1e-12) {
          bool dup = false;
          for (const auto& c : crossings) dup = dup || k_distance(c, *k) < 1e-6;
          if (!dup) crossings.push_back(wrap_k(*k));
        }
      }
    }
    for (const RVector& kc : crossings) {
      CriticalPoint p = describe(kc, b, true);
      if (limit_avoids_zero(spec, kc, b)) {
        if (!contains(out.excluded, kc, b)) out.excluded.push_back(p);
      } else if (!contains(out.points, kc, b)) {
        out.points.push_back(p);
      }
    }

    // Smooth critical points: stationary points of lambda = cos(phi).
    std::vector<double> grad2(grid.size());
    const int d = grid.dim, n = grid.side;
    const double dk = kTwoPi / n;
    for (int i = 0; i < grid.size(); ++i) {
      double s = 0.0;
      int stride = 1;
      for (int j = d - 1; j >= 0; --j) {
        const int cj = (i / stride) % n;
        const int up = i + (((cj + 1) % n) - cj) * stride;
        const int dn = i + (((cj - 1 + n) % n) - cj) * stride;
        const double g = (bs.cos_phi(up, b) - bs.cos_phi(dn, b)) / (2 * dk);
        s += g * g;
        stride *= n;
      }
      grad2[i] = s;
    }
    for (int seed : grid_minima(grid, grad2)) {
      const RVector k0 = grid.point(seed);
      bool near_crossing = false;
      for (const auto& kc : crossings) near_crossing = near_crossing || k_distance(kc, k0) < 2.0 * dk * std::sqrt(d);
      if (near_crossing) continue;
      const auto k = newton_stationary(lam_f, k0, 1e-11);
      if (!k) {
        CriticalPoint p = describe(k0, b, false);
        if (!contains(out.unrefined, p.k, b)) out.unrefined.push_back(p);
        continue;
      }
      const RVector kw = wrap_k(*k);
      bool on_crossing = false;
      for (const auto& kc : crossings) on_crossing = on_crossing || k_distance(kc, kw) < 1e-6;
      if (on_crossing || contains(out.points, kw, b) || contains(out.excluded, kw, b)) continue;
      const double lam = lam_f(kw);
      CriticalPoint p = describe(kw, b, true);
      if (std::abs(lam) > 1.0 - kUnitEigenTol && limit_avoids_zero(spec, kw, b)) {
        out.excluded.push_back(p);
      } else {
        out.points.push_back(p);
      }
    }
  }
  return out;
}

}  // namespace qwalk
