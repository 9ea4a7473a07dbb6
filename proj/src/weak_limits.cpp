#include "qwalk/weak_limits.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <queue>

#include "qwalk/parallel.hpp"

namespace qwalk {

double rho2_expression(double x, double y) {
  const double den = (x + y - 1.0) * (x + y + 1.0) * (x - y + 1.0) * (x - y - 1.0);
  if (std::abs(den) < 1e-300) return kSingular;
  return 1.0 / (kPi * kPi * den);
}

double rho2(double x, double y) {
  if (x * x + y * y > 0.5) return 0.0;
  return rho2_expression(x, y);
}

double velocity_law_density2(double x, double y) { return 2.0 * rho2(x, y); }

namespace {

// 15-point Gauss-Kronrod with adaptive bisection.
constexpr std::array<double, 8> kXgk = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                        0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                        0.207784955007898468, 0.000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                        0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                        0.204432940075298892, 0.209482141084727828};
constexpr std::array<double, 4> kWg = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                       0.417959183673469388};

double gk15(const std::function<double(double)>& f, double a, double b, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  err = std::abs((kron - gauss) * h);
  return kron * h;
}

// Global adaptive scheme: bisect the interval with the largest error estimate.
double integrate(const std::function<double(double)>& f, double a, double b, double tol, int max_intervals = 4000) {
  struct Piece {
    double a, b, value, err;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  std::priority_queue<Piece> heap;
  double err;
  double v = gk15(f, a, b, err);
  heap.push({a, b, v, err});
  double total = v, total_err = err;
  while (total_err > tol && static_cast<int>(heap.size()) < max_intervals) {
    const Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    double e1, e2;
    const double v1 = gk15(f, p.a, m, e1), v2 = gk15(f, m, p.b, e2);
    total += v1 + v2 - p.value;
    total_err += e1 + e2 - p.err;
    heap.push({p.a, m, v1, e1});
    heap.push({m, p.b, v2, e2});
  }
  return total;
}

// int_0^{sqrt(u)} rho2(r cos g, r sin g) r dr. With a = (cos g + sin g)^2 and
// b = (cos g - sin g)^2 the integrand is 1 / (2 pi^2 (a u - 1)(b u - 1)) in u = r^2.
double radial_primitive(double g, double u) {
  const double p = std::cos(g) + std::sin(g), m = std::cos(g) - std::sin(g);
  const double a = p * p, b = m * m;
  const double s = std::sin(2 * g);
  const double one_minus_au = (1.0 - 2.0 * u) + b * u;
  const double one_minus_bu = 1.0 - b * u;
  if (std::abs(s) < 1e-9) return u / (1.0 - u) / (2.0 * kPi * kPi);
  return std::log(one_minus_au / one_minus_bu) / (b - a) / (2.0 * kPi * kPi);
}

}  // namespace

namespace {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace

double rho2_bin_average(double x0, double x1, double y0, double y1, int order) {
  if (order < 1) throw InvalidInput("quadrature order must be positive");
  const auto [nodes, weights] = gauss_legendre(order);
  const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
  double s = 0.0;
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) s += weights[i] * weights[j] * rho2(cx + hx * nodes[i], cy + hy * nodes[j]);
  return s / 4.0;
}

Rho2Normalization rho2_normalization(double delta) {
  const double r_max = std::sqrt(0.5);
  const double r_in = r_max - delta;
  Rho2Normalization n;
  // rho2 is invariant under x <-> y and sign flips, so one octant suffices.
  n.interior = 8.0 * integrate(
                         [&](double g) {
                           const double c = std::cos(g), s = std::sin(g);
                           return integrate([&](double r) { return rho2(r * c, r * s) * r; }, 0.0, r_in, 1e-13);
                         },
                         0.0, kPi / 4, 1e-11);
  n.boundary_layer = 8.0 * integrate(
                               [&](double g) {
                                 return radial_primitive(g, 0.5) - radial_primitive(g, r_in * r_in);
                               },
                               0.0, kPi / 4, 1e-11);
  return n;
}

std::pair<double, double> rho2_preimage_cosines(double x, double y) {
  const double root = std::sqrt((x + y - 1) * (x + y + 1) * (x - y - 1) * (x - y + 1));
  return {(1 - 3 * x * x - y * y) / root, -(1 - 3 * y * y - x * x) / root};
}

RVector zd_velocity(const RVector& k) {
  const double d = static_cast<double>(k.size());
  const double c = k.array().cos().sum() / d;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return k.array().sin() / (d * s);
}

double DensityEvaluator::bin_volume() const { return std::pow(bin_width(), dim); }

RVector DensityEvaluator::bin_center(int index) const {
  RVector c(dim);
  for (int j = dim - 1; j >= 0; --j) {
    c[j] = -half_width + (index % bins + 0.5) * bin_width();
    index /= bins;
  }
  return c;
}

double DensityEvaluator::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

namespace {

struct Pt {
  double x, y;
};

double polygon_area(const std::vector<Pt>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Pt& u = p[i];
    const Pt& v = p[(i + 1) % p.size()];
    a += u.x * v.y - v.x * u.y;
  }
  return 0.5 * std::abs(a);
}

// Clip against the half-plane sign * (coord - bound) <= 0 on axis 0 (x) or 1 (y).
void clip(std::vector<Pt>& poly, int axis, double bound, double sign) {
  std::vector<Pt> out;
  out.reserve(poly.size() + 2);
  auto val = [&](const Pt& p) { return sign * ((axis == 0 ? p.x : p.y) - bound); };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[(i + 1) % poly.size()];
    const double va = val(a), vb = val(b);
    if (va <= 0) out.push_back(a);
    if ((va < 0 && vb > 0) || (va > 0 && vb < 0)) {
      const double t = va / (va - vb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  poly.swap(out);
}

int bin_of(double v, const DensityEvaluator& ev) {
  const int i = static_cast<int>(std::floor((v + ev.half_width) / ev.bin_width()));
  return std::clamp(i, 0, ev.bins - 1);
}

void deposit_triangle(DensityEvaluator& ev, std::vector<double>& mass, const std::array<Pt, 3>& t, double m) {
  const double area = 0.5 * std::abs((t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y));
  const int nb = ev.bins;
  auto add = [&](int i, int j, double w) {
    mass[static_cast<std::size_t>(i) * nb + j] += w;
    mass[static_cast<std::size_t>(nb - 1 - i) * nb + (nb - 1 - j)] += w;  // image of -grad phi
  };
  const double bw = ev.bin_width();
  const int i0 = bin_of(std::min({t[0].x, t[1].x, t[2].x}), ev), i1 = bin_of(std::max({t[0].x, t[1].x, t[2].x}), ev);
  const int j0 = bin_of(std::min({t[0].y, t[1].y, t[2].y}), ev), j1 = bin_of(std::max({t[0].y, t[1].y, t[2].y}), ev);
  if (area < 1e-300 || (i0 == i1 && j0 == j1)) {
    add(bin_of((t[0].x + t[1].x + t[2].x) / 3, ev), bin_of((t[0].y + t[1].y + t[2].y) / 3, ev), m);
    return;
  }
  double placed = 0.0;
  std::vector<std::pair<int, double>> parts;
  for (int i = i0; i <= i1; ++i) {
    const double xl = -ev.half_width + i * bw, xr = xl + bw;
    std::vector<Pt> strip(t.begin(), t.end());
    clip(strip, 0, xl, -1.0);
    clip(strip, 0, xr, +1.0);
    if (strip.size() < 3) continue;
    for (int j = j0; j <= j1; ++j) {
      const double yl = -ev.half_width + j * bw, yr = yl + bw;
      std::vector<Pt> cell = strip;
      clip(cell, 1, yl, -1.0);
      clip(cell, 1, yr, +1.0);
      if (cell.size() < 3) continue;
      const double a = polygon_area(cell);
      if (a <= 0) continue;
      parts.emplace_back(i * nb + j, a);
      placed += a;
    }
  }
  // Normalize by the clipped total so that round-off never loses mass.
  if (placed <= 0) {
    add(bin_of((t[0].x + t[1].x + t[2].x) / 3, ev), bin_of((t[0].y + t[1].y + t[2].y) / 3, ev), m);
    return;
  }
  for (const auto& [idx, a] : parts) add(idx / nb, idx % nb, m * a / placed);
}

}  // namespace

DensityEvaluator rho_d_pushforward(int d, int resolution, int bins) {
  if (d < 1) throw InvalidInput("dimension must be >= 1");
  if (resolution < 8) throw InvalidInput("k-grid resolution too small");
  if (bins < 1) throw InvalidInput("bin count must be positive");
  DensityEvaluator ev;
  ev.dim = d;
  ev.resolution = resolution;
  ev.bins = bins;
  ev.half_width = 1.0 / std::sqrt(static_cast<double>(d));
  std::size_t nbins = 1;
  for (int j = 0; j < d; ++j) nbins *= bins;
  ev.mass.assign(nbins, 0.0);
  const double h = kTwoPi / resolution;

  if (d == 2) {
    const int n = resolution;
    std::vector<Pt> vel(static_cast<std::size_t>(n) * n);
    std::vector<bool> bad(vel.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        RVector k(2);
        k << a * h, b * h;
        const double c = 0.5 * (std::cos(k[0]) + std::cos(k[1]));
        const std::size_t idx = static_cast<std::size_t>(a) * n + b;
        bad[idx] = std::sqrt(std::max(0.0, 1.0 - c * c)) < 1e-6;
        if (!bad[idx]) {
          const RVector v = zd_velocity(k);
          vel[idx] = {v[0], v[1]};
          ev.max_speed = std::max(ev.max_speed, v.norm());
        }
      }
    const double m = 1.0 / (2.0 * n * n) / d * 0.5;
    const int workers = std::max(1, std::min(thread_count(), n));
    std::vector<std::vector<double>> partial(workers, std::vector<double>(nbins, 0.0));
    std::vector<long long> skipped(workers, 0);
    parallel_for(workers, [&](int begin, int end) {
      for (int w = begin; w < end; ++w) {
        const int a0 = static_cast<int>(static_cast<long long>(n) * w / workers);
        const int a1 = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
        for (int a = a0; a < a1; ++a)
          for (int b = 0; b < n; ++b) {
            const std::size_t p00 = static_cast<std::size_t>(a) * n + b;
            const std::size_t p10 = static_cast<std::size_t>((a + 1) % n) * n + b;
            const std::size_t p01 = static_cast<std::size_t>(a) * n + (b + 1) % n;
            const std::size_t p11 = static_cast<std::size_t>((a + 1) % n) * n + (b + 1) % n;
            for (const auto& tri : {std::array<std::size_t, 3>{p00, p10, p11}, std::array<std::size_t, 3>{p00, p11, p01}}) {
              if (bad[tri[0]] || bad[tri[1]] || bad[tri[2]]) {
                ++skipped[w];
                continue;
              }
              deposit_triangle(ev, partial[w], {vel[tri[0]], vel[tri[1]], vel[tri[2]]}, m);
            }
          }
      }
    });
    long long skip = 0;
    for (int w = 0; w < workers; ++w) {
      skip += skipped[w];
      for (std::size_t i = 0; i < nbins; ++i) ev.mass[i] += partial[w][i];
    }
    ev.skip_fraction = static_cast<double>(skip) / (2.0 * n * n);
  } else {
    long long total = 1;
    for (int j = 0; j < d; ++j) total *= resolution;
    const double m = 1.0 / static_cast<double>(total) / d * 0.5;
    long long skip = 0;
    RVector k(d);
    for (long long i = 0; i < total; ++i) {
      long long rest = i;
      for (int j = d - 1; j >= 0; --j) {
        k[j] = (rest % resolution + 0.5) * h;
        rest /= resolution;
      }
      const double c = k.array().cos().sum() / d;
      if (std::sqrt(std::max(0.0, 1.0 - c * c)) < 1e-6) {
        ++skip;
        continue;
      }
      const RVector v = zd_velocity(k);
      ev.max_speed = std::max(ev.max_speed, v.norm());
      std::size_t plus = 0, minus = 0;
      for (int j = 0; j < d; ++j) {
        plus = plus * bins + bin_of(v[j], ev);
        minus = minus * bins + bin_of(-v[j], ev);
      }
      ev.mass[plus] += m;
      ev.mass[minus] += m;
    }
    ev.skip_fraction = static_cast<double>(skip) / static_cast<double>(total);
  }
  ev.resolution_warning = ev.skip_fraction > 0.01;
  return ev;
}

double det_hessian_formula(const RVector& k) {
  const int d = static_cast<int>(k.size());
  const double c = k.array().cos().sum() / d;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  if (s < 1e-8) throw InvalidInput("det Hess undefined at a band edge (sin(phi) = 0)");
  const RVector x = k.array().sin() / (d * s);
  const RVector a = k.array().cos() / (d * s);
  const bool small_cos = (k.array().cos().abs() < 1e-6).any();
  if (!small_cos) {
    double sum = 0.0;
    for (int j = 0; j < d; ++j) sum += x[j] * x[j] / std::cos(k[j]);
    return a.prod() * (1.0 - d * c * sum);
  }
  // det(diag(a) - (c/s) x x^T) expanded so that a vanishing cos(k_j) needs no division.
  double prod = a.prod();
  double corr = 0.0;
  for (int j = 0; j < d; ++j) {
    double others = 1.0;
    for (int i = 0; i < d; ++i)
      if (i != j) others *= a[i];
    corr += x[j] * x[j] * others;
  }
  return prod - (c / s) * corr;
}

SingularReport singular_scan(int d, int boundary_samples, const std::vector<int>& resolutions) {
  if (d < 2) throw InvalidInput("singular scan needs d >= 2");
  SingularReport rep;
  rep.dim = d;
  for (int m = 0; m < (1 << d); ++m) {
    RVector v(d);
    for (int j = 0; j < d; ++j) v[j] = ((m >> j) & 1) ? -1.0 / d : 1.0 / d;
    rep.vertices.push_back(v);
  }
  const double radius = 1.0 / std::sqrt(static_cast<double>(d));
  if (d == 2) {
    for (int i = 0; i < boundary_samples; ++i) {
      const double g = kTwoPi * (i + 0.37) / boundary_samples;
      BoundarySample b;
      b.x = RVector(2);
      b.x << std::cos(g) * radius, std::sin(g) * radius;
      const double c2 = std::cos(2 * g);
      b.value = rho2_expression(b.x[0], b.x[1]);
      if (std::abs(c2) < 1e-3) {
        b.cls = BoundaryClass::Vertex;
        b.predicted = kSingular;
      } else {
        b.cls = BoundaryClass::Finite;
        b.predicted = 4.0 / (kPi * kPi * c2 * c2);
        rep.max_relative_error = std::max(rep.max_relative_error, std::abs(b.value - b.predicted) / b.predicted);
      }
      rep.samples.push_back(b);
    }
    return rep;
  }
  const int bins = 24;
  for (int res : resolutions) {
    const DensityEvaluator ev = rho_d_pushforward(d, res, bins);
    const double half_diag = 0.5 * ev.bin_width() * std::sqrt(static_cast<double>(d));
    std::vector<double> interior;
    double shell_sum = 0.0, vertex_sum = 0.0;
    int shell_n = 0, vertex_n = 0;
    for (std::size_t i = 0; i < ev.mass.size(); ++i) {
      const RVector c = ev.bin_center(static_cast<int>(i));
      const double r = c.norm();
      const double dens = ev.density(static_cast<int>(i));
      if (r + half_diag < 0.5 * radius) interior.push_back(dens);
      if (std::abs(r - radius) > half_diag) continue;
      double dv = kSingular;
      for (const auto& v : rep.vertices) dv = std::min(dv, (c - v).norm());
      if (dv <= 2 * half_diag) {
        vertex_sum += dens;
        ++vertex_n;
      } else if (dv > 0.25 * radius) {
        shell_sum += dens;
        ++shell_n;
      }
    }
    std::nth_element(interior.begin(), interior.begin() + interior.size() / 2, interior.end());
    const double median = interior.empty() ? 0.0 : interior[interior.size() / 2];
    rep.resolutions.push_back(res);
    rep.shell_ratio.push_back(shell_n && median > 0 ? shell_sum / shell_n / median : 0.0);
    rep.vertex_ratio.push_back(vertex_n && median > 0 ? vertex_sum / vertex_n / median : 0.0);
  }
  for (const auto& v : rep.vertices) rep.samples.push_back({v, BoundaryClass::Vertex, kSingular, kSingular});
  return rep;
}

namespace {

// Applies f to every non-singular midpoint of the grid and averages.
template <typename F>
double grid_mean(int d, int resolution, F&& f, double* max_out = nullptr) {
  long long total = 1;
  for (int j = 0; j < d; ++j) total *= resolution;
  const double h = kTwoPi / resolution;
  double sum = 0.0, mx = 0.0;
  long long used = 0;
  RVector k(d);
  for (long long i = 0; i < total; ++i) {
    long long rest = i;
    for (int j = d - 1; j >= 0; --j) {
      k[j] = (rest % resolution + 0.5) * h;
      rest /= resolution;
    }
    const double c = k.array().cos().sum() / d;
    if (std::sqrt(std::max(0.0, 1.0 - c * c)) < 1e-6) continue;
    const RVector v = zd_velocity(k);
    sum += f(v);
    mx = std::max(mx, v.norm());
    ++used;
  }
  if (max_out) *max_out = mx;
  return used ? sum / used : 0.0;
}

}  // namespace

double limit_characteristic_function(const RVector& xi, int resolution) {
  const int d = static_cast<int>(xi.size());
  if (d < 1) throw InvalidInput("xi must have positive dimension");
  const double mean = grid_mean(d, resolution, [&](const RVector& v) { return std::cos(xi.dot(v)); });
  return (1.0 - 1.0 / d) + mean / d;
}

double max_velocity_norm(int d, int resolution) {
  double mx = 0.0;
  grid_mean(d, resolution, [](const RVector&) { return 0.0; }, &mx);
  return mx;
}

double mean_velocity_square(int d, int resolution) {
  return grid_mean(d, resolution, [](const RVector& v) { return v.squaredNorm(); });
}

}  // namespace qwalk
