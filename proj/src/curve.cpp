#include "vpmcf/curve.hpp"

#include <algorithm>
#include <numeric>

#include "vpmcf/defaults.hpp"

namespace vpmcf {
namespace {

double wrap_half(double d, double side) { return std::remainder(d, side); }

double shoelace(const std::vector<Vec2>& p) {
  double a = 0.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(p[i], p[(i + 1) % n]);
  return 0.5 * a;
}

/// Cyclic tridiagonal solve (Sherman-Morrison around the Thomas algorithm).
/// a: sub-diagonal (a[0] couples row 0 to column n-1), b: diagonal,
/// c: super-diagonal (c[n-1] couples row n-1 to column 0).
std::vector<double> cyclic_tridiag(std::vector<double> a, std::vector<double> b,
                                   std::vector<double> c, std::vector<double> r) {
  const std::size_t n = b.size();
  const double alpha = a[0], beta = c[n - 1];
  const double gamma = -b[0];
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;

  auto thomas = [&](std::vector<double> rhs) {
    std::vector<double> cp(n), dp(n);
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - a[i] * cp[i - 1];
      cp[i] = c[i] / m;
      dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) dp[i] -= cp[i] * dp[i + 1];
    return dp;
  };

  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = beta;
  std::vector<double> x = thomas(r);
  std::vector<double> z = thomas(u);
  const double fact = (x[0] + alpha * x[n - 1] / gamma) / (1.0 + z[0] + alpha * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

/// Periodic natural cubic spline through (t_i, v_i), period T.
class CyclicSpline {
 public:
  CyclicSpline(std::vector<double> t, std::vector<double> v, double period)
      : t_(std::move(t)), v_(std::move(v)), period_(period) {
    const std::size_t n = v_.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = (i + 1 < n ? t_[i + 1] : period_) - t_[i];
    std::vector<double> a(n), b(n), c(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n;
      a[i] = h[im] / 6.0;
      b[i] = (h[im] + h[i]) / 3.0;
      c[i] = h[i] / 6.0;
      const double dv1 = (v_[(i + 1) % n] - v_[i]) / h[i];
      const double dv0 = (v_[i] - v_[im]) / h[im];
      r[i] = dv1 - dv0;
    }
    m_ = cyclic_tridiag(std::move(a), std::move(b), std::move(c), std::move(r));
    h_ = std::move(h);
  }

  double eval(double t) const {
    const std::size_t n = v_.size();
    t = t - period_ * std::floor(t / period_);
    std::size_t i = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin();
    i = (i == 0) ? n - 1 : i - 1;
    const std::size_t ip = (i + 1) % n;
    const double h = h_[i];
    const double A = ((i + 1 < n ? t_[i + 1] : period_) - t) / h;
    const double B = 1.0 - A;
    return A * v_[i] + B * v_[ip] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[ip]) * h * h / 6.0;
  }

 private:
  std::vector<double> t_, v_, m_, h_;
  double period_;
};

struct MovedPolygon {
  std::vector<Vec2> base;  // q_i, fixed part
  std::vector<Vec2> dir;   // b_i, subtracted lambda times
};

/// Area of {q_i - lambda b_i} as a quadratic alpha l^2 + beta l + gamma.
void area_quadratic(const MovedPolygon& m, double& alpha, double& beta, double& gamma) {
  const std::size_t n = m.base.size();
  alpha = beta = gamma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    gamma += cross(m.base[i], m.base[j]);
    beta -= cross(m.base[i], m.dir[j]) + cross(m.dir[i], m.base[j]);
    alpha += cross(m.dir[i], m.dir[j]);
  }
  alpha *= 0.5;
  beta *= 0.5;
  gamma *= 0.5;
}

/// Root of alpha x^2 + beta x + (gamma - target) closest to guess.
double quadratic_root_near(double alpha, double beta, double gamma, double target, double guess) {
  const double c = gamma - target;
  if (std::abs(alpha) < 1e-300) return -c / beta;
  const double disc = beta * beta - 4.0 * alpha * c;
  if (disc < 0.0) throw std::runtime_error("area projection: no real multiplier");
  const double sq = std::sqrt(disc);
  const double r1 = (-beta + sq) / (2.0 * alpha);
  const double r2 = (-beta - sq) / (2.0 * alpha);
  return std::abs(r1 - guess) <= std::abs(r2 - guess) ? r1 : r2;
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
         o4 != 0;
}

}  // namespace

double CurveGeometry::max_kappa() const { return *std::max_element(kappa.begin(), kappa.end()); }
double CurveGeometry::min_kappa() const { return *std::min_element(kappa.begin(), kappa.end()); }

Curve::Curve(std::vector<Vec2> pts) : pts_(std::move(pts)) { validate(); }

void Curve::validate() const {
  const int n = static_cast<int>(pts_.size());
  if (n < defaults::kMinCurveNodes)
    throw std::invalid_argument("Curve: need at least 16 nodes, got " + std::to_string(n));
  for (const Vec2& p : pts_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("Curve: non-finite node");
  for (int i = 0; i < n; ++i) {
    if (norm(pts_[(i + 1) % n] - pts_[i]) <= 0.0)
      throw std::invalid_argument("Curve: degenerate edge at node " + std::to_string(i));
  }
  if (shoelace(pts_) <= 0.0)
    throw std::invalid_argument("Curve: orientation must be counterclockwise (signed area > 0)");
  if (polyline_self_intersects(pts_)) throw std::invalid_argument("Curve: self-intersecting");
}

bool polyline_self_intersects(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  struct Seg {
    double xmin, xmax;
    int i;
  };
  std::vector<Seg> segs(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 a = pts[i], b = pts[(i + 1) % n];
    segs[i] = {std::min(a.x, b.x), std::max(a.x, b.x), i};
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& s, const Seg& t) { return s.xmin < t.xmin; });
  for (int si = 0; si < n; ++si) {
    for (int sj = si + 1; sj < n && segs[sj].xmin <= segs[si].xmax; ++sj) {
      const int i = segs[si].i, j = segs[sj].i;
      if ((i + 1) % n == j || (j + 1) % n == i) continue;  // neighbors share a node
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

const CurveGeometry& Curve::geometry() const {
  if (geo_) return *geo_;
  const int n = size();
  CurveGeometry g;
  g.kappa.resize(n);
  g.normal.resize(n);
  g.ds.resize(n);
  g.area = shoelace(pts_);
  for (int i = 0; i < n; ++i) {
    const Vec2 pm = pts_[(i + n - 1) % n], p = pts_[i], pp = pts_[(i + 1) % n];
    const Vec2 e0 = p - pm, e1 = pp - p;
    const double l0 = norm(e0), l1 = norm(e1), lc = norm(pp - pm);
    g.ds[i] = 0.5 * (l0 + l1);
    g.length += l1;
    const double cr = cross(e0, e1);
    // Menger curvature 1/R of the circumscribed circle; collinear triples get 0.
    g.kappa[i] =
        (std::abs(cr) < defaults::kCollinearTol * l0 * l1) ? 0.0 : 2.0 * cr / (l0 * l1 * lc);
    const Vec2 t = pp - pm;
    const double lt = norm(t);
    g.normal[i] = {-t.y / lt, t.x / lt};  // left of travel = inside for ccw
  }
  geo_ = std::move(g);
  return *geo_;
}

double Curve::min_spacing() const {
  const int n = size();
  double m = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) m = std::min(m, norm(pts_[(i + 1) % n] - pts_[i]));
  return m;
}

double Curve::mean_spacing() const { return length() / size(); }

double Curve::lambda_classical() const {
  const CurveGeometry& g = geometry();
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += g.kappa[i] * g.ds[i];
  return s / g.length;
}

double Curve::dissipation(double lambda) const {
  const CurveGeometry& g = geometry();
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    const double v = g.kappa[i] - lambda;
    s += v * v * g.ds[i];
  }
  return s;
}

CurveStep Curve::stepped(double dt, TrackMode mode) const {
  const double bound = defaults::kCFrontTracking * min_spacing() * min_spacing();
  if (!(dt > 0.0) || dt > bound)
    throw std::invalid_argument("Curve::stepped: dt=" + std::to_string(dt) +
                                " violates dt <= 0.2*min_spacing^2 = " + std::to_string(bound));
  const CurveGeometry& g = geometry();
  const int n = size();

  MovedPolygon m;
  m.base.resize(n);
  m.dir.resize(n);
  for (int i = 0; i < n; ++i) {
    m.base[i] = pts_[i] + (dt * g.kappa[i]) * g.normal[i];
    m.dir[i] = dt * g.normal[i];
  }

  double lambda;
  if (mode == TrackMode::Analytic) {
    lambda = lambda_classical();
  } else {
    double alpha, beta, gamma;
    area_quadratic(m, alpha, beta, gamma);
    lambda = quadratic_root_near(alpha, beta, gamma, g.area, lambda_classical());
  }

  std::vector<Vec2> moved(n);
  for (int i = 0; i < n; ++i) moved[i] = m.base[i] - lambda * m.dir[i];
  for (const Vec2& p : moved)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::runtime_error("Curve::stepped: non-finite node after update");
  if (polyline_self_intersects(moved))
    throw TopologyError("Curve::stepped: self-intersection (topology change)");

  Curve out = Curve(std::move(moved)).resampled(n);
  if (mode == TrackMode::Projected) out = enforce_area(out, g.area);
  return {std::move(out), lambda};
}

Curve Curve::resampled(int n) const {
  if (n < defaults::kMinCurveNodes) throw std::invalid_argument("Curve::resampled: n < 16");
  const int m = size();
  std::vector<double> t(m), vx(m), vy(m);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    t[i] = acc;
    vx[i] = pts_[i].x;
    vy[i] = pts_[i].y;
    acc += norm(pts_[(i + 1) % m] - pts_[i]);
  }
  const double period = acc;
  CyclicSpline sx(t, vx, period), sy(std::move(t), vy, period);

  // Arclength table on a fine subdivision of the spline.
  const int fine = m * 8;
  std::vector<double> ft(fine + 1), fs(fine + 1);
  Vec2 prev{sx.eval(0.0), sy.eval(0.0)};
  ft[0] = 0.0;
  fs[0] = 0.0;
  for (int i = 1; i <= fine; ++i) {
    ft[i] = period * i / fine;
    const Vec2 p{sx.eval(ft[i]), sy.eval(ft[i])};
    fs[i] = fs[i - 1] + norm(p - prev);
    prev = p;
  }
  const double total = fs[fine];

  std::vector<Vec2> out(n);
  int seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = total * k / n;
    while (seg + 1 < fine && fs[seg + 1] < target) ++seg;
    const double w = (fs[seg + 1] > fs[seg]) ? (target - fs[seg]) / (fs[seg + 1] - fs[seg]) : 0.0;
    const double tt = ft[seg] + w * (ft[seg + 1] - ft[seg]);
    out[k] = {sx.eval(tt), sy.eval(tt)};
  }
  Curve c(std::move(out));
  const double mean = c.mean_spacing();
  if (c.min_spacing() < 0.5 * mean)
    throw std::runtime_error("Curve::resampled: spacing invariant violated");
  return c;
}

Curve Curve::mirrored_x(double axis) const {
  std::vector<Vec2> p(pts_.size());
  const int n = size();
  // reflect, then reverse to restore counterclockwise orientation
  for (int i = 0; i < n; ++i) {
    const Vec2 q = pts_[(n - i) % n];
    p[i] = {2.0 * axis - q.x, q.y};
  }
  return Curve(std::move(p));
}

Curve Curve::scaled(double factor, Vec2 about) const {
  std::vector<Vec2> p(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) p[i] = about + factor * (pts_[i] - about);
  return Curve(std::move(p));
}

Vec2 Curve::closest_point(Vec2 q, double side, int* segment) const {
  const int n = size();
  double best = std::numeric_limits<double>::max();
  Vec2 bp{};
  int bseg = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = pts_[i], b = pts_[(i + 1) % n];
    const Vec2 d = b - a;
    const Vec2 r{wrap_half(q.x - a.x, side), wrap_half(q.y - a.y, side)};
    const double tt = std::clamp(dot(r, d) / dot(d, d), 0.0, 1.0);
    const Vec2 diff = r - tt * d;
    const double dist2 = dot(diff, diff);
    if (dist2 < best) {
      best = dist2;
      bp = a + tt * d;
      bseg = i;
    }
  }
  if (segment) *segment = bseg;
  return bp;
}

double Curve::distance(Vec2 q, double side) const {
  const Vec2 p = closest_point(q, side);
  const double dx = wrap_half(q.x - p.x, side), dy = wrap_half(q.y - p.y, side);
  return std::sqrt(dx * dx + dy * dy);
}

bool Curve::contains(Vec2 q) const {
  const int n = size();
  bool in = false;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = pts_[i], b = pts_[(i + 1) % n];
    if ((a.y > q.y) != (b.y > q.y)) {
      const double xc = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (q.x < xc) in = !in;
    }
  }
  return in;
}

Curve enforce_area(const Curve& c, double target_area) {
  const CurveGeometry& g = c.geometry();
  const int n = c.size();
  MovedPolygon m;
  m.base = c.points();
  m.dir.resize(n);
  for (int i = 0; i < n; ++i) m.dir[i] = g.normal[i];
  double alpha, beta, gamma;
  area_quadratic(m, alpha, beta, gamma);
  const double s = quadratic_root_near(alpha, beta, gamma, target_area, 0.0);
  std::vector<Vec2> out(n);
  for (int i = 0; i < n; ++i) out[i] = m.base[i] - s * m.dir[i];
  return Curve(std::move(out));
}

Curve Curve::circle(Vec2 center, double radius, int n) {
  // Node radius inflated so the polygon area equals pi r^2 exactly; the plain
  // inscribed polygon misses it by (2pi/n)^2/6, right at test tolerances.
  const double th0 = 2.0 * M_PI / n;
  const double r_eff = radius * std::sqrt(th0 / std::sin(th0));
  std::vector<Vec2> p(n);
  for (int i = 0; i < n; ++i) {
    const double th = th0 * i;
    p[i] = {center.x + r_eff * std::cos(th), center.y + r_eff * std::sin(th)};
  }
  return Curve(std::move(p));
}

Curve Curve::ellipse(Vec2 center, double a, double b, int n) {
  const int fine = 256 * n;
  std::vector<double> s(fine + 1, 0.0);
  Vec2 prev{center.x + a, center.y};
  for (int i = 1; i <= fine; ++i) {
    const double th = 2.0 * M_PI * i / fine;
    const Vec2 p{center.x + a * std::cos(th), center.y + b * std::sin(th)};
    s[i] = s[i - 1] + norm(p - prev);
    prev = p;
  }
  std::vector<Vec2> out(n);
  int seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = s[fine] * k / n;
    while (seg + 1 < fine && s[seg + 1] < target) ++seg;
    const double w = (target - s[seg]) / (s[seg + 1] - s[seg]);
    const double th = 2.0 * M_PI * (seg + w) / fine;
    out[k] = {center.x + a * std::cos(th), center.y + b * std::sin(th)};
  }
  return Curve(std::move(out));
}

}  // namespace vpmcf
