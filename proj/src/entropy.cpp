#include "vpmcf/entropy.hpp"

#include <cmath>
#include <stdexcept>

#include "vpmcf/defaults.hpp"
#include "vpmcf/doublewell.hpp"
#include "vpmcf/spectral.hpp"

namespace vpmcf {
namespace {

/// Area fraction of the cell [-h/2,h/2]^2 on the side {g.(x-c) > -d} of the
/// reconstructed level line (Sutherland-Hodgman clip of the square).
double cell_fraction(double d, double gx, double gy, double h) {
  const double glen = std::hypot(gx, gy);
  if (glen * h < 1e-30) return d > 0.0 ? 1.0 : 0.0;
  struct P {
    double x, y;
  };
  P poly[8] = {{-h / 2, -h / 2}, {h / 2, -h / 2}, {h / 2, h / 2}, {-h / 2, h / 2}};
  int n = 4;
  P out[8];
  int m = 0;
  auto side = [&](const P& p) { return gx * p.x + gy * p.y + d; };
  for (int i = 0; i < n; ++i) {
    const P a = poly[i], b = poly[(i + 1) % n];
    const double sa = side(a), sb = side(b);
    if (sa >= 0.0) out[m++] = a;
    if ((sa >= 0.0) != (sb >= 0.0)) {
      const double w = sa / (sa - sb);
      out[m++] = {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)};
    }
  }
  double area = 0.0;
  for (int i = 0; i < m; ++i) {
    const P a = out[i], b = out[(i + 1) % m];
    area += a.x * b.y - a.y * b.x;
  }
  return 0.5 * area / (h * h);
}

}  // namespace

void relative_entropy(const VarifoldProxy& proxy, const Calibration& cal,
                      const ScalarField& u, double& e_rel, double& e_rel_alt) {
  const PeriodicGrid& grid = proxy.omega.grid;
  if (grid != cal.xi.grid() || grid != u.grid)
    throw std::invalid_argument("relative_entropy: grid mismatch");
  const double h = grid.h();
  ScalarField div_xi = divergence(cal.xi);
  double rel = 0.0, mass = 0.0, chidiv = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double ndotxi = proxy.direction.x.values[i] * cal.xi.x.values[i] +
                          proxy.direction.y.values[i] * cal.xi.y.values[i];
    rel += (1.0 - ndotxi) * proxy.omega.values[i];
    mass += proxy.omega.values[i];
    // int chi div xi with chi = 1_{u > 1/2}: cells crossed by the level set
    // get a first-order interface reconstruction, otherwise the midpoint
    // quadrature noise of the sharp indicator swamps the identity
    const double d = u.values[i] - 0.5;
    const double root = sqrt2W(u.values[i]);
    double frac;
    if (root > 0.5) {
      // grad u = grad psi / phi'(u), available from the proxy fields
      const double gx = proxy.direction.x.values[i] * proxy.omega.values[i] / root;
      const double gy = proxy.direction.y.values[i] * proxy.omega.values[i] / root;
      frac = (std::abs(d) > h * std::hypot(gx, gy)) ? (d > 0.0 ? 1.0 : 0.0)
                                                    : cell_fraction(d, gx, gy, h);
    } else {
      frac = d > 0.0 ? 1.0 : 0.0;
    }
    chidiv += frac * div_xi.values[i];
  }
  const double h2 = h * h;
  e_rel = rel * h2;
  e_rel_alt = (mass + chidiv) * h2;
}

void bulk_error(const ScalarField& u, const Calibration& cal, double& e_bulk, double& e_signed) {
  if (u.grid != cal.theta.grid) throw std::invalid_argument("bulk_error: grid mismatch");
  double mod = 0.0, sgn = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double chi = u.values[i] > 0.5 ? 1.0 : 0.0;
    const double chi_a = cal.sd.s.values[i] > 0.0 ? 1.0 : 0.0;
    const double th = cal.theta.values[i];
    mod += std::abs(chi - chi_a) * std::abs(th);
    sgn += (chi - chi_a) * th;
  }
  const double h2 = u.grid.h() * u.grid.h();
  e_bulk = mod * h2;
  e_signed = sgn * h2;
  if (std::abs(e_bulk - e_signed) > defaults::kBulkFormsTol)
    throw std::logic_error("bulk_error: signed and modulus forms disagree by " +
                           std::to_string(e_bulk - e_signed));
}

EntropyReport coercivity_report(const VarifoldProxy& proxy, const Calibration& cal,
                                const ScalarField& u) {
  const PeriodicGrid& grid = u.grid;
  EntropyReport rep;
  relative_entropy(proxy, cal, u, rep.e_rel, rep.e_rel_alt);
  bulk_error(u, cal, rep.e_bulk, rep.e_bulk_signed);
  if (rep.e_rel < defaults::kEntropyFloor || rep.e_bulk < defaults::kEntropyFloor)
    throw std::logic_error("coercivity_report: negative entropy");

  // measured shortness constant: the largest c with min(1, c dist^2) <= 1-|xi|
  // on the sampled fields (c = 1 by construction of the cutoff)
  double c_short = 1.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double d2 = cal.sd.s.values[i] * cal.sd.s.values[i];
    const double gap = 1.0 - std::hypot(cal.xi.x.values[i], cal.xi.y.values[i]);
    if (d2 > 1e-30 && gap < std::min(1.0, d2))
      c_short = std::min(c_short, gap / std::min(1.0, d2));
  }
  c_short = std::max(c_short, 0.0);
  // theta lower constant: min(1, c dist) <= |theta| requires c <= delta/dist_max
  double dist_max = 0.0;
  for (double v : cal.sd.s.values) dist_max = std::max(dist_max, std::abs(v));
  const double c_theta = std::min(1.0, cal.delta / dist_max);

  const double h2 = grid.h() * grid.h();
  double q1 = 0.0, q2 = 0.0, q3 = 0.0, q5 = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double dx_ = proxy.direction.x.values[i] - cal.xi.x.values[i];
    const double dy_ = proxy.direction.y.values[i] - cal.xi.y.values[i];
    const double w = proxy.omega.values[i];
    const double dist = std::abs(cal.sd.s.values[i]);
    q1 += (dx_ * dx_ + dy_ * dy_) * w;
    q2 += std::min(1.0, c_short * dist * dist) * w;
    const double chi = u.values[i] > 0.5 ? 1.0 : 0.0;
    const double chi_a = cal.sd.s.values[i] > 0.0 ? 1.0 : 0.0;
    q3 += std::abs(chi - chi_a) * std::min(1.0, c_theta * dist);
    const double ndotxi = proxy.direction.x.values[i] * cal.xi.x.values[i] +
                          proxy.direction.y.values[i] * cal.xi.y.values[i];
    q5 += (1.0 - ndotxi) * w;  // rho == 1 for the Dirac proxy
  }
  rep.coercivity[0] = {q1 * h2, 2.0 * rep.e_rel};
  rep.coercivity[1] = {q2 * h2, 2.0 * rep.e_rel};
  rep.coercivity[2] = {q3 * h2, rep.e_bulk};
  rep.coercivity[3] = {0.0, rep.e_rel};  // int (1 - rho) domega with rho == 1
  rep.coercivity[4] = {q5 * h2, rep.e_rel};
  rep.coercivity[5] = {q1 * h2, 2.0 * rep.e_rel};  // rho == 1 duplicate of 1
  rep.coercivity[6] = {q2 * h2, 2.0 * rep.e_rel};
  for (const CoercivityPair& p : rep.coercivity)
    if (p.lhs > p.rhs + defaults::kCoercivitySlack * std::abs(p.rhs) + 1e-15) ++rep.violations;

  // L1 symmetric difference of the phases
  double sym = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double chi = u.values[i] > 0.5 ? 1.0 : 0.0;
    const double chi_a = cal.sd.s.values[i] > 0.0 ? 1.0 : 0.0;
    sym += std::abs(chi - chi_a);
  }
  rep.symdiff_area = sym * h2;
  return rep;
}

StabilitySummary stability_monitor(const std::vector<EntropyReport>& series,
                                   const std::vector<double>& lambda_series,
                                   const std::vector<double>& lambda_star_series) {
  if (series.empty()) throw std::invalid_argument("stability_monitor: empty series");
  if (series.size() != lambda_series.size() || series.size() != lambda_star_series.size())
    throw std::invalid_argument("stability_monitor: series lengths differ");
  const double floor_ = defaults::kGronwallFloor;

  // X(t) = int_0^t (1 + |lambda| + |lambda*|), trapezoid on the report times
  const std::size_t n = series.size();
  std::vector<double> x(n, 0.0), y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double dt = series[i].t - series[i - 1].t;
      const double f0 =
          1.0 + std::abs(lambda_series[i - 1]) + std::abs(lambda_star_series[i - 1]);
      const double f1 = 1.0 + std::abs(lambda_series[i]) + std::abs(lambda_star_series[i]);
      x[i] = x[i - 1] + 0.5 * dt * (f0 + f1);
    }
    y[i] = std::log(series[i].e_rel + series[i].e_bulk + floor_);
  }

  StabilitySummary s;
  s.x_total = x.back();
  const double e0 = series.front().e_rel + series.front().e_bulk + floor_;
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    rmax = std::max(rmax, (series[i].e_rel + series[i].e_bulk + floor_) / e0);
  s.ratio_max = rmax;
  s.ratio_final = (series.back().e_rel + series.back().e_bulk + floor_) / e0;

  if (n >= 2 && s.x_total > 0.0) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    s.rate = (den > 0.0) ? (n * sxy - sx * sy) / den : 0.0;
    s.c_fit = std::exp(std::max(s.rate, 0.0) * s.x_total);
  }
  return s;
}

}  // namespace vpmcf
