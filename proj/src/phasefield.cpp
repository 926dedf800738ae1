#include "vpmcf/phasefield.hpp"

#include <cmath>
#include <string>

#include "vpmcf/calibration.hpp"
#include "vpmcf/defaults.hpp"
#include "vpmcf/doublewell.hpp"

namespace vpmcf {
namespace {

PhaseFieldState finalize_init(ScalarField u, double eps, double alpha) {
  if (!(eps > 0.0)) throw std::invalid_argument("phase field: eps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("phase field: alpha must lie in (0,1)");
  const double h = u.grid.h();
  if (eps < defaults::kMinEpsOverH * h)
    throw std::invalid_argument("phase field: eps=" + std::to_string(eps) +
                                " under-resolved, need eps/h >= 3 (h=" + std::to_string(h) + ")");
  PhaseFieldState s;
  s.eps = eps;
  s.alpha = alpha;
  s.t = 0.0;
  s.u_hat = to_spectrum(u);
  s.u = std::move(u);
  ScalarField p(s.u.grid);
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = phi(s.u.values[i]);
  s.m0 = integrate(p);
  return s;
}

}  // namespace

PhaseFieldState init_well_prepared(const PeriodicGrid& grid, const Curve& curve, double eps,
                                   double alpha) {
  SignedDistance sd = signed_distance(curve, grid);
  ScalarField u(grid);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    u.values[i] = optimal_profile(sd.s.values[i] / eps);
  return finalize_init(std::move(u), eps, alpha);
}

PhaseFieldState init_from_signed_distance(const ScalarField& d, double eps, double alpha) {
  require_finite(d, "init_from_signed_distance");
  ScalarField u(d.grid);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    u.values[i] = optimal_profile(d.values[i] / eps);
  return finalize_init(std::move(u), eps, alpha);
}

PhaseFieldState init_strip(const PeriodicGrid& grid, double y0, double y1, double eps,
                           double alpha) {
  if (!(y0 < y1) || y0 <= 0.0 || y1 >= grid.side)
    throw std::invalid_argument("strip: need 0 < y0 < y1 < side");
  ScalarField u(grid);
  for (int iy = 0; iy < grid.n; ++iy) {
    const double d = std::min(grid.y(iy) - y0, y1 - grid.y(iy));  // positive inside
    const double v = optimal_profile(d / eps);
    for (int ix = 0; ix < grid.n; ++ix) u(ix, iy) = v;
  }
  return finalize_init(std::move(u), eps, alpha);
}

PhaseFieldState init_uniform(const PeriodicGrid& grid, double value, double eps, double alpha) {
  return finalize_init(ScalarField(grid, value), eps, alpha);
}

double mass_phi(const PhaseFieldState& s) {
  ScalarField p(s.u.grid);
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = phi(s.u.values[i]);
  return integrate(p);
}

double lambda_relaxed(const PhaseFieldState& s) {
  return std::pow(s.eps, -s.alpha) * (s.m0 - mass_phi(s));
}

double lambda_exact(const PhaseFieldState& s) {
  ScalarField lap = laplacian_of(s.u_hat);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double u = s.u.values[i];
    const double g = sqrt2W(u);
    num += g * (s.eps * lap.values[i] - W_prime(u) / s.eps);
    den += g * g;
  }
  if (den < 1e-300) return 0.0;  // no interface left
  return -num / den;
}

double multiplier(const PhaseFieldState& s, MultiplierMode mode) {
  return mode == MultiplierMode::Relaxed ? lambda_relaxed(s) : lambda_exact(s);
}

ScalarField rhs_field(const PhaseFieldState& s, double lambda) {
  ScalarField lap = laplacian_of(s.u_hat);
  ScalarField r(s.u.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const double u = s.u.values[i];
    r.values[i] = s.eps * lap.values[i] - W_prime(u) / s.eps + lambda * sqrt2W(u);
  }
  return r;
}

Instrument multiplier_and_rhs(const PhaseFieldState& s, MultiplierMode mode) {
  Instrument out;
  ScalarField lap = laplacian_of(s.u_hat);
  if (mode == MultiplierMode::Relaxed) {
    double massp = 0.0;
    for (double v : s.u.values) massp += phi(v);
    massp *= s.u.grid.h() * s.u.grid.h();
    out.lambda = std::pow(s.eps, -s.alpha) * (s.m0 - massp);
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.u.values.size(); ++i) {
      const double u = s.u.values[i];
      const double g = sqrt2W(u);
      num += g * (s.eps * lap.values[i] - W_prime(u) / s.eps);
      den += g * g;
    }
    out.lambda = (den < 1e-300) ? 0.0 : -num / den;
  }
  out.rhs = ScalarField(s.u.grid);
  for (std::size_t i = 0; i < out.rhs.values.size(); ++i) {
    const double u = s.u.values[i];
    out.rhs.values[i] = s.eps * lap.values[i] - W_prime(u) / s.eps + out.lambda * sqrt2W(u);
  }
  return out;
}

ScalarField discrepancy_field(const PhaseFieldState& s) {
  VectorField g = gradient_of(s.u_hat);
  ScalarField d(s.u.grid);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const double gx = g.x.values[i], gy = g.y.values[i];
    d.values[i] = 0.5 * s.eps * (gx * gx + gy * gy) - W(s.u.values[i]) / s.eps;
  }
  return d;
}

StepOutcome step(const PhaseFieldState& s, double dt, MultiplierMode mode) {
  const double limit = defaults::dt_limit(s.eps);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("phase field step: dt=" + std::to_string(dt) +
                                " above the reaction stability limit " + std::to_string(limit));
  const PeriodicGrid& grid = s.u.grid;
  const double ieps2 = 1.0 / (s.eps * s.eps);

  PhaseFieldState out;
  out.eps = s.eps;
  out.alpha = s.alpha;
  out.m0 = s.m0;
  out.t = s.t + dt;
  double lambda = 0.0;

  if (mode == MultiplierMode::Relaxed) {
    lambda = lambda_relaxed(s);
    ScalarField reac(grid);
    for (std::size_t i = 0; i < reac.values.size(); ++i) {
      const double u = s.u.values[i];
      reac.values[i] = -W_prime(u) * ieps2 + lambda * sqrt2W(u) / s.eps;
    }
    Spectrum uh = s.u_hat;
    semi_implicit_combine(uh, to_spectrum(reac), dt);
    out.u = from_spectrum(uh);
    out.u_hat = std::move(uh);
  } else {
    // u+(lambda) = base + lambda * gain, both screened-Poisson solves; pick
    // lambda so that int phi(u+) = m0 exactly (monotone scalar equation).
    ScalarField reac(grid), gain_src(grid);
    for (std::size_t i = 0; i < reac.values.size(); ++i) {
      const double u = s.u.values[i];
      reac.values[i] = -W_prime(u) * ieps2;
      gain_src.values[i] = sqrt2W(u) / s.eps;
    }
    Spectrum base_hat = s.u_hat;
    semi_implicit_combine(base_hat, to_spectrum(reac), dt);
    ScalarField base = from_spectrum(base_hat);

    Spectrum gain_hat = to_spectrum(gain_src);
    {
      // gain = (dt * gain_src_hat) / (1 + dt |k|^2): reuse the combine with a
      // zero base spectrum
      Spectrum zero;
      zero.grid = grid;
      zero.c.assign(gain_hat.c.size(), 0.0);
      semi_implicit_combine(zero, gain_hat, dt);
      gain_hat = std::move(zero);
    }
    ScalarField gain = from_spectrum(gain_hat);

    double lam = lambda_exact(s);
    const double tol = 1e-14 * std::max(1.0, std::abs(s.m0));
    const double h2 = grid.h() * grid.h();
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      double g = 0.0, dg = 0.0;
      for (std::size_t i = 0; i < base.values.size(); ++i) {
        const double v = base.values[i] + lam * gain.values[i];
        g += phi(v);
        dg += sqrt2W(v) * gain.values[i];
      }
      g = g * h2 - s.m0;
      dg *= h2;
      if (std::abs(g) < tol) {
        converged = true;
        break;
      }
      if (!(dg > 1e-300)) break;
      lam -= g / dg;
    }
    if (!converged || !std::isfinite(lam))
      throw PhaseFieldBlowup("projected multiplier solve failed at t=" + std::to_string(out.t));
    lambda = lam;
    out.u = ScalarField(grid);
    for (std::size_t i = 0; i < out.u.values.size(); ++i)
      out.u.values[i] = base.values[i] + lam * gain.values[i];
    for (std::size_t i = 0; i < base_hat.c.size(); ++i) base_hat.c[i] += lam * gain_hat.c[i];
    out.u_hat = std::move(base_hat);
  }

  for (double v : out.u.values)
    if (!std::isfinite(v))
      throw PhaseFieldBlowup("phase field blow-up at t=" + std::to_string(out.t));
  return {std::move(out), lambda};
}

LedgerRow energy_report(const PhaseFieldState& s, const ScalarField& rhs, double lambda) {
  VectorField g = gradient_of(s.u_hat);
  double grad2 = 0.0, well = 0.0, massp = 0.0, diss = 0.0, disc_max = -1e300;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double u = s.u.values[i];
    const double gx = g.x.values[i], gy = g.y.values[i];
    const double g2 = gx * gx + gy * gy;
    grad2 += g2;
    well += W(u);
    massp += phi(u);
    diss += rhs.values[i] * rhs.values[i];
    disc_max = std::max(disc_max, 0.5 * s.eps * g2 - W(u) / s.eps);
  }
  const double h2 = s.u.grid.h() * s.u.grid.h();
  LedgerRow row;
  row.t = s.t;
  row.e_s = h2 * (0.5 * s.eps * grad2 + well / s.eps);
  row.mass_phi = h2 * massp;
  const double deficit = s.m0 - row.mass_phi;
  row.e_p = 0.5 * std::pow(s.eps, -s.alpha) * deficit * deficit;
  row.e_total = row.e_s + row.e_p;
  row.lambda = lambda;
  row.diss_velocity = h2 * diss / s.eps;
  row.diss_curvature = row.diss_velocity;
  row.discrepancy_max = disc_max;
  return row;
}

void EnergyLedger::append(LedgerRow row) {
  if (row.e_s < 0.0 || row.e_p < 0.0)
    throw std::logic_error("ledger: negative energy component");
  if (!rows_.empty()) {
    if (row.t <= rows_.back().t) throw std::logic_error("ledger: time must increase");
    const LedgerRow& p = rows_.back();
    cum_ += 0.5 * (row.t - p.t) *
            (0.5 * (p.diss_velocity + p.diss_curvature) +
             0.5 * (row.diss_velocity + row.diss_curvature));
  } else {
    e0_ = row.e_total;
  }
  row.de_giorgi_residual = row.e_total + cum_ - e0_;
  rows_.push_back(row);
}

VarifoldProxy varifold_proxy(const PhaseFieldState& s, const ScalarField& rhs, double lambda) {
  const PeriodicGrid& grid = s.u.grid;
  ScalarField psi(grid);
  for (std::size_t i = 0; i < psi.values.size(); ++i) psi.values[i] = phi(s.u.values[i]);
  VectorField gpsi = gradient(psi);

  VarifoldProxy p;
  p.lambda = lambda;
  p.omega = ScalarField(grid);
  p.direction = VectorField(grid);
  p.speed = ScalarField(grid);
  p.curvature = VectorField(grid);
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    const double gx = gpsi.x.values[i], gy = gpsi.y.values[i];
    const double w = std::sqrt(gx * gx + gy * gy);
    p.omega.values[i] = w;
    if (w < defaults::kDirectionCutoff) {
      p.direction.x.values[i] = 1.0;  // e1 convention off the support
      p.direction.y.values[i] = 0.0;
    } else {
      p.direction.x.values[i] = gx / w;
      p.direction.y.values[i] = gy / w;
    }
    const double root = sqrt2W(s.u.values[i]);
    p.speed.values[i] = (root < defaults::kSpeedCutoff) ? 0.0 : -rhs.values[i] / root;
    const double curv = -(rhs.values[i] - lambda * root);  // -(eps lap u - W'/eps)
    p.curvature.x.values[i] = curv * p.direction.x.values[i];
    p.curvature.y.values[i] = curv * p.direction.y.values[i];
  }
  return p;
}

}  // namespace vpmcf
