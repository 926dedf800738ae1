#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vpmcf/calibration.hpp"
#include "vpmcf/defaults.hpp"
#include "vpmcf/spectral.hpp"

using namespace vpmcf;

namespace {

std::vector<double> zero_speed(const Curve& c) { return std::vector<double>(c.size(), 0.0); }

std::vector<double> cos2theta_speed(const Curve& c, Vec2 center) {
  std::vector<double> v(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const Vec2 p = c.points()[i] - center;
    v[i] = std::cos(2.0 * std::atan2(p.y, p.x));
  }
  return v;
}

}  // namespace

TEST_CASE("signed distance of a fine circle matches the analytic values") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 2048);
  SignedDistance sd = signed_distance(circle, grid);

  // cell centers sit at half-integer offsets; compare against the analytic
  // distance of the actual sample point
  const double c0 = norm(Vec2{grid.x(128), grid.y(128)} - Vec2{0.5, 0.5});
  CHECK(std::abs(sd.s(128, 128) - (0.25 - c0)) < 1e-6);  // near the center
  // a point near radius 0.35: outside by about 0.10
  const int ix = static_cast<int>(std::round((0.5 + 0.35) / grid.h() - 0.5));
  const double expect = 0.25 - norm(Vec2{grid.x(ix), grid.y(128)} - Vec2{0.5, 0.5});
  CHECK(std::abs(sd.s(ix, 128) - expect) < 1e-6);
  CHECK(sd.s(ix, 128) < 0.0);
  CHECK(std::abs(sd.s(ix, 128) + 0.10) < 3e-3);

  // distance vanishes on the nodes themselves
  for (int i = 0; i < circle.size(); i += 97)
    CHECK(circle.distance(circle.points()[i], grid.side) < 1e-10);

  // closest-point field points back to radius 0.25
  for (int iy = 40; iy < 216; iy += 7)
    for (int ix2 = 40; ix2 < 216; ix2 += 7) {
      const Vec2 p{sd.closest.x(ix2, iy), sd.closest.y(ix2, iy)};
      CHECK(std::abs(norm(p - Vec2{0.5, 0.5}) - 0.25) < 1e-5);
    }

  // eikonal property of the spectral gradient on the tube, cut locus excluded
  const double delta = default_delta(circle, grid.side);
  VectorField g = gradient(sd.s);
  double worst = 0.0;
  for (std::size_t i = 0; i < sd.s.values.size(); ++i) {
    if (std::abs(sd.s.values[i]) >= delta) continue;
    worst = std::max(worst, std::abs(std::hypot(g.x.values[i], g.y.values[i]) - 1.0));
  }
  CHECK(worst < 1e-2);

  // analytic normal extension is unit and matches grad s on the tube
  for (std::size_t i = 0; i < sd.s.values.size(); ++i) {
    if (std::abs(sd.s.values[i]) >= delta) continue;
    CHECK(std::abs(std::hypot(sd.normal.x.values[i], sd.normal.y.values[i]) - 1.0) < 1e-12);
  }
}

TEST_CASE("cutoff profiles satisfy their pinned values") {
  const double d = 0.09;
  CHECK(cutoff_zeta(0.0, d) == 1.0);
  CHECK(cutoff_zeta(0.5 * d, d) == 1.0 - 0.25 * d * d);  // analytic profile value
  CHECK(cutoff_zeta(d, d) == 0.0);
  CHECK(cutoff_zeta(2.0 * d, d) == 0.0);
  for (double r = 0.0; r <= 1.5 * d; r += 1e-3) {
    // shortness with c = 1; slack covers quintic-evaluation roundoff near the join
    CHECK(cutoff_zeta(r, d) <= 1.0 - r * r + 1e-14);
    CHECK(cutoff_zeta(r, d) >= 0.0);
  }
  CHECK(theta_trunc(0.0, d) == 0.0);
  CHECK(theta_trunc(0.25 * d, d) == 0.25 * d);
  CHECK(theta_trunc(2.0 * d, d) == d);
  CHECK(theta_trunc(-0.3 * d, d) == -theta_trunc(0.3 * d, d));
  double prev = theta_trunc(-2.0 * d, d);
  for (double r = -2.0 * d; r <= 2.0 * d; r += 1e-4) {
    const double v = theta_trunc(r, d);
    CHECK(v >= prev - 1e-15);  // monotone truncation
    prev = v;
  }
  CHECK(bump_h(0.49 * d, d) == 1.0);
  CHECK(bump_h(d, d) == 0.0);
}

TEST_CASE("xi extends the inner normal with unit length on the curve") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 2048);
  Calibration cal = build_calibration(circle, zero_speed(circle), grid);
  const CurveGeometry& g = circle.geometry();
  for (int i = 0; i < circle.size(); i += 61) {
    const Vec2 p = circle.points()[i];
    // bilinear sample of xi at the node
    auto bil = [&](const ScalarField& f) {
      const double h = grid.h();
      const double fx = p.x / h - 0.5, fy = p.y / h - 0.5;
      const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
      const double wx = fx - ix, wy = fy - iy;
      auto at = [&](int a, int b) { return f.values[grid.idx((a + grid.n) % grid.n, (b + grid.n) % grid.n)]; };
      return (1 - wx) * (1 - wy) * at(ix, iy) + wx * (1 - wy) * at(ix + 1, iy) +
             (1 - wx) * wy * at(ix, iy + 1) + wx * wy * at(ix + 1, iy + 1);
    };
    const double xin = bil(cal.xi.x) * g.normal[i].x + bil(cal.xi.y) * g.normal[i].y;
    CHECK(std::abs(xin - 1.0) < 1e-3);
  }
  // |xi| <= 1 globally
  for (std::size_t i = 0; i < cal.xi.x.values.size(); ++i)
    CHECK(std::hypot(cal.xi.x.values[i], cal.xi.y.values[i]) <= 1.0 + 1e-14);
}

TEST_CASE("theta has the right sign and two-sided bounds") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 1024);
  Calibration cal = build_calibration(circle, zero_speed(circle), grid);
  CHECK(theta_trunc(0.0, cal.delta) == 0.0);  // vanishes on the interface
  CHECK(cal.theta(128, 128) < 0.0);           // disc center
  CHECK(cal.theta(0, 0) > 0.0);               // far corner
  for (std::size_t i = 0; i < cal.theta.values.size(); ++i) {
    const double dist = std::abs(cal.sd.s.values[i]);
    if (dist >= cal.delta || dist < 1e-6) continue;
    const double bound = std::min(cal.delta, dist);
    CHECK(std::abs(cal.theta.values[i]) >= 0.5 * bound - 1e-12);
    CHECK(std::abs(cal.theta.values[i]) <= 2.0 * bound + 1e-12);
  }
}

TEST_CASE("lambda_star equals -1/R on a circle and mirrors lambda_classical") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 1024);
  Calibration cal = build_calibration(circle, zero_speed(circle), grid);
  CHECK(std::abs(cal.lambda_star - (-4.0)) < 1e-2 * 4.0);
  CHECK(std::abs(cal.lambda_star + circle.lambda_classical()) < 1e-2 * std::abs(cal.lambda_star));

  // scaling the curve by 2 halves |lambda*|
  Curve small = Curve::circle({0.5, 0.5}, 0.15, 1024);
  Curve big = small.scaled(2.0, {0.5, 0.5});
  Calibration cs = build_calibration(small, zero_speed(small), grid);
  Calibration cb = build_calibration(big, zero_speed(big), grid);
  CHECK(std::abs(cb.lambda_star - 0.5 * cs.lambda_star) < 2e-2 * std::abs(cb.lambda_star));
}

TEST_CASE("stokes disc: zero data, rigid rotation, incompatible flux") {
  // zero boundary data
  StokesDisc z = StokesDisc::from_samples(std::vector<Vec2>(64, Vec2{0.0, 0.0}));
  CHECK(z.zero());
  CHECK(norm(z.velocity({0.3, 0.2})) == 0.0);

  // rigid rotation g = omega that: v = omega (-y, x), constant pressure
  const double omg = 0.7;
  std::vector<Vec2> rot(128);
  for (int j = 0; j < 128; ++j) {
    const double th = 2.0 * M_PI * j / 128;
    rot[j] = {-omg * std::sin(th), omg * std::cos(th)};
  }
  StokesDisc s = StokesDisc::from_samples(rot);
  for (double r : {0.0, 0.3, 0.9, 1.05}) {
    for (double th : {0.1, 2.0, 4.4}) {
      const Vec2 x{r * std::cos(th), r * std::sin(th)};
      const Vec2 v = s.velocity(x);
      CHECK(std::abs(v.x - (-omg * x.y)) < 1e-12);
      CHECK(std::abs(v.y - (omg * x.x)) < 1e-12);
    }
  }
  CHECK(std::abs(s.pressure({0.3, 0.1}) - s.pressure({-0.5, 0.4})) < 1e-12);

  // pure normal outflow violates compatibility with flux 2 pi
  std::vector<Vec2> out(64);
  for (int j = 0; j < 64; ++j) {
    const double th = 2.0 * M_PI * j / 64;
    out[j] = {std::cos(th), std::sin(th)};
  }
  CHECK_THROWS_WITH_AS(StokesDisc::from_samples(out), doctest::Contains("flux"),
                       std::invalid_argument);
}

TEST_CASE("stokes disc: manufactured cos(2 theta) data and divergence probe") {
  std::vector<Vec2> g(256);
  for (int j = 0; j < 256; ++j) {
    const double th = 2.0 * M_PI * j / 256;
    g[j] = {std::cos(2.0 * th) * std::cos(th), std::cos(2.0 * th) * std::sin(th)};
  }
  StokesDisc s = StokesDisc::from_samples(g);
  // boundary values are reproduced
  for (int j = 0; j < 256; j += 17) {
    const double th = 2.0 * M_PI * j / 256;
    const Vec2 v = s.velocity({std::cos(th), std::sin(th)});
    CHECK(std::abs(v.x - g[j].x) < 1e-10);
    CHECK(std::abs(v.y - g[j].y) < 1e-10);
  }
  // divergence-free up to the finite-difference probe error
  for (double r : {0.2, 0.6, 0.95, 1.04}) {
    const Vec2 x{r * std::cos(1.3), r * std::sin(1.3)};
    CHECK(std::abs(s.divergence(x)) < 1e-8);
  }
  // Stokes residual -lap v + grad p = 0 by central differences
  const double fd = 1e-4;
  for (double r : {0.25, 0.55}) {
    const Vec2 x{r * std::cos(0.7), r * std::sin(0.7)};
    auto vel = [&](double a, double b) { return s.velocity({a, b}); };
    const Vec2 vpx = vel(x.x + fd, x.y), vmx = vel(x.x - fd, x.y);
    const Vec2 vpy = vel(x.x, x.y + fd), vmy = vel(x.x, x.y - fd);
    const Vec2 vc = vel(x.x, x.y);
    const double lap_vx =
        (vpx.x + vmx.x + vpy.x + vmy.x - 4.0 * vc.x) / (fd * fd);
    const double lap_vy =
        (vpx.y + vmx.y + vpy.y + vmy.y - 4.0 * vc.y) / (fd * fd);
    const double px = (s.pressure({x.x + fd, x.y}) - s.pressure({x.x - fd, x.y})) / (2.0 * fd);
    const double py = (s.pressure({x.x, x.y + fd}) - s.pressure({x.x, x.y - fd})) / (2.0 * fd);
    CHECK(std::abs(-lap_vx + px) < 1e-5);
    CHECK(std::abs(-lap_vy + py) < 1e-5);
  }
}

TEST_CASE("stokes velocity gradient matches finite differences") {
  std::vector<Vec2> g(256);
  for (int j = 0; j < 256; ++j) {
    const double th = 2.0 * M_PI * j / 256;
    const double v = std::cos(2.0 * th) + 0.3 * std::sin(3.0 * th);
    g[j] = {v * std::cos(th), v * std::sin(th)};
  }
  StokesDisc s = StokesDisc::from_samples(g);
  const double fd = 1e-6;
  for (double rr : {0.2, 0.7, 1.02}) {
    for (double th : {0.4, 2.2, 5.0}) {
      const Vec2 x{rr * std::cos(th), rr * std::sin(th)};
      const auto jac = s.velocity_gradient(x);
      const Vec2 vxp = s.velocity({x.x + fd, x.y}), vxm = s.velocity({x.x - fd, x.y});
      const Vec2 vyp = s.velocity({x.x, x.y + fd}), vym = s.velocity({x.x, x.y - fd});
      CHECK(jac[0] == doctest::Approx((vxp.x - vxm.x) / (2 * fd)).epsilon(1e-5));
      CHECK(jac[1] == doctest::Approx((vyp.x - vym.x) / (2 * fd)).epsilon(1e-5));
      CHECK(jac[2] == doctest::Approx((vxp.y - vxm.y) / (2 * fd)).epsilon(1e-5));
      CHECK(jac[3] == doctest::Approx((vyp.y - vym.y) / (2 * fd)).epsilon(1e-5));
    }
  }
  // rigid rotation has the exact constant Jacobian
  std::vector<Vec2> rot(64);
  for (int j = 0; j < 64; ++j) {
    const double th = 2.0 * M_PI * j / 64;
    rot[j] = {-0.7 * std::sin(th), 0.7 * std::cos(th)};
  }
  StokesDisc sr = StokesDisc::from_samples(rot);
  const auto jr = sr.velocity_gradient({0.3, -0.2});
  CHECK(std::abs(jr[0]) < 1e-12);
  CHECK(jr[1] == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(jr[2] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::abs(jr[3]) < 1e-12);
}

TEST_CASE("build_B: zero data gives zero field, support inside the tube") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 1024);
  Calibration cal = build_calibration(circle, zero_speed(circle), grid);
  CHECK(cal.has_B);
  for (std::size_t i = 0; i < cal.B.x.values.size(); ++i) {
    CHECK(cal.B.x.values[i] == 0.0);
    CHECK(cal.B.y.values[i] == 0.0);
  }
}

TEST_CASE("build_B reproduces a manufactured boundary velocity") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 1024);
  SignedDistance sd = signed_distance(circle, grid);
  const double delta = default_delta(circle, grid.side);
  std::vector<double> v = cos2theta_speed(circle, {0.5, 0.5});
  VectorField B = build_B(circle, v, sd, delta);

  const CurveGeometry& g = circle.geometry();
  double worst = 0.0;
  for (int i = 0; i < circle.size(); i += 7) {
    const Vec2 p = circle.points()[i];
    const double h = grid.h();
    auto bil = [&](const ScalarField& f) {
      const double fx = p.x / h - 0.5, fy = p.y / h - 0.5;
      const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
      const double wx = fx - ix, wy = fy - iy;
      auto at = [&](int a, int b) {
        return f.values[grid.idx((a + grid.n) % grid.n, (b + grid.n) % grid.n)];
      };
      return (1 - wx) * (1 - wy) * at(ix, iy) + wx * (1 - wy) * at(ix + 1, iy) +
             (1 - wx) * wy * at(ix, iy + 1) + wx * wy * at(ix + 1, iy + 1);
    };
    const Vec2 bb{bil(B.x), bil(B.y)};
    const Vec2 want = v[i] * g.normal[i];
    worst = std::max(worst, norm(bb - want));
  }
  // grid interpolation dominates; the series itself is exact to 1e-10
  CHECK(worst < 5e-3);

  // the exact series value on the nodes
  StokesDisc s = StokesDisc::from_samples([&] {
    std::vector<Vec2> smp(circle.size());
    for (int i = 0; i < circle.size(); ++i) smp[i] = v[i] * g.normal[i];
    return smp;
  }());
  const double rc = std::sqrt(circle.area() / M_PI);
  double worst_series = 0.0;
  for (int i = 0; i < circle.size(); i += 3) {
    const Vec2 p = (1.0 / rc) * (circle.points()[i] - Vec2{0.5, 0.5});
    worst_series = std::max(worst_series, norm(s.velocity(p) - v[i] * g.normal[i]));
  }
  CHECK(worst_series < 1e-3);

  // supp B inside supp xi
  VectorField xi = build_xi(sd, delta);
  for (std::size_t i = 0; i < B.x.values.size(); ++i) {
    if (B.x.values[i] != 0.0 || B.y.values[i] != 0.0)
      CHECK(std::hypot(xi.x.values[i], xi.y.values[i]) > 0.0);
  }

  // net-flux data is rejected
  CHECK_THROWS_AS(build_B(circle, std::vector<double>(circle.size(), 1.0), sd, delta),
                  std::invalid_argument);
}

TEST_CASE("radial-deviation gate drops B but keeps the rest") {
  PeriodicGrid grid(256, 1.0);
  Curve ell = Curve::ellipse({0.5, 0.5}, 0.30, 0.20, 512);
  std::vector<double> v(ell.size(), 0.0);
  const CurveGeometry& g = ell.geometry();
  const double lam = ell.lambda_classical();
  for (int i = 0; i < ell.size(); ++i) v[i] = g.kappa[i] - lam;
  Calibration cal = build_calibration(ell, v, grid);
  CHECK(!cal.has_B);
  CHECK(cal.lambda_star < 0.0);
  CalibrationResiduals r = verify_static(cal, ell);
  CHECK(r.div_B == 0.0);
  CHECK(r.shortness_slack <= defaults::kPointwiseSlack);
  CHECK(r.theta_sign_violations == 0);
}

TEST_CASE("verify_static on the stationary circle") {
  PeriodicGrid grid(256, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 2048);
  Calibration cal = build_calibration(circle, zero_speed(circle), grid);
  CalibrationResiduals r = verify_static(cal, circle);
  CHECK(r.div_B == 0.0);         // B is identically zero
  CHECK(r.tangential_B == 0.0);
  CHECK(r.geometric_on_interface < defaults::kGeomOnInterfaceTol);
  CHECK(r.shortness_slack <= defaults::kPointwiseSlack);
  CHECK(r.theta_coercivity <= defaults::kPointwiseSlack);
  CHECK(r.theta_sign_violations == 0);
  CHECK(std::isfinite(r.geometric));
  CHECK(r.theta_c > 0.0);
  CHECK(r.theta_C >= 1.0);
}

TEST_CASE("verify_transport on the stationary circle is quiet") {
  PeriodicGrid grid(128, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 1024);
  Calibration c0 = build_calibration(circle, zero_speed(circle), grid, 0.0, 0.0);
  Calibration c1 = build_calibration(circle, zero_speed(circle), grid, 0.0, 1e-3);
  CalibrationResiduals r = verify_transport(c0, c1, 1e-3);
  CHECK(r.theta_transport < 1e-3);
  CHECK(r.xi_len_transport < 1e-3);
  CHECK(r.xi_transport < 1e-3);
  CHECK(r.f_sup < 1e-3);
}

TEST_CASE("delta above the curvature bound is rejected") {
  PeriodicGrid grid(128, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 512);
  CHECK_THROWS_AS(build_calibration(circle, zero_speed(circle), grid, 0.2),
                  std::invalid_argument);
}

TEST_CASE("transport on mismatched grids is rejected") {
  PeriodicGrid g1(128, 1.0), g2(64, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 512);
  Calibration a = build_calibration(circle, zero_speed(circle), g1);
  Calibration b = build_calibration(circle, zero_speed(circle), g2);
  CHECK_THROWS_AS(verify_transport(a, b, 1e-3), std::invalid_argument);
}
