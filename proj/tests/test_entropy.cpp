#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "vpmcf/calibration.hpp"
#include "vpmcf/defaults.hpp"
#include "vpmcf/entropy.hpp"
#include "vpmcf/phasefield.hpp"

using namespace vpmcf;

namespace {

struct Pairing {
  PeriodicGrid grid{128, 1.0};
  Curve curve = Curve::circle({0.5, 0.5}, 0.25, 1024);
  PhaseFieldState state;
  Calibration cal;
  VarifoldProxy proxy;

  explicit Pairing(double eps = 0.06)
      : state(init_well_prepared(grid, curve, eps, 0.5)),
        cal(build_calibration(curve, std::vector<double>(curve.size(), 0.0), grid)),
        proxy(make_proxy(state)) {}

  static VarifoldProxy make_proxy(const PhaseFieldState& s) {
    Instrument ins = multiplier_and_rhs(s, MultiplierMode::Projected);
    return varifold_proxy(s, ins.rhs, ins.lambda);
  }
};

}  // namespace

TEST_CASE("pointwise kernel inequalities on random samples") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  long bad = 0;
  const long n = defaults::kKernelSamples;
  for (long k = 0; k < n; ++k) {
    const double a = uni(rng) * M_PI;
    const Vec2 p{std::cos(a), std::sin(a)};  // unit direction
    Vec2 xi{uni(rng), uni(rng)};
    const double len = norm(xi);
    if (len > 1.0) xi = (1.0 / len) * xi;  // |xi| <= 1 samples
    const double lhs = 1.0 - dot(p, xi);
    const Vec2 d = p - xi;
    const double rhs = 0.5 * dot(d, d) + 0.5 * (1.0 - norm(xi));
    if (lhs < rhs - 1e-14) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("relative entropy of a matched circle pairing is small") {
  Pairing p(0.06);
  double e_rel = 0.0, e_alt = 0.0;
  relative_entropy(p.proxy, p.cal, p.state.u, e_rel, e_alt);
  LedgerRow row = energy_report(p.state, multiplier_and_rhs(p.state, MultiplierMode::Projected).rhs,
                                0.0);
  CHECK(e_rel >= defaults::kEntropyFloor);
  CHECK(e_rel < 0.1 * row.e_s);
  // the two forms agree up to the diffuse-interface replacement of chi
  CHECK(std::abs(e_rel - e_alt) < 0.05 * e_rel + 1e-3);
}

TEST_CASE("empty calibration turns the entropy into the interface mass") {
  Pairing p(0.06);
  Calibration empty = p.cal;
  for (auto& v : empty.xi.x.values) v = 0.0;
  for (auto& v : empty.xi.y.values) v = 0.0;
  double e_rel = 0.0, e_alt = 0.0;
  relative_entropy(p.proxy, empty, p.state.u, e_rel, e_alt);
  CHECK(e_rel == doctest::Approx(integrate(p.proxy.omega)).epsilon(1e-12));
  CHECK(e_alt == doctest::Approx(integrate(p.proxy.omega)).epsilon(1e-12));

  // coerciv1 with xi = 0 reads int omega <= 2 int omega
  EntropyReport rep = coercivity_report(p.proxy, empty, p.state.u);
  CHECK(rep.violations == 0);
  CHECK(rep.coercivity[4].lhs == doctest::Approx(rep.coercivity[4].rhs).epsilon(1e-12));
}

TEST_CASE("bulk error: identical phases, shifted circle ring integral, signed form") {
  Pairing p(0.06);
  // chi == chi_A: zero bulk error
  ScalarField chi_exact(p.grid);
  for (std::size_t i = 0; i < chi_exact.values.size(); ++i)
    chi_exact.values[i] = p.cal.sd.s.values[i] > 0.0 ? 1.0 : 0.0;
  double eb = 0.0, es = 0.0;
  bulk_error(chi_exact, p.cal, eb, es);
  CHECK(eb == 0.0);
  CHECK(es == 0.0);

  // radius + 0.02 annulus: analytic ring integral of dist
  const double shift = 0.02;
  ScalarField chi_big(p.grid);
  for (int iy = 0; iy < p.grid.n; ++iy)
    for (int ix = 0; ix < p.grid.n; ++ix) {
      const double r = std::hypot(p.grid.x(ix) - 0.5, p.grid.y(iy) - 0.5);
      chi_big(ix, iy) = r < 0.25 + shift ? 1.0 : 0.0;
    }
  bulk_error(chi_big, p.cal, eb, es);
  // oracle: int_0^shift t (2 pi (R + t)) dt with |theta| = dist on the band
  const double oracle = 2.0 * M_PI * (0.25 * shift * shift / 2.0 + shift * shift * shift / 3.0);
  CHECK(std::abs(eb - oracle) / oracle < 0.05);
  CHECK(std::abs(eb - es) <= defaults::kBulkFormsTol);
}

TEST_CASE("coercivity report holds on a healthy pairing and on adversarial input") {
  Pairing p(0.06);
  EntropyReport rep = coercivity_report(p.proxy, p.cal, p.state.u);
  CHECK(rep.violations == 0);
  for (const CoercivityPair& c : rep.coercivity) {
    CHECK(std::isfinite(c.lhs));
    CHECK(std::isfinite(c.rhs));
  }
  CHECK(rep.coercivity[3].lhs == 0.0);  // rho == 1 reduction
  CHECK(rep.symdiff_area < 0.05);

  // flipping the proxy direction still satisfies the algebraic inequalities
  VarifoldProxy flipped = p.proxy;
  for (auto& v : flipped.direction.x.values) v = -v;
  for (auto& v : flipped.direction.y.values) v = -v;
  EntropyReport rep2 = coercivity_report(flipped, p.cal, p.state.u);
  CHECK(rep2.violations == 0);
  CHECK(rep2.e_rel >= rep.e_rel);  // misalignment costs entropy
}

TEST_CASE("stability monitor: flat series, empty series, growth rate") {
  std::vector<EntropyReport> series(6);
  std::vector<double> lam(6, 4.0), lstar(6, -4.0);
  for (int i = 0; i < 6; ++i) {
    series[i].t = 0.1 * i;
    series[i].e_rel = 1e-4;
    series[i].e_bulk = 1e-5;
  }
  StabilitySummary flat = stability_monitor(series, lam, lstar);
  CHECK(flat.ratio_max == doctest::Approx(1.0));
  CHECK(std::abs(flat.rate) < 1e-10);
  CHECK(flat.c_fit == doctest::Approx(1.0));

  // exponential growth in X recovers the rate
  for (int i = 0; i < 6; ++i) {
    const double x = 9.0 * 0.1 * i;  // (1 + 4 + 4) per unit time
    series[i].e_rel = 1e-4 * std::exp(0.5 * x);
  }
  StabilitySummary grow = stability_monitor(series, lam, lstar);
  CHECK(grow.rate == doctest::Approx(0.5).epsilon(0.05));
  CHECK(std::isfinite(grow.c_fit));

  CHECK_THROWS_AS(stability_monitor({}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(stability_monitor(series, {1.0}, lstar), std::invalid_argument);
}

TEST_CASE("grid mismatch is rejected") {
  Pairing p(0.06);
  PeriodicGrid other(64, 1.0);
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 256);
  Calibration small = build_calibration(circle, std::vector<double>(circle.size(), 0.0), other);
  double a = 0.0, b = 0.0;
  CHECK_THROWS_AS(relative_entropy(p.proxy, small, p.state.u, a, b), std::invalid_argument);
}
