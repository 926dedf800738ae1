#include "vpmcf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "vpmcf/calibration.hpp"
#include "vpmcf/defaults.hpp"
#include "vpmcf/io.hpp"

namespace vpmcf {
namespace fs = std::filesystem;
using io::json;

namespace {

const std::vector<std::string> kPhaseColumns = {
    "t",        "E_S",           "E_P",           "E_total",         "lambda_eps",
    "mass_phi", "diss_velocity", "diss_curvature", "discrepancy_max", "de_giorgi_residual"};

std::vector<double> ledger_row_cells(const LedgerRow& r) {
  return {r.t,      r.e_s,           r.e_p,            r.e_total,         r.lambda,
          r.mass_phi, r.diss_velocity, r.diss_curvature, r.discrepancy_max, r.de_giorgi_residual};
}

void write_manifest(const fs::path& out, const RunConfig& cfg, const json& extra) {
  json j;
  j["config"] = to_json(cfg);
  j["version"] = defaults::kVersion;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  io::write_json(out / "manifest.json", j);
}

MultiplierMode mode_of(const RunConfig& cfg) {
  return cfg.multiplier == "projected" ? MultiplierMode::Projected : MultiplierMode::Relaxed;
}

/// Snapshot cadence: dt adjusted so an integer number of steps lands exactly
/// on every multiple of snapshot_every.
double snap_adjusted_dt(double dt_wanted, double snapshot_every) {
  const int per = std::max(1, static_cast<int>(std::ceil(snapshot_every / dt_wanted - 1e-12)));
  return snapshot_every / per;
}

}  // namespace

Curve initial_curve(const RunConfig& cfg, int nodes) {
  if (cfg.shape == "circle") return Curve::circle({cfg.cx, cfg.cy}, cfg.r, nodes);
  if (cfg.shape == "ellipse") return Curve::ellipse({cfg.cx, cfg.cy}, cfg.a, cfg.b, nodes);
  throw std::invalid_argument("initial_curve: shape '" + cfg.shape + "' has no interface curve");
}

namespace {

/// Distance from a first-quadrant point to the ellipse x^2/a^2 + y^2/b^2 = 1:
/// coarse parameter scan plus ternary refinement (robust inside the evolute,
/// where Newton on the projection equation can lock onto a maximum).
double ellipse_boundary_distance(double px, double py, double a, double b) {
  auto d2 = [&](double th) {
    const double dx = px - a * std::cos(th), dy = py - b * std::sin(th);
    return dx * dx + dy * dy;
  };
  int best = 0;
  double bestv = d2(0.0);
  const int coarse = 64;
  for (int i = 1; i <= coarse; ++i) {
    const double v = d2(0.5 * M_PI * i / coarse);
    if (v < bestv) {
      bestv = v;
      best = i;
    }
  }
  double lo = 0.5 * M_PI * std::max(0, best - 1) / coarse;
  double hi = 0.5 * M_PI * std::min(coarse, best + 1) / coarse;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (d2(m1) < d2(m2)) hi = m2;
    else lo = m1;
  }
  return std::sqrt(d2(0.5 * (lo + hi)));
}

/// Analytic signed distance of the configured shape, positive inside.
ScalarField analytic_signed_distance(const RunConfig& cfg, const PeriodicGrid& grid) {
  ScalarField d(grid);
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      const double dx = std::remainder(grid.x(ix) - cfg.cx, grid.side);
      const double dy = std::remainder(grid.y(iy) - cfg.cy, grid.side);
      double v;
      if (cfg.shape == "circle") {
        v = cfg.r - std::hypot(dx, dy);
      } else {
        const double px = std::abs(dx), py = std::abs(dy);
        const double dist = ellipse_boundary_distance(px, py, cfg.a, cfg.b);
        const bool inside =
            (dx * dx) / (cfg.a * cfg.a) + (dy * dy) / (cfg.b * cfg.b) < 1.0;
        v = inside ? dist : -dist;
      }
      d(ix, iy) = v;
    }
  }
  return d;
}

}  // namespace

SimulateResult simulate(const RunConfig& cfg, const fs::path& out) {
  validate(cfg);
  fs::create_directories(out);
  SimulateResult res;

  PeriodicGrid grid(cfg.grid_n, cfg.side);
  PhaseFieldState state =
      cfg.shape == "strip"
          ? init_strip(grid, cfg.y0, cfg.y1, cfg.eps, cfg.alpha)
          : init_from_signed_distance(analytic_signed_distance(cfg, grid), cfg.eps, cfg.alpha);
  const MultiplierMode mode = mode_of(cfg);
  const double dt_wanted = cfg.dt > 0.0 ? cfg.dt : defaults::dt_default(cfg.eps);
  const double dt = snap_adjusted_dt(dt_wanted, cfg.snapshot_every);
  if (dt > defaults::dt_limit(cfg.eps))
    throw ConfigError("simulate: dt=" + std::to_string(dt) + " above the stability limit " +
                      std::to_string(defaults::dt_limit(cfg.eps)));
  const int steps_per_snap = static_cast<int>(std::round(cfg.snapshot_every / dt));
  const int total_steps = static_cast<int>(std::round(cfg.t_end / dt));

  io::CsvWriter csv(out / "metrics.csv", kPhaseColumns);
  const auto snapshot = [&](const PhaseFieldState& s, const LedgerRow& row, int index) {
    json extra;
    extra["lambda"] = row.lambda;
    extra["m0"] = s.m0;
    extra["eps"] = s.eps;
    extra["alpha"] = s.alpha;
    extra["multiplier"] = cfg.multiplier;
    extra["index"] = index;
    extra["de_giorgi_residual"] = row.de_giorgi_residual;
    io::write_field(out / ("u_" + std::to_string(index) + ".bin"), s.u, "u", s.t, extra);
  };

  Instrument ins = multiplier_and_rhs(state, mode);
  res.ledger.append(energy_report(state, ins.rhs, ins.lambda));
  csv.row(ledger_row_cells(res.ledger.back()));
  res.drift_bound = std::sqrt(2.0) * std::pow(cfg.eps, cfg.alpha / 2.0) *
                    std::sqrt(res.ledger.e0());
  res.discrepancy_run_max = res.ledger.back().discrepancy_max;
  snapshot(state, res.ledger.back(), 0);
  res.snapshots = 1;

  try {
    for (int k = 1; k <= total_steps; ++k) {
      StepOutcome o = step(state, dt, mode);
      state = std::move(o.state);
      ins = multiplier_and_rhs(state, mode);
      const double eprev = res.ledger.back().e_total;
      res.ledger.append(energy_report(state, ins.rhs, ins.lambda));
      const LedgerRow& row = res.ledger.back();
      csv.row(ledger_row_cells(row));

      const double drift = std::abs(row.mass_phi - state.m0);
      res.volume_drift_max = std::max(res.volume_drift_max, drift);
      res.discrepancy_run_max = std::max(res.discrepancy_run_max, row.discrepancy_max);
      if (row.e_total > eprev + defaults::kEnergySlack * res.ledger.e0()) {
        res.status = {false, "energy increased at t=" + std::to_string(row.t)};
        break;
      }
      if (drift > defaults::kDriftSlackFactor * res.drift_bound) {
        res.status = {false, "volume drift bound breached at t=" + std::to_string(row.t)};
        break;
      }
      if (k % steps_per_snap == 0) {
        snapshot(state, row, k / steps_per_snap);
        ++res.snapshots;
      }
    }
  } catch (const PhaseFieldBlowup& e) {
    res.status = {false, e.what()};  // ledger rows so far are already on disk
  }
  csv.close();

  json extra;
  extra["m0"] = state.m0;
  extra["E0"] = res.ledger.e0();
  extra["dt"] = dt;
  extra["volume_drift_max"] = res.volume_drift_max;
  extra["drift_bound"] = res.drift_bound;
  extra["ok"] = res.status.ok;
  write_manifest(out, cfg, extra);
  return res;
}

TrackResult track(const RunConfig& cfg, const fs::path& out) {
  validate(cfg);
  fs::create_directories(out);
  TrackResult res;

  Curve curve = initial_curve(cfg, cfg.track_n);
  const TrackMode mode =
      cfg.track_mode == "analytic" ? TrackMode::Analytic : TrackMode::Projected;
  const double spacing = curve.min_spacing();
  const double dt_wanted = cfg.track_dt > 0.0
                               ? cfg.track_dt
                               : 0.8 * defaults::kCFrontTracking * spacing * spacing;
  const double dt = snap_adjusted_dt(dt_wanted, cfg.snapshot_every);
  const int steps_per_snap = static_cast<int>(std::round(cfg.snapshot_every / dt));
  const int total_steps = static_cast<int>(std::round(cfg.t_end / dt));
  const double L0 = curve.length(), A0 = curve.area();

  io::CsvWriter csv(out / "metrics.csv", {"t", "L", "A", "lambda", "max_kappa", "min_kappa"});
  double lambda = curve.lambda_classical();
  const auto emit = [&](double t) {
    const CurveGeometry& g = curve.geometry();
    csv.row({t, g.length, g.area, lambda, g.max_kappa(), g.min_kappa()});
  };
  emit(0.0);
  io::write_curve(out / "curve_0.csv", curve, 0.0, lambda);
  res.snapshots = 1;

  try {
    double Lprev = L0;
    for (int k = 1; k <= total_steps; ++k) {
      CurveStep stepres = curve.stepped(dt, mode);
      curve = std::move(stepres.curve);
      lambda = stepres.lambda;
      const double t = k * dt;
      emit(t);
      const double L = curve.length();
      res.perimeter_gain_max = std::max(res.perimeter_gain_max, L - Lprev);
      res.area_drift_rel = std::max(res.area_drift_rel, std::abs(curve.area() - A0) / A0);
      if (L - Lprev > defaults::kPerimeterSlack * L0) {
        res.status = {false, "perimeter increased at t=" + std::to_string(t)};
        break;
      }
      if (mode == TrackMode::Projected &&
          std::abs(curve.area() - A0) / A0 > defaults::kAreaTolProjected) {
        res.status = {false, "projected area drift at t=" + std::to_string(t)};
        break;
      }
      Lprev = L;
      if (k % steps_per_snap == 0) {
        io::write_curve(out / ("curve_" + std::to_string(k / steps_per_snap) + ".csv"), curve, t,
                        lambda);
        ++res.snapshots;
      }
    }
  } catch (const TopologyError& e) {
    res.status = {false, e.what()};
  }
  csv.close();
  res.isoperimetric_final =
      curve.length() * curve.length() / (4.0 * M_PI * curve.area()) - 1.0;

  json extra;
  extra["L0"] = L0;
  extra["A0"] = A0;
  extra["dt"] = dt;
  extra["ok"] = res.status.ok;
  write_manifest(out, cfg, extra);
  return res;
}

RunStatus calibrate_files(const fs::path& curve_csv, const fs::path& velocity_file,
                          const fs::path& out, int grid_n, double side, double delta) {
  fs::create_directories(out);
  io::CurveSnapshot snap = io::read_curve(curve_csv);

  std::vector<double> v;
  {
    io::CsvTable t = io::read_csv(velocity_file);
    for (const auto& row : t.rows) v.push_back(row.at(0));
  }
  if (static_cast<int>(v.size()) != snap.curve.size())
    return {false, "calibrate: velocity column length " + std::to_string(v.size()) +
                       " does not match curve nodes " + std::to_string(snap.curve.size())};

  PeriodicGrid grid(grid_n, side);
  Calibration cal = build_calibration(snap.curve, v, grid, delta, snap.t);
  CalibrationResiduals r = verify_static(cal, snap.curve);

  io::write_field(out / "xi_x.bin", cal.xi.x, "xi_x", snap.t);
  io::write_field(out / "xi_y.bin", cal.xi.y, "xi_y", snap.t);
  io::write_field(out / "B_x.bin", cal.B.x, "B_x", snap.t);
  io::write_field(out / "B_y.bin", cal.B.y, "B_y", snap.t);
  io::write_field(out / "theta.bin", cal.theta, "theta", snap.t);

  json j;
  j["lambda_star"] = cal.lambda_star;
  j["delta"] = cal.delta;
  j["has_B"] = cal.has_B;
  j["version"] = defaults::kVersion;
  j["residuals"]["div_B"] = r.div_B;
  j["residuals"]["tangential_B"] = r.tangential_B;
  j["residuals"]["geometric"] = r.geometric;
  j["residuals"]["geometric_on_interface"] = r.geometric_on_interface;
  j["residuals"]["shortness_slack"] = r.shortness_slack;
  j["residuals"]["theta_coercivity"] = r.theta_coercivity;
  j["residuals"]["theta_sign_violations"] = r.theta_sign_violations;
  j["residuals"]["theta_c"] = r.theta_c;
  j["residuals"]["theta_C"] = r.theta_C;
  io::write_json(out / "calibration.json", j);

  const bool ok = r.shortness_slack <= defaults::kPointwiseSlack &&
                  r.theta_coercivity <= defaults::kPointwiseSlack &&
                  r.theta_sign_violations == 0;
  return {ok, ok ? "" : "calibration inequalities violated"};
}

namespace {

struct PhaseSnapshot {
  PhaseFieldState state;
  double lambda = 0.0;
  double de_giorgi_residual = 0.0;
};

PhaseSnapshot load_phase_snapshot(const fs::path& dir, int index) {
  const fs::path bin = dir / ("u_" + std::to_string(index) + ".bin");
  const json side = io::read_sidecar(bin);
  PhaseSnapshot s;
  s.state.u = io::read_field(bin);
  s.state.u_hat = to_spectrum(s.state.u);
  s.state.t = side.at("time").get<double>();
  s.state.eps = side.at("eps").get<double>();
  s.state.alpha = side.at("alpha").get<double>();
  s.state.m0 = side.at("m0").get<double>();
  s.lambda = side.at("lambda").get<double>();
  s.de_giorgi_residual = side.value("de_giorgi_residual", 0.0);
  return s;
}

}  // namespace

CompareResult compare(const RunConfig& cfg, const fs::path& phase_dir, const fs::path& track_dir,
                      const fs::path& out) {
  validate(cfg);
  fs::create_directories(out);
  CompareResult res;

  const json pm = io::read_json(phase_dir / "manifest.json");
  const json tm = io::read_json(track_dir / "manifest.json");
  if (pm.at("config").at("init") != tm.at("config").at("init")) {
    res.status = {false, "compare: phase and track runs have different initial shapes"};
    return res;
  }
  const double snap_every = pm.at("config").at("phase").at("snapshot_every").get<double>();
  const double dt_phase = pm.at("dt").get<double>();

  std::vector<double> times = cfg.compare_times;
  if (times.empty()) {
    const double t_end = pm.at("config").at("phase").at("t_end").get<double>();
    for (double t = 0.0; t <= t_end + 1e-12; t += snap_every) times.push_back(t);
  }

  std::vector<std::string> cols = {"t", "E_rel", "E_rel_alt", "E_bulk", "symdiff_area"};
  for (int i = 1; i <= 7; ++i) {
    cols.push_back("coerciv" + std::to_string(i) + "_lhs");
    cols.push_back("coerciv" + std::to_string(i) + "_rhs");
  }
  io::CsvWriter csv(out / "comparison.csv", cols);

  std::vector<double> lambdas, lambda_stars;
  json violations = json::array();
  for (double t : times) {
    const double idx_f = t / snap_every;
    const int idx = static_cast<int>(std::round(idx_f));
    if (std::abs(idx_f - idx) * snap_every > defaults::kCompareTimeTolFactor * dt_phase) {
      res.status = {false, "compare: time " + std::to_string(t) +
                               " misaligned with the snapshot grid"};
      return res;
    }
    PhaseSnapshot ps = load_phase_snapshot(phase_dir, idx);
    io::CurveSnapshot ts = io::read_curve(track_dir / ("curve_" + std::to_string(idx) + ".csv"));
    if (std::abs(ps.state.t - t) > defaults::kCompareTimeTolFactor * dt_phase ||
        std::abs(ts.t - t) > defaults::kCompareTimeTolFactor * dt_phase) {
      res.status = {false, "compare: snapshot times misaligned at t=" + std::to_string(t)};
      return res;
    }

    const CurveGeometry& g = ts.curve.geometry();
    std::vector<double> v(ts.curve.size());
    for (int i = 0; i < ts.curve.size(); ++i) v[i] = g.kappa[i] - ts.lambda;
    Calibration cal = build_calibration(ts.curve, v, ps.state.u.grid, cfg.delta, t);

    ScalarField rhs = rhs_field(ps.state, ps.lambda);
    VarifoldProxy proxy = varifold_proxy(ps.state, rhs, ps.lambda);
    EntropyReport rep = coercivity_report(proxy, cal, ps.state.u);
    rep.t = t;
    rep.de_giorgi_residual = ps.de_giorgi_residual;

    std::vector<double> cells = {t, rep.e_rel, rep.e_rel_alt, rep.e_bulk, rep.symdiff_area};
    for (int i = 0; i < 7; ++i) {
      cells.push_back(rep.coercivity[i].lhs);
      cells.push_back(rep.coercivity[i].rhs);
    }
    csv.row(cells);
    if (rep.violations > 0) {
      json vio;
      vio["t"] = t;
      vio["count"] = rep.violations;
      violations.push_back(vio);
    }
    res.reports.push_back(std::move(rep));
    lambdas.push_back(ps.lambda);
    lambda_stars.push_back(cal.lambda_star);
  }
  csv.close();

  res.summary = stability_monitor(res.reports, lambdas, lambda_stars);
  json sj;
  sj["gronwall_rate"] = res.summary.rate;
  sj["c_fit"] = res.summary.c_fit;
  sj["ratio_final"] = res.summary.ratio_final;
  sj["ratio_max"] = res.summary.ratio_max;
  sj["x_total"] = res.summary.x_total;
  sj["version"] = defaults::kVersion;
  io::write_json(out / "summary.json", sj);
  io::write_json(out / "violations.json", violations);
  if (!violations.empty()) res.status = {false, "compare: coercivity violations recorded"};
  return res;
}

SweepResult sweep(const RunConfig& cfg, const fs::path& out, int jobs) {
  validate(cfg);
  if (cfg.eps_list.empty()) throw ConfigError("sweep: key 'sweep.eps_list' must be nonempty");
  fs::create_directories(out);
  SweepResult res;

  RunConfig track_cfg = cfg;
  TrackResult tr = track(track_cfg, out / "track");
  if (!tr.status.ok) {
    res.status = tr.status;
    return res;
  }

  std::vector<int> grids = cfg.grid_list.empty() ? std::vector<int>{cfg.grid_n} : cfg.grid_list;
  struct Member {
    double eps;
    int grid_n;
  };
  std::vector<Member> members;
  for (int g : grids)
    for (double e : cfg.eps_list) members.push_back({e, g});

  res.table.assign(members.size(), SweepRow{});
  std::vector<std::string> errors(members.size());
  std::mutex err_mutex;

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int nthreads = std::min<int>(jobs > 0 ? jobs : std::max(1, hw),
                                     static_cast<int>(members.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= members.size()) return;
      const Member m = members[i];
      SweepRow row;
      row.eps = m.eps;
      row.grid_n = m.grid_n;
      try {
        RunConfig mc = cfg;
        mc.eps = m.eps;
        mc.grid_n = m.grid_n;
        mc.dt = 0.0;  // per-eps rule
        char name[64];
        std::snprintf(name, sizeof name, "eps_%g_n_%d", m.eps, m.grid_n);
        const fs::path mdir = out / name;
        SimulateResult sim = simulate(mc, mdir / "phase");
        if (!sim.status.ok) throw std::runtime_error(sim.status.message);
        CompareResult cmp = compare(mc, mdir / "phase", out / "track", mdir / "compare");
        if (!cmp.status.ok) throw std::runtime_error(cmp.status.message);
        row.e_s_final = sim.ledger.back().e_s;
        row.volume_drift_max = sim.volume_drift_max;
        row.drift_bound = sim.drift_bound;
        row.symdiff_final = cmp.reports.back().symdiff_area;
        row.e_rel_final = cmp.reports.back().e_rel;
        row.ok = row.volume_drift_max <= defaults::kDriftSlackFactor * row.drift_bound;
        if (!row.ok) throw std::runtime_error("sweep member: drift bound violated");
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        errors[i] = e.what();
      }
      res.table[i] = row;
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  io::CsvWriter csv(out / "table.csv", {"eps", "grid_n", "E_S_final", "volume_drift_max",
                                        "drift_bound", "symdiff_area", "E_rel"});
  for (const SweepRow& r : res.table)
    csv.row({r.eps, static_cast<double>(r.grid_n), r.e_s_final, r.volume_drift_max,
             r.drift_bound, r.symdiff_final, r.e_rel_final});
  csv.close();

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      res.status = {false, "sweep member eps=" + std::to_string(members[i].eps) + ": " +
                               errors[i]};
      return res;  // partial table already written
    }
  }
  return res;
}

}  // namespace vpmcf
