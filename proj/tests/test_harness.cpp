#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vpmcf/defaults.hpp"
#include "vpmcf/harness.hpp"
#include "vpmcf/io.hpp"

using namespace vpmcf;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "vpmcf_harness" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

RunConfig small_circle_config() {
  RunConfig c;
  c.grid_n = 128;
  c.eps = 0.06;
  c.t_end = 0.02;
  c.snapshot_every = 0.01;
  c.multiplier = "projected";
  c.shape = "circle";
  c.track_n = 128;
  return c;
}

}  // namespace

TEST_CASE("simulate writes the pinned metrics schema and snapshots") {
  RunConfig c;
  c.grid_n = 128;
  c.eps = 0.06;
  c.t_end = 0.02;
  c.snapshot_every = 0.01;
  c.shape = "strip";
  const fs::path out = fresh_dir("sim_strip");
  SimulateResult r = simulate(c, out);
  CHECK(r.status.ok);
  CHECK(r.snapshots >= 2);

  io::CsvTable t = io::read_csv(out / "metrics.csv");
  CHECK(t.columns == std::vector<std::string>{"t", "E_S", "E_P", "E_total", "lambda_eps",
                                              "mass_phi", "diss_velocity", "diss_curvature",
                                              "discrepancy_max", "de_giorgi_residual"});
  CHECK(t.rows.size() >= 100);
  const int et = t.column("E_total");
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    CHECK(t.rows[i][et] <= t.rows[i - 1][et] + defaults::kEnergySlack * t.rows[0][et]);

  const io::json m = io::read_json(out / "manifest.json");
  CHECK(m.at("version") == defaults::kVersion);
  CHECK(m.at("config").at("phase").at("eps") == 0.06);
  CHECK(m.at("ok") == true);

  // snapshot sidecar carries what compare needs
  const io::json side = io::read_sidecar(out / "u_1.bin");
  CHECK(side.at("eps") == 0.06);
  CHECK(side.contains("lambda"));
  CHECK(side.contains("m0"));
}

TEST_CASE("simulate output is byte-identical across runs") {
  RunConfig c = small_circle_config();
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  CHECK(simulate(c, a).status.ok);
  CHECK(simulate(c, b).status.ok);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "u_2.bin") == slurp(b / "u_2.bin"));
  CHECK(!slurp(a / "metrics.csv").empty());
}

TEST_CASE("simulate rejects an under-resolved eps before stepping") {
  RunConfig c = small_circle_config();
  c.eps = 0.01;  // 3h = 0.0234 on the 128 grid
  CHECK_THROWS_AS(simulate(c, fresh_dir("sim_bad")), std::invalid_argument);
}

TEST_CASE("track writes curve snapshots and its metrics schema") {
  RunConfig c = small_circle_config();
  c.shape = "ellipse";
  c.a = 0.30;
  c.b = 0.20;
  const fs::path out = fresh_dir("track_ell");
  TrackResult r = track(c, out);
  CHECK(r.status.ok);
  CHECK(r.snapshots >= 2);
  CHECK(r.area_drift_rel < defaults::kAreaTolProjected);
  CHECK(r.perimeter_gain_max <= 0.0 + defaults::kPerimeterSlack);

  io::CsvTable t = io::read_csv(out / "metrics.csv");
  CHECK(t.columns ==
        std::vector<std::string>{"t", "L", "A", "lambda", "max_kappa", "min_kappa"});
  io::CurveSnapshot s = io::read_curve(out / "curve_1.csv");
  CHECK(s.curve.size() == 128);
  CHECK(s.t == doctest::Approx(0.01));

  c.shape = "strip";
  CHECK_THROWS_AS(track(c, fresh_dir("track_strip")), std::invalid_argument);
}

TEST_CASE("compare pairs the runs and writes reports") {
  RunConfig c = small_circle_config();
  const fs::path sim_out = fresh_dir("cmp_phase");
  const fs::path trk_out = fresh_dir("cmp_track");
  const fs::path cmp_out = fresh_dir("cmp_out");
  REQUIRE(simulate(c, sim_out).status.ok);
  REQUIRE(track(c, trk_out).status.ok);
  c.compare_times = {0.0, 0.01, 0.02};
  CompareResult r = compare(c, sim_out, trk_out, cmp_out);
  CHECK(r.status.ok);
  REQUIRE(r.reports.size() == 3);
  for (const EntropyReport& rep : r.reports) {
    CHECK(rep.violations == 0);
    CHECK(rep.e_rel >= 0.0);
    CHECK(rep.e_bulk >= 0.0);
    CHECK(rep.symdiff_area < 0.05);
  }
  CHECK(std::isfinite(r.summary.c_fit));

  io::CsvTable t = io::read_csv(cmp_out / "comparison.csv");
  CHECK(t.column("E_rel") == 1);
  CHECK(t.column("coerciv7_rhs") == static_cast<int>(t.columns.size()) - 1);
  CHECK(t.rows.size() == 3);

  // a pairing against a different shape is rejected
  RunConfig other = c;
  other.shape = "ellipse";
  const fs::path trk2 = fresh_dir("cmp_track2");
  REQUIRE(track(other, trk2).status.ok);
  CompareResult bad = compare(c, sim_out, trk2, fresh_dir("cmp_bad"));
  CHECK(!bad.status.ok);
  CHECK(bad.status.message.find("shape") != std::string::npos);
}

TEST_CASE("calibrate consumes a curve snapshot and a velocity column") {
  const fs::path dir = fresh_dir("calibrate");
  Curve circle = Curve::circle({0.5, 0.5}, 0.25, 256);
  io::write_curve(dir / "curve.csv", circle, 0.0, circle.lambda_classical());
  {
    io::CsvWriter w(dir / "v.csv", {"v"});
    for (int i = 0; i < circle.size(); ++i) {
      const Vec2 p = circle.points()[i] - Vec2{0.5, 0.5};
      w.row({std::cos(2.0 * std::atan2(p.y, p.x))});
    }
    w.close();
  }
  RunStatus st = calibrate_files(dir / "curve.csv", dir / "v.csv", dir / "out", 128, 1.0, 0.0);
  CHECK(st.ok);
  for (const char* f : {"xi_x.bin", "xi_y.bin", "B_x.bin", "B_y.bin", "theta.bin"})
    CHECK(fs::exists(dir / "out" / f));
  const io::json j = io::read_json(dir / "out" / "calibration.json");
  CHECK(j.at("has_B") == true);
  CHECK(j.at("lambda_star").get<double>() < 0.0);
  CHECK(j.at("delta").get<double>() > 0.0);
  CHECK(j.at("residuals").at("theta_sign_violations") == 0);
  ScalarField xi_x = io::read_field(dir / "out" / "xi_x.bin");
  CHECK(xi_x.grid.n == 128);

  // mismatched velocity column length is an error
  {
    io::CsvWriter w(dir / "short.csv", {"v"});
    w.row({0.0});
    w.close();
  }
  RunStatus bad = calibrate_files(dir / "curve.csv", dir / "short.csv", dir / "out2", 128, 1.0, 0.0);
  CHECK(!bad.ok);
}

TEST_CASE("sweep builds the table and enforces the drift bound") {
  RunConfig c = small_circle_config();
  c.eps_list = {0.08, 0.06};
  const fs::path out = fresh_dir("sweep");
  SweepResult r = sweep(c, out, 2);
  CHECK(r.status.ok);
  REQUIRE(r.table.size() == 2);
  for (const SweepRow& row : r.table) {
    CHECK(row.ok);
    CHECK(row.volume_drift_max <= defaults::kDriftSlackFactor * row.drift_bound);
    CHECK(row.e_s_final > 0.0);
  }
  // drift bound scales as eps^(alpha/2) on a shared E0 up to init differences
  CHECK(r.table[0].drift_bound > r.table[1].drift_bound);

  io::CsvTable t = io::read_csv(out / "table.csv");
  CHECK(t.rows.size() == 2);
  CHECK(t.column("drift_bound") == 4);

  RunConfig empty = small_circle_config();
  CHECK_THROWS_AS(sweep(empty, fresh_dir("sweep_empty")), ConfigError);
}
