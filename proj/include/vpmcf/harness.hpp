#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vpmcf/config.hpp"
#include "vpmcf/entropy.hpp"
#include "vpmcf/phasefield.hpp"

namespace vpmcf {

/// Run outcome: ok means every invariant held. The message carries the first
/// violation for the CLI exit path.
struct RunStatus {
  bool ok = true;
  std::string message;
};

struct SimulateResult {
  RunStatus status;
  EnergyLedger ledger;
  int snapshots = 0;
  double volume_drift_max = 0.0;
  double drift_bound = 0.0;
  double discrepancy_run_max = -1e300;
};

/// Phase-field run: metrics.csv (t, E_S, E_P, E_total, lambda_eps, mass_phi,
/// diss_velocity, diss_curvature, discrepancy_max, de_giorgi_residual),
/// snapshots u_<k>.bin, manifest.json. Invariants per step: energy
/// monotonicity (slack 1e-8 E0), the volume-drift bound, finite state.
SimulateResult simulate(const RunConfig& cfg, const std::filesystem::path& out);

struct TrackResult {
  RunStatus status;
  int snapshots = 0;
  double area_drift_rel = 0.0;
  double perimeter_gain_max = 0.0;
  double isoperimetric_final = 0.0;
};

/// Front-tracking run: metrics.csv (t, L, A, lambda, max_kappa, min_kappa),
/// snapshots curve_<k>.csv, manifest.json.
TrackResult track(const RunConfig& cfg, const std::filesystem::path& out);

/// Builds and certifies a calibration from a curve snapshot and a one-column
/// velocity file; writes xi/B/theta fields plus calibration.json with
/// lambda_star, delta and the residuals.
RunStatus calibrate_files(const std::filesystem::path& curve_csv,
                          const std::filesystem::path& velocity_file,
                          const std::filesystem::path& out, int grid_n, double side,
                          double delta);

struct CompareResult {
  RunStatus status;
  std::vector<EntropyReport> reports;
  StabilitySummary summary;
};

/// Pairs phase and tracking artifacts at the configured compare times,
/// builds per-time calibrations from the tracked curve, and writes
/// comparison.csv, violations.json and summary.json.
CompareResult compare(const RunConfig& cfg, const std::filesystem::path& phase_dir,
                      const std::filesystem::path& track_dir,
                      const std::filesystem::path& out);

struct SweepRow {
  double eps = 0.0;
  int grid_n = 0;
  double e_s_final = 0.0;
  double volume_drift_max = 0.0;
  double drift_bound = 0.0;
  double symdiff_final = 0.0;
  double e_rel_final = 0.0;
  bool ok = false;
};

struct SweepResult {
  RunStatus status;
  std::vector<SweepRow> table;
};

/// One tracked oracle, one phase run + comparison per (eps, grid) member;
/// members execute on worker threads with isolated output directories.
/// A member failure aborts the sweep but preserves the partial table.
SweepResult sweep(const RunConfig& cfg, const std::filesystem::path& out, int jobs = 0);

/// Shape factory shared by the drivers: the initial interface of a config
/// (circle or ellipse; strips have no curve and are rejected).
Curve initial_curve(const RunConfig& cfg, int nodes);

}  // namespace vpmcf
