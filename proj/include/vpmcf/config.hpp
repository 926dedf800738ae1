#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace vpmcf {

/// Resolved run configuration. The on-disk format is a flat key tree,
/// order-insensitive, one `section.key = value` per line, `#` comments:
///
///   grid.n = 256              power of two
///   grid.side = 1.0
///   phase.eps = 0.04
///   phase.alpha = 0.5
///   phase.dt = 0              0 selects eps^2 * dt_fraction / 18
///   phase.t_end = 0.25
///   phase.snapshot_every = 0.05
///   phase.multiplier = relaxed | projected
///   init.shape = circle | ellipse | strip
///   init.cx init.cy init.r    circle
///   init.a init.b             ellipse semi-axes (center cx, cy)
///   init.y0 init.y1           strip bounds
///   track.n = 256
///   track.dt = 0              0 selects 0.8 * c_ft * spacing^2
///   track.mode = projected | analytic
///   calib.delta = 0           0 selects the default tube radius
///   compare.times = 0,0.05    comma list; empty = all snapshot times
///   sweep.eps_list = 0.08,0.04,0.02
///   sweep.grid_list = 256
///   output.dir = runs/x       optional; --out overrides
struct RunConfig {
  int grid_n = 256;
  double side = 1.0;

  double eps = 0.04;
  double alpha = 0.5;
  double dt = 0.0;
  double t_end = 0.25;
  double snapshot_every = 0.05;
  std::string multiplier = "relaxed";

  std::string shape = "circle";
  double cx = 0.5, cy = 0.5;
  double r = 0.25;
  double a = 0.30, b = 0.20;
  double y0 = 0.3, y1 = 0.7;

  int track_n = 256;
  double track_dt = 0.0;
  std::string track_mode = "projected";

  double delta = 0.0;
  std::vector<double> compare_times;

  std::vector<double> eps_list;
  std::vector<int> grid_list;

  std::string out_dir;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Rejects non-positive physical parameters, alpha outside (0,1), unknown
/// enum values, shapes without torus margin, and non-decreasing eps lists.
void validate(const RunConfig& c);

nlohmann::json to_json(const RunConfig& c);

}  // namespace vpmcf
