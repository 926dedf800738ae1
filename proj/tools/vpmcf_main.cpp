// Command-line front end: simulate / track / calibrate / compare / sweep.
// Exit code 0 only when the run completed with every invariant intact.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>

#include "vpmcf/harness.hpp"

namespace {

std::string resolve_out(const std::string& cli_out, const vpmcf::RunConfig& cfg) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("VPMCF_OUT")) return env;
  throw vpmcf::ConfigError("no output directory: pass --out or set output.dir");
}

int finish(const vpmcf::RunStatus& st) {
  if (!st.ok) {
    std::fprintf(stderr, "FAILED: %s\n", st.message.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volume-preserving curvature flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, phase_dir, track_dir, curve_path, velocity_path;
  int grid_n = 256;
  double side = 1.0, delta = 0.0;
  int jobs = 0;

  CLI::App* sim = app.add_subcommand("simulate", "phase-field run with full dissipation ledger");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory");

  CLI::App* trk = app.add_subcommand("track", "front-tracking run of V = kappa - lambda");
  trk->add_option("--config", config_path, "config file")->required();
  trk->add_option("--out", out_dir, "output directory");

  CLI::App* cal = app.add_subcommand("calibrate", "build and certify a calibration");
  cal->add_option("--curve", curve_path, "curve snapshot CSV")->required();
  cal->add_option("--velocity", velocity_path, "per-node normal speed column")->required();
  cal->add_option("--out", out_dir, "output directory")->required();
  cal->add_option("--grid-n", grid_n, "grid cells per axis");
  cal->add_option("--side", side, "torus edge length");
  cal->add_option("--delta", delta, "tube radius (0 = auto)");

  CLI::App* cmp = app.add_subcommand("compare", "weak-strong comparison of two runs");
  cmp->add_option("--config", config_path, "config file")->required();
  cmp->add_option("--phase", phase_dir, "simulate output directory")->required();
  cmp->add_option("--track", track_dir, "track output directory")->required();
  cmp->add_option("--out", out_dir, "output directory");

  CLI::App* swp = app.add_subcommand("sweep", "eps ladder: simulate + compare per member");
  swp->add_option("--config", config_path, "config file")->required();
  swp->add_option("--out", out_dir, "output directory");
  swp->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      vpmcf::RunConfig cfg = vpmcf::parse_config_file(config_path);
      return finish(vpmcf::simulate(cfg, resolve_out(out_dir, cfg)).status);
    }
    if (*trk) {
      vpmcf::RunConfig cfg = vpmcf::parse_config_file(config_path);
      return finish(vpmcf::track(cfg, resolve_out(out_dir, cfg)).status);
    }
    if (*cal) {
      return finish(vpmcf::calibrate_files(curve_path, velocity_path, out_dir, grid_n, side, delta));
    }
    if (*cmp) {
      vpmcf::RunConfig cfg = vpmcf::parse_config_file(config_path);
      return finish(vpmcf::compare(cfg, phase_dir, track_dir, resolve_out(out_dir, cfg)).status);
    }
    if (*swp) {
      vpmcf::RunConfig cfg = vpmcf::parse_config_file(config_path);
      return finish(vpmcf::sweep(cfg, resolve_out(out_dir, cfg), jobs).status);
    }
  } catch (const vpmcf::ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
