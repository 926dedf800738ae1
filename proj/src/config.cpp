#include "vpmcf/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace vpmcf {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "grid.n") c.grid_n = to_int(key, val);
    else if (key == "grid.side") c.side = to_double(key, val);
    else if (key == "phase.eps") c.eps = to_double(key, val);
    else if (key == "phase.alpha") c.alpha = to_double(key, val);
    else if (key == "phase.dt") c.dt = to_double(key, val);
    else if (key == "phase.t_end") c.t_end = to_double(key, val);
    else if (key == "phase.snapshot_every") c.snapshot_every = to_double(key, val);
    else if (key == "phase.multiplier") c.multiplier = val;
    else if (key == "init.shape") c.shape = val;
    else if (key == "init.cx") c.cx = to_double(key, val);
    else if (key == "init.cy") c.cy = to_double(key, val);
    else if (key == "init.r") c.r = to_double(key, val);
    else if (key == "init.a") c.a = to_double(key, val);
    else if (key == "init.b") c.b = to_double(key, val);
    else if (key == "init.y0") c.y0 = to_double(key, val);
    else if (key == "init.y1") c.y1 = to_double(key, val);
    else if (key == "track.n") c.track_n = to_int(key, val);
    else if (key == "track.dt") c.track_dt = to_double(key, val);
    else if (key == "track.mode") c.track_mode = val;
    else if (key == "calib.delta") c.delta = to_double(key, val);
    else if (key == "compare.times") c.compare_times = to_list(key, val);
    else if (key == "sweep.eps_list") c.eps_list = to_list(key, val);
    else if (key == "sweep.grid_list") {
      for (double g : to_list(key, val)) c.grid_list.push_back(static_cast<int>(g));
    } else if (key == "output.dir") c.out_dir = val;
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string("config: key '") + key + "' must be positive");
  };
  if (c.grid_n <= 0 || (c.grid_n & (c.grid_n - 1)) != 0)
    throw ConfigError("config: key 'grid.n' must be a positive power of two");
  positive("grid.side", c.side);
  positive("phase.eps", c.eps);
  if (!(c.alpha > 0.0 && c.alpha < 1.0))
    throw ConfigError("config: key 'phase.alpha' must lie in (0,1)");
  if (c.dt < 0.0) throw ConfigError("config: key 'phase.dt' must be nonnegative");
  positive("phase.t_end", c.t_end);
  positive("phase.snapshot_every", c.snapshot_every);
  if (c.multiplier != "relaxed" && c.multiplier != "projected")
    throw ConfigError("config: key 'phase.multiplier' must be 'relaxed' or 'projected'");
  if (c.track_mode != "projected" && c.track_mode != "analytic")
    throw ConfigError("config: key 'track.mode' must be 'projected' or 'analytic'");
  if (c.track_n < 16) throw ConfigError("config: key 'track.n' must be at least 16");
  if (c.delta < 0.0) throw ConfigError("config: key 'calib.delta' must be nonnegative");

  const double m = 0.02 * c.side;  // torus margin for the tube and sign scans
  if (c.shape == "circle") {
    positive("init.r", c.r);
    if (c.cx - c.r < m || c.cx + c.r > c.side - m || c.cy - c.r < m || c.cy + c.r > c.side - m)
      throw ConfigError("config: key 'init.r' leaves no torus margin");
  } else if (c.shape == "ellipse") {
    positive("init.a", c.a);
    positive("init.b", c.b);
    if (c.cx - c.a < m || c.cx + c.a > c.side - m || c.cy - c.b < m || c.cy + c.b > c.side - m)
      throw ConfigError("config: keys 'init.a/init.b' leave no torus margin");
  } else if (c.shape == "strip") {
    if (!(c.y0 < c.y1) || c.y0 < m || c.y1 > c.side - m)
      throw ConfigError("config: keys 'init.y0/init.y1' must satisfy margin < y0 < y1 < side - margin");
  } else {
    throw ConfigError("config: key 'init.shape' must be circle, ellipse or strip");
  }

  if (!c.eps_list.empty()) {
    for (std::size_t i = 1; i < c.eps_list.size(); ++i)
      if (!(c.eps_list[i] < c.eps_list[i - 1]))
        throw ConfigError("config: key 'sweep.eps_list' must be strictly decreasing");
    for (double e : c.eps_list)
      if (!(e > 0.0)) throw ConfigError("config: key 'sweep.eps_list' entries must be positive");
  }
  for (int g : c.grid_list)
    if (g <= 0 || (g & (g - 1)) != 0)
      throw ConfigError("config: key 'sweep.grid_list' entries must be powers of two");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["grid"]["n"] = c.grid_n;
  j["grid"]["side"] = c.side;
  j["phase"]["eps"] = c.eps;
  j["phase"]["alpha"] = c.alpha;
  j["phase"]["dt"] = c.dt;
  j["phase"]["t_end"] = c.t_end;
  j["phase"]["snapshot_every"] = c.snapshot_every;
  j["phase"]["multiplier"] = c.multiplier;
  j["init"]["shape"] = c.shape;
  j["init"]["cx"] = c.cx;
  j["init"]["cy"] = c.cy;
  if (c.shape == "circle") j["init"]["r"] = c.r;
  if (c.shape == "ellipse") {
    j["init"]["a"] = c.a;
    j["init"]["b"] = c.b;
  }
  if (c.shape == "strip") {
    j["init"]["y0"] = c.y0;
    j["init"]["y1"] = c.y1;
  }
  j["track"]["n"] = c.track_n;
  j["track"]["dt"] = c.track_dt;
  j["track"]["mode"] = c.track_mode;
  j["calib"]["delta"] = c.delta;
  j["compare"]["times"] = c.compare_times;
  j["sweep"]["eps_list"] = c.eps_list;
  j["sweep"]["grid_list"] = c.grid_list;
  j["output"]["dir"] = c.out_dir;
  return j;
}

}  // namespace vpmcf
