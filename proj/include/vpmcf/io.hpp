#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpmcf/curve.hpp"
#include "vpmcf/grid.hpp"

namespace vpmcf::io {

using json = nlohmann::json;

/// Binary field dump: flat little-endian float64, row-major, with a JSON
/// sidecar {n_x, n_y, side, name, time, ...extra}. Round-trips bit-exactly.
void write_field(const std::filesystem::path& bin_path, const ScalarField& f,
                 const std::string& name, double time, const json& extra = json::object());
ScalarField read_field(const std::filesystem::path& bin_path);
json read_sidecar(const std::filesystem::path& bin_path);

/// Deterministic CSV with %.17g cells.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void close();

 private:
  std::string path_;
  FILE* f_ = nullptr;
  std::size_t ncols_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 if absent
};
CsvTable read_csv(const std::filesystem::path& path);

/// Curve snapshot: x,y per node plus sidecar {t, N, L, A, lambda}.
void write_curve(const std::filesystem::path& csv_path, const Curve& c, double t, double lambda);
struct CurveSnapshot {
  Curve curve;
  double t = 0.0;
  double lambda = 0.0;
};
CurveSnapshot read_curve(const std::filesystem::path& csv_path);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

std::string format_double(double v);  // the %.17g cell format

}  // namespace vpmcf::io
