#include "vpmcf/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vpmcf::io {

static_assert(std::endian::native == std::endian::little,
              "field dumps are little-endian; add byte swapping for this platform");

namespace {

std::filesystem::path sidecar_path(std::filesystem::path p) { return p.replace_extension(".json"); }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field(const std::filesystem::path& bin_path, const ScalarField& f,
                 const std::string& name, double time, const json& extra) {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field: cannot open " + bin_path.string());
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_field: short write to " + bin_path.string());
  json side = extra;
  side["n_x"] = f.grid.n;
  side["n_y"] = f.grid.n;
  side["side"] = f.grid.side;
  side["name"] = name;
  side["time"] = time;
  write_json(sidecar_path(bin_path), side);
}

ScalarField read_field(const std::filesystem::path& bin_path) {
  const json side = read_sidecar(bin_path);
  const int nx = side.at("n_x").get<int>();
  const int ny = side.at("n_y").get<int>();
  if (nx != ny) throw std::runtime_error("read_field: non-square grid in " + bin_path.string());
  ScalarField f(PeriodicGrid(nx, side.at("side").get<double>()));
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + bin_path.string());
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
    throw std::runtime_error("read_field: short read from " + bin_path.string());
  return f;
}

json read_sidecar(const std::filesystem::path& bin_path) {
  return read_json(sidecar_path(bin_path));
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : path_(path.string()), ncols_(columns.size()) {
  f_ = std::fopen(path_.c_str(), "w");
  if (!f_) throw std::runtime_error("CsvWriter: cannot open " + path_);
  for (std::size_t i = 0; i < columns.size(); ++i)
    std::fprintf(f_, "%s%s", columns[i].c_str(), i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
  if (!f_) throw std::logic_error("CsvWriter: writer closed");
  if (values.size() != ncols_)
    throw std::invalid_argument("CsvWriter: expected " + std::to_string(ncols_) + " cells, got " +
                                std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, "%s%s", format_double(values[i]).c_str(), i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::close() {
  if (f_) {
    std::fclose(f_);
    f_ = nullptr;
  }
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (header) {
      t.columns = cells;
      header = false;
    } else {
      std::vector<double> row(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i) row[i] = std::stod(cells[i]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

void write_curve(const std::filesystem::path& csv_path, const Curve& c, double t, double lambda) {
  CsvWriter w(csv_path, {"x", "y"});
  for (const Vec2& p : c.points()) w.row({p.x, p.y});
  w.close();
  json side;
  side["t"] = t;
  side["N"] = c.size();
  side["L"] = c.length();
  side["A"] = c.area();
  side["lambda"] = lambda;
  write_json(sidecar_path(csv_path), side);
}

CurveSnapshot read_curve(const std::filesystem::path& csv_path) {
  CsvTable t = read_csv(csv_path);
  if (t.columns != std::vector<std::string>{"x", "y"})
    throw std::runtime_error("read_curve: unexpected columns in " + csv_path.string());
  std::vector<Vec2> pts(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) pts[i] = {t.rows[i][0], t.rows[i][1]};
  const json side = read_json(sidecar_path(csv_path));
  return CurveSnapshot{Curve(std::move(pts)), side.at("t").get<double>(),
                       side.at("lambda").get<double>()};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_json: cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace vpmcf::io
