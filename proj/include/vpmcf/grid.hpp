#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpmcf {

/// Square periodic grid on the flat torus [0, side)^2 with cell-centered
/// samples. n must be a power of two (FFT plans and the x2 refinement ladder
/// assume it).
struct PeriodicGrid {
  int n = 0;
  double side = 1.0;

  PeriodicGrid() = default;
  PeriodicGrid(int n_, double side_) : n(n_), side(side_) {
    if (n <= 0 || (n & (n - 1)) != 0)
      throw std::invalid_argument("PeriodicGrid: n must be a positive power of two, got " +
                                  std::to_string(n));
    if (!(side > 0.0) || !std::isfinite(side))
      throw std::invalid_argument("PeriodicGrid: side must be positive and finite");
  }

  double h() const { return side / n; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * n + ix; }
  double x(int ix) const { return (ix + 0.5) * h(); }
  double y(int iy) const { return (iy + 0.5) * h(); }

  bool operator==(const PeriodicGrid& o) const { return n == o.n && side == o.side; }
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }
};

/// Real samples at cell centers, row-major: values[iy*n + ix].
struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  double& operator()(int ix, int iy) { return values[grid.idx(ix, iy)]; }
  double operator()(int ix, int iy) const { return values[grid.idx(ix, iy)]; }

  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Two-component vector field stored as separate scalar components.
struct VectorField {
  ScalarField x, y;

  VectorField() = default;
  explicit VectorField(const PeriodicGrid& g) : x(g), y(g) {}

  const PeriodicGrid& grid() const { return x.grid; }
  bool finite() const { return x.finite() && y.finite(); }
};

/// Throws with a located diagnostic if the field holds a non-finite entry.
void require_finite(const ScalarField& f, const std::string& what);

/// h^2 * sum of samples; the midpoint rule, spectrally accurate for smooth
/// periodic integrands and exact on Fourier modes below Nyquist.
inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.h() * f.grid.h();
}

inline void require_finite(const ScalarField& f, const std::string& what) {
  const auto& v = f.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      const int n = f.grid.n;
      throw std::invalid_argument(what + ": non-finite value " + std::to_string(v[i]) +
                                  " at cell (" + std::to_string(static_cast<int>(i) % n) + "," +
                                  std::to_string(static_cast<int>(i) / n) + ")");
    }
  }
}

}  // namespace vpmcf
