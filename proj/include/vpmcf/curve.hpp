#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vpmcf {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

/// Raised when a front-tracking step would change topology.
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-node geometry of a closed curve. Curvature is positive on convex arcs
/// (inner-normal convention); normals point into the enclosed region.
struct CurveGeometry {
  double length = 0.0;
  double area = 0.0;
  std::vector<double> kappa;
  std::vector<Vec2> normal;
  std::vector<double> ds;  // arclength weight per node, sums to length

  double max_kappa() const;
  double min_kappa() const;
};

enum class TrackMode { Analytic, Projected };

struct CurveStep;  // stepped() result, defined below

/// Oriented simple closed polyline, counterclockwise. Invariants (checked at
/// construction): at least 16 nodes, positive signed area, no self
/// intersection, no degenerate edges.
class Curve {
 public:
  explicit Curve(std::vector<Vec2> pts);

  static Curve circle(Vec2 center, double radius, int n);
  /// Equal-arclength nodes on an axis-aligned ellipse.
  static Curve ellipse(Vec2 center, double a, double b, int n);

  const std::vector<Vec2>& points() const { return pts_; }
  int size() const { return static_cast<int>(pts_.size()); }

  const CurveGeometry& geometry() const;
  double length() const { return geometry().length; }
  double area() const { return geometry().area; }
  double min_spacing() const;
  double mean_spacing() const;

  /// lambda_I = (sum kappa_i ds_i) / L; equals 2 pi / L up to discretization
  /// for any simple closed curve.
  double lambda_classical() const;

  /// int (kappa - lambda)^2 ds, the perimeter dissipation rate of V = kappa - lambda.
  double dissipation(double lambda) const;

  /// One explicit step of V = kappa - lambda along inner normals, followed by
  /// arclength resampling. Projected mode picks lambda so the polygon area is
  /// preserved exactly (and re-enforces it after resampling); analytic mode
  /// uses lambda_classical.
  CurveStep stepped(double dt, TrackMode mode) const;

  /// n equal-arclength nodes on the periodic cubic spline through the current
  /// nodes. Rejects n < 16.
  Curve resampled(int n) const;

  Curve mirrored_x(double axis) const;
  Curve scaled(double factor, Vec2 about) const;

  /// Closest point on the polyline under periodic wrapping of the query
  /// displacement (valid while the curve stays clear of half-domain scales).
  Vec2 closest_point(Vec2 q, double side, int* segment = nullptr) const;
  double distance(Vec2 q, double side) const;
  /// Even-odd test in unwrapped coordinates.
  bool contains(Vec2 q) const;

 private:
  std::vector<Vec2> pts_;
  mutable std::optional<CurveGeometry> geo_;

  void validate() const;
};

struct CurveStep {
  Curve curve;
  double lambda;
};

/// Exact-area correction: moves every node by the same signed distance along
/// its inner normal so that the polygon area equals target (quadratic solve,
/// machine precision). Used by the projected stepping mode.
Curve enforce_area(const Curve& c, double target_area);

bool polyline_self_intersects(const std::vector<Vec2>& pts);

}  // namespace vpmcf
