#pragma once

#include <array>
#include <complex>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/grid.hpp"

namespace vpmcf {

/// Signed distance to a closed curve sampled on a periodic grid, positive
/// INSIDE the enclosed set, so the analytic gradient extends the inner unit
/// normal off the interface. Displacements are wrapped, which is valid while
/// the curve keeps a margin from half-domain scales.
struct SignedDistance {
  ScalarField s;          // signed distance, positive inside
  VectorField closest;    // nearest point on the polyline (polyline coordinates)
  VectorField normal;     // unit inner-normal extension (node normals, interpolated)
  ScalarField kappa_foot; // curvature at the foot point, interpolated
};

SignedDistance signed_distance(const Curve& curve, const PeriodicGrid& grid);

/// Scalar profiles of the calibration construction. All are C^2; the blends
/// on [delta/2, delta] use the quintic smoothstep. The _prime variants are
/// the exact derivatives (the transport verifier differentiates the
/// constructed fields analytically; spectral derivatives would amplify the
/// polyline's node-ray kinks by 1/h).
double smoothstep5(double x);                 // 0 -> 1 on [0,1], C^2 ends
double cutoff_zeta(double r, double delta);   // 1 - r^2, then descent to 0, <= 1-r^2
double cutoff_zeta_prime(double r, double delta);
double theta_trunc(double r, double delta);   // odd; r on [-d/2,d/2], saturates at delta
double theta_trunc_prime(double r, double delta);
double bump_h(double r, double delta);        // 1 on [-d/2,d/2], 0 outside (-d,d)
double bump_h_prime(double r, double delta);

/// Tube radius: kDeltaSafety * min(1/max kappa, reach estimate), capped by the
/// curve's margin to the fundamental-domain boundary.
double default_delta(const Curve& curve, double side);

/// xi = zeta(|s|) * (inner-normal extension); |xi| <= 1, xi = |xi| grad s.
VectorField build_xi(const SignedDistance& sd, double delta);

/// theta = -theta_trunc(s): negative inside, positive outside, zero on the curve.
ScalarField build_theta(const SignedDistance& sd, double delta);

/// lambda* = (1/L) * contour integral of div xi (spectral divergence sampled
/// bilinearly at the nodes). Equals -lambda_classical up to discretization.
double lambda_star(const Curve& curve, const VectorField& xi);

/// Stokes flow on the unit disc with Dirichlet boundary velocity g, solved as
/// a stream-function series psi = sum (a_n r^|n| + b_n r^(|n|+2)) e^(i n th),
/// divergence-free by construction and analytically continued to r <= 1 + collar.
class StokesDisc {
 public:
  /// Coefficients of the radial/tangential boundary velocity components,
  /// index layout n = -n_max..n_max at [n + n_max]. Throws if the net
  /// boundary flux (2 pi Re g_r[0]) exceeds the compatibility tolerance.
  StokesDisc(std::vector<std::complex<double>> g_radial,
             std::vector<std::complex<double>> g_tangential);

  /// Coefficients from equal-angle samples of the boundary velocity vector.
  static StokesDisc from_samples(const std::vector<Vec2>& g_samples);

  Vec2 velocity(Vec2 x) const;
  /// Exact Jacobian of the series: [0] dvx/dx, [1] dvx/dy, [2] dvy/dx, [3] dvy/dy.
  std::array<double, 4> velocity_gradient(Vec2 x) const;
  double pressure(Vec2 x) const;
  /// Term-by-term analytic divergence of the series (zero up to roundoff).
  double divergence(Vec2 x) const;
  /// Magnitude of the top octave of modes evaluated at the given radius;
  /// a tail above roundoff at the continuation radius signals undersmooth data.
  double tail_norm(double radius) const;
  /// Drops modes whose contribution at the continuation radius exceeds the
  /// cap (no valid continuation produces them); returns the boundary-scale
  /// magnitude of what was dropped.
  double band_limit(double radius, double cap);
  bool zero() const { return zero_; }

 private:
  int n_max_ = 0;
  bool zero_ = false;
  std::vector<std::complex<double>> a_, b_;  // stream-function coefficients
};

/// Velocity extension B = bump(s) * v with v the Stokes solution transplanted
/// from the area-matched circle, plus the unbumped velocity and its exact
/// Jacobian on the tube (used by the analytic transport verifier). Supported
/// when the curve's radial deviation from that circle is below
/// kRadialDeviationMax; V_I must have zero mean (volume-preserving flow).
/// Boundary data below kZeroVelocityTol gives B = 0.
struct VelocityExtension {
  VectorField B;
  VectorField v;                      // Stokes velocity without the bump
  ScalarField dvxx, dvyx, dvxy, dvyy; // grad v in physical coordinates
};
VelocityExtension build_B_full(const Curve& curve, const std::vector<double>& v_normal,
                               const SignedDistance& sd, double delta);
VectorField build_B(const Curve& curve, const std::vector<double>& v_normal,
                    const SignedDistance& sd, double delta);

/// Sampled gradient-flow calibration for one curve at one time.
struct Calibration {
  VectorField xi;
  VectorField B;
  bool has_B = false;  // false when the radial-deviation gate rejected B
  ScalarField theta;
  double lambda_star = 0.0;
  double delta = 0.0;
  Curve source;
  double time = 0.0;
  std::vector<double> v_normal;  // per-node normal speed used for B
  SignedDistance sd;             // cached distance geometry
  VelocityExtension vel;         // Stokes velocity and Jacobian behind B
  ScalarField f_diag;            // bounded factor of the xi-transport identity
};

/// delta <= 0 selects default_delta. Rejects delta > 0.5/max|kappa|.
Calibration build_calibration(const Curve& curve, const std::vector<double>& v_normal,
                              const PeriodicGrid& grid, double delta = 0.0, double time = 0.0);

/// Dist-normalized residual maxima over the tube {|s| < delta}; `geometric`
/// removes the non-flow part of the boundary velocity so manufactured speeds
/// probe the construction rather than the evolution law.
struct CalibrationResiduals {
  double div_B = 0.0;
  double tangential_B = 0.0;
  double geometric = 0.0;
  double geometric_on_interface = 0.0;
  double theta_transport = 0.0;
  double xi_len_transport = 0.0;
  double xi_transport = 0.0;
  double f_sup = 0.0;
  double shortness_slack = 0.0;   // max of min(1,s^2) - (1-|xi|), <= 0 expected
  double theta_coercivity = 0.0;  // max of min(1,c s) - |theta|, <= 0 expected
  int theta_sign_violations = 0;
  double theta_c = 0.0;  // measured lower constant
  double theta_C = 0.0;  // measured upper constant
};

CalibrationResiduals verify_static(const Calibration& cal, const Curve& curve);

/// Forward-difference transport residuals between two nearby calibrations on
/// the same grid; fills cal_t.f_diag. dt is the separation of the two times.
CalibrationResiduals verify_transport(const Calibration& cal_t, const Calibration& cal_t_plus,
                                      double dt, ScalarField* f_diag_out = nullptr);

}  // namespace vpmcf
