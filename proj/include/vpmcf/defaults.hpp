#pragma once

/// Central table of numeric defaults and frozen tolerances.
///
/// Every tolerance used by an invariant check or by the acceptance suite is
/// pinned here so that a run is reproducible from the code version alone.
/// Do not scatter magic numbers through the solvers.

namespace vpmcf::defaults {

inline constexpr const char* kVersion = "vpmcf 0.1.0";

// --- phase field -----------------------------------------------------------

/// Curvature of the double well at its minima: W(u) = 18 u^2 (1-u)^2 has
/// W''(0) = W''(1) = 36. The explicit reaction term is stable only for
/// dt <= 2 eps^2 / W''_well; all step-size rules are expressed as fractions
/// of that limit.
inline constexpr double kWellCurvature = 36.0;

/// Hard precondition: dt <= c_stab * (2 eps^2 / W''_well).
inline constexpr double kCStab = 0.5;

/// Production step: a quarter of the reaction limit, i.e. dt = eps^2 / 72.
inline constexpr double kDtFraction = 0.25;

inline constexpr double dt_limit(double eps) {
  return kCStab * 2.0 * eps * eps / kWellCurvature;
}
inline constexpr double dt_default(double eps) {
  return kDtFraction * 2.0 * eps * eps / kWellCurvature;
}

/// Minimum profile resolution eps/h.
inline constexpr double kMinEpsOverH = 3.0;

/// Per-step energy monotonicity slack, relative to E_total(0).
inline constexpr double kEnergySlack = 1e-8;

/// Cumulative De Giorgi ledger residual cap, relative to E_total(0), at the
/// default step size; the residual must shrink by at least kDeGiorgiHalving
/// when dt is halved.
inline constexpr double kDeGiorgiTol = 1e-4;
inline constexpr double kDeGiorgiHalving = 0.65;

/// Volume-drift invariant: sup_t |m0 - int phi(u)| <= 2 sqrt(2) eps^(a/2) sqrt(E0).
inline constexpr double kDriftSlackFactor = 2.0;

/// Discrepancy cap: tau_disc = 0.05 * E_S(0) / side^2 (frozen calibration).
inline constexpr double kTauDiscFactor = 0.05;
/// Required shrink factor of the measured discrepancy max under 2x grid refinement.
inline constexpr double kDiscRefineFactor = 1.5;

/// Degenerate-field cutoffs used by the varifold proxy. The direction
/// fallback guards exact zeros only; the speed cutoff must sit above the
/// spectral noise floor of the rhs (~1e-10), or the division by sqrt(2W)
/// manufactures enormous speeds at the profile feet where both factors are
/// pure roundoff. sqrt(2W) = 1e-7 corresponds to |d| ~ 2.7 eps, well past
/// any interface physics.
inline constexpr double kDirectionCutoff = 1e-14;
inline constexpr double kSpeedCutoff = 1e-7;

// --- front tracking --------------------------------------------------------

inline constexpr int kMinCurveNodes = 16;
inline constexpr double kCFrontTracking = 0.2;   // dt <= c * (min spacing)^2
inline constexpr double kAreaTolProjected = 1e-10;
inline constexpr double kPerimeterSlack = 1e-10; // relative to L(0), per step
inline constexpr double kResampleTol = 1e-8;     // relative L and A drift
inline constexpr double kCollinearTol = 1e-14;

// --- calibration -----------------------------------------------------------

/// delta = kDeltaSafety * min(1/max|kappa|, reach estimate).
inline constexpr double kDeltaSafety = 0.5;
/// build_B is supported only when max | |p-c|/Rc - 1 | is below this.
inline constexpr double kRadialDeviationMax = 0.10;
/// Compatibility fluxes.
inline constexpr double kStokesFluxTol = 1e-10;
inline constexpr double kVelocityFluxTol = 1e-8;
/// Stream-function modes below this fraction of the largest coefficient are
/// roundoff and are zeroed (their collar continuation r^|n| would amplify
/// them astronomically).
inline constexpr double kStokesCoeffFloor = 1e-14;
/// Modes whose collar contribution exceeds this multiple of the boundary
/// speed scale cannot belong to a valid continuation (genuine modes stay
/// O(1) x scale; boundary-sampling noise lands at 1e6+) and are dropped
/// into the reported tail.
inline constexpr double kStokesCollarCap = 1e3;
/// Boundary data below this magnitude is treated as identically zero.
inline constexpr double kZeroVelocityTol = 1e-12;
/// Roundoff slack allowed in the pointwise shortness / weight inequalities.
inline constexpr double kPointwiseSlack = 1e-12;
/// Acceptance: on-interface geometric residual for a stationary circle.
inline constexpr double kGeomOnInterfaceTol = 5e-2;
/// Acceptance: admissible residual growth under 2x grid refinement.
inline constexpr double kResidualGrowthMax = 2.0;

// --- entropy ---------------------------------------------------------------

inline constexpr double kEntropyFloor = -1e-10;   // E_rel, E_bulk >= this
inline constexpr double kCoercivitySlack = 1e-8;  // lhs <= rhs + slack*|rhs|
inline constexpr double kBulkFormsTol = 1e-10;    // |signed - modulus|
inline constexpr double kGronwallFloor = 1e-12;   // additive floor inside log
inline constexpr long kKernelSamples = 1000000;

// --- harness ---------------------------------------------------------------

inline constexpr double kCompareTimeTolFactor = 0.5; // of the phase dt

}  // namespace vpmcf::defaults
