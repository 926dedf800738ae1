#pragma once

#include <vector>

#include "vpmcf/calibration.hpp"
#include "vpmcf/grid.hpp"
#include "vpmcf/phasefield.hpp"

namespace vpmcf {

/// One weak-strong comparison at a single time. Coercivity pairs are the
/// (lhs, rhs) sides of the inequalities below, evaluated with the
/// Dirac-direction proxy (density ratio rho identically 1):
///   1: int |n - xi|^2 domega        <= 2 E_rel
///   2: int min(1, c dist^2) domega  <= 2 E_rel
///   3: int |chi - chi_A| min(1, c dist) dx <= E_bulk
///   4: int (1 - rho) domega         <= E_rel           (lhs = 0)
///   5: int (1 - n.xi) rho domega    <= E_rel
///   6: int |n - xi|^2 rho domega    <= 2 E_rel
///   7: int min(1, c dist^2) rho domega <= 2 E_rel
struct CoercivityPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

struct EntropyReport {
  double t = 0.0;
  double e_rel = 0.0;
  double e_rel_alt = 0.0;  // int omega + int chi div xi
  double e_bulk = 0.0;
  double e_bulk_signed = 0.0;
  double symdiff_area = 0.0;
  CoercivityPair coercivity[7];
  int violations = 0;  // pairs with lhs > rhs + slack
  double de_giorgi_residual = 0.0;  // passthrough from the phase ledger
};

/// E_rel = int (1 - n.xi) omega dx and the compatibility-based alternative
/// form int omega dx + int chi div xi dx with chi = 1_{u > 1/2}.
void relative_entropy(const VarifoldProxy& proxy, const Calibration& cal,
                      const ScalarField& u, double& e_rel, double& e_rel_alt);

/// E_bulk = int |chi - chi_A| |theta| dx with chi_A = 1_{s > 0}; the signed
/// form drops both moduli and must agree to kBulkFormsTol.
void bulk_error(const ScalarField& u, const Calibration& cal, double& e_bulk, double& e_signed);

/// Full report at one time: entropies, bulk error, the seven coercivity
/// pairs (with the measured shortness constant), and the L1 symmetric
/// difference |{u > 1/2} delta A|.
EntropyReport coercivity_report(const VarifoldProxy& proxy, const Calibration& cal,
                                const ScalarField& u);

/// Gronwall-type summary of a time series of reports: least-squares fit of
/// log(E_rel + E_bulk + floor) against X(t) = int (1 + |lambda| + |lambda*|)
/// and the growth factors the stability estimate bounds.
struct StabilitySummary {
  double rate = 0.0;        // fitted d log E / dX
  double c_fit = 1.0;       // exp(rate * X(T))
  double ratio_final = 0.0; // (E(T) + floor) / (E(0) + floor)
  double ratio_max = 0.0;
  double x_total = 0.0;
};

StabilitySummary stability_monitor(const std::vector<EntropyReport>& series,
                                   const std::vector<double>& lambda_series,
                                   const std::vector<double>& lambda_star_series);

}  // namespace vpmcf
