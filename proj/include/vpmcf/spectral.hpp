#pragma once

#include <complex>
#include <vector>

#include "vpmcf/grid.hpp"

namespace vpmcf {

/// Half-spectrum coefficients of a real field (FFTW r2c layout, unnormalized:
/// divide by n^2 on the way back).
struct Spectrum {
  PeriodicGrid grid;
  std::vector<std::complex<double>> c;  // (n) x (n/2+1), row-major in ky
};

/// Spectral operator backend. All free functions below grab a per-thread
/// workspace keyed by grid size, so independent runs can execute on worker
/// threads without sharing FFTW buffers. Plan creation takes a global lock
/// (the FFTW planner is not thread-safe).
Spectrum to_spectrum(const ScalarField& f);
ScalarField from_spectrum(const Spectrum& s);

/// Fourier-exact periodic gradient. The Nyquist column/row is dropped from
/// first derivatives so the inverse transform stays real-symmetric.
VectorField gradient(const ScalarField& f);
VectorField gradient_of(const Spectrum& s);

/// Fourier-multiplier Laplacian with symbol -|k|^2.
ScalarField laplacian(const ScalarField& f);
ScalarField laplacian_of(const Spectrum& s);

/// Spectral divergence of a vector field.
ScalarField divergence(const VectorField& v);

/// All four spectral partials of a vector field: [dxVx, dyVx, dxVy, dyVy].
struct Jacobian {
  ScalarField dxx, dyx, dxy, dyy;  // d(col index = component, row = direction)
};
Jacobian jacobian(const VectorField& v);

/// One screened-Poisson solve in Fourier space:
///   out_hat = (u_hat + dt * r_hat) / (1 + dt |k|^2),
/// the implicit-Laplacian update used by the phase-field stepper.
void semi_implicit_combine(Spectrum& u_hat, const Spectrum& r_hat, double dt);

}  // namespace vpmcf
