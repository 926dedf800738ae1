#include "vpmcf/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace vpmcf {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// FFTW plans plus aligned buffers for one grid size, owned by one thread.
class Workspace {
 public:
  explicit Workspace(int n) : n_(n), nc_(n / 2 + 1) {
    real_ = fftw_alloc_real(static_cast<std::size_t>(n_) * n_);
    cplx_ = fftw_alloc_complex(static_cast<std::size_t>(n_) * nc_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(n_, n_, cplx_, real_, FFTW_ESTIMATE);
  }
  ~Workspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  Spectrum forward(const ScalarField& f) {
    std::copy(f.values.begin(), f.values.end(), real_);
    fftw_execute(fwd_);
    Spectrum s;
    s.grid = f.grid;
    s.c.assign(reinterpret_cast<std::complex<double>*>(cplx_),
               reinterpret_cast<std::complex<double>*>(cplx_) + std::size_t(n_) * nc_);
    return s;
  }

  ScalarField backward(const Spectrum& s) {
    std::copy(s.c.begin(), s.c.end(), reinterpret_cast<std::complex<double>*>(cplx_));
    fftw_execute(bwd_);
    ScalarField f(s.grid);
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = real_[i] * scale;
    return f;
  }

 private:
  int n_, nc_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_, bwd_;
};

Workspace& workspace_for(int n) {
  thread_local std::map<int, std::unique_ptr<Workspace>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Workspace>(n);
  return *slot;
}

/// Signed integer frequency for index j on an n-point axis.
inline int freq(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace

Spectrum to_spectrum(const ScalarField& f) {
  require_finite(f, "spectral transform");
  return workspace_for(f.grid.n).forward(f);
}

ScalarField from_spectrum(const Spectrum& s) { return workspace_for(s.grid.n).backward(s); }

VectorField gradient(const ScalarField& f) {
  require_finite(f, "gradient");
  return gradient_of(to_spectrum(f));
}

VectorField gradient_of(const Spectrum& s) {
  const int n = s.grid.n, nc = n / 2 + 1;
  const double k0 = 2.0 * M_PI / s.grid.side;
  Spectrum sx = s, sy = s;
  for (int jy = 0; jy < n; ++jy) {
    const int fy = freq(jy, n);
    // First derivatives drop the Nyquist frequency; its ik factor has no
    // real-symmetric counterpart.
    const double ky = (jy == n / 2) ? 0.0 : k0 * fy;
    for (int jx = 0; jx < nc; ++jx) {
      const double kx = (jx == n / 2) ? 0.0 : k0 * jx;
      const std::size_t id = static_cast<std::size_t>(jy) * nc + jx;
      const std::complex<double> v = s.c[id];
      sx.c[id] = std::complex<double>(-kx * v.imag(), kx * v.real());
      sy.c[id] = std::complex<double>(-ky * v.imag(), ky * v.real());
    }
  }
  VectorField g(s.grid);
  g.x = from_spectrum(sx);
  g.y = from_spectrum(sy);
  return g;
}

ScalarField laplacian(const ScalarField& f) {
  require_finite(f, "laplacian");
  return laplacian_of(to_spectrum(f));
}

ScalarField laplacian_of(const Spectrum& s0) {
  const int n = s0.grid.n, nc = n / 2 + 1;
  const double k0 = 2.0 * M_PI / s0.grid.side;
  Spectrum s = s0;
  for (int jy = 0; jy < n; ++jy) {
    const double ky = k0 * freq(jy, n);
    for (int jx = 0; jx < nc; ++jx) {
      const double kx = k0 * jx;
      s.c[static_cast<std::size_t>(jy) * nc + jx] *= -(kx * kx + ky * ky);
    }
  }
  return from_spectrum(s);
}

ScalarField divergence(const VectorField& v) {
  VectorField gx = gradient(v.x);
  VectorField gy = gradient(v.y);
  ScalarField d(v.grid());
  for (std::size_t i = 0; i < d.values.size(); ++i)
    d.values[i] = gx.x.values[i] + gy.y.values[i];
  return d;
}

Jacobian jacobian(const VectorField& v) {
  VectorField gx = gradient(v.x);
  VectorField gy = gradient(v.y);
  Jacobian j;
  j.dxx = std::move(gx.x);
  j.dyx = std::move(gx.y);
  j.dxy = std::move(gy.x);
  j.dyy = std::move(gy.y);
  return j;
}

void semi_implicit_combine(Spectrum& u_hat, const Spectrum& r_hat, double dt) {
  const int n = u_hat.grid.n, nc = n / 2 + 1;
  const double k0 = 2.0 * M_PI / u_hat.grid.side;
  for (int jy = 0; jy < n; ++jy) {
    const double ky = k0 * freq(jy, n);
    for (int jx = 0; jx < nc; ++jx) {
      const double kx = k0 * jx;
      const std::size_t id = static_cast<std::size_t>(jy) * nc + jx;
      u_hat.c[id] = (u_hat.c[id] + dt * r_hat.c[id]) / (1.0 + dt * (kx * kx + ky * ky));
    }
  }
}

}  // namespace vpmcf
