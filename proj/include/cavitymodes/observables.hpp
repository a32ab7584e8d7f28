// Photon observables: spectra, spatial density, photon number, kernel checks.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cavitymodes/common.hpp"
#include "cavitymodes/dynamics.hpp"
#include "cavitymodes/grid.hpp"
#include "cavitymodes/resonances.hpp"

namespace cavitymodes {

struct SpectralDensity {
  std::vector<double> omega;
  std::vector<double> density;  // per unit frequency
  double integral = 0.0;        // quadrature of density over the grid
};

// |c(omega_j)|^2 as a density (folded amplitudes divided by the weights).
// Before leak-out the outside spectrum is not stationary; calling this with
// a still-populated cavity mode is refused unless allow_stale is set.
inline SpectralDensity spectrum_outside(const SimState& state,
                                        const FrequencyGrid& grid,
                                        bool allow_stale = false) {
  if (state.c.size() != grid.count())
    throw std::logic_error("spectrum_outside: state does not match the grid");
  if (state.rep == Representation::inside_outside && !allow_stale &&
      std::norm(state.c_f10) >= 1e-3)
    throw std::runtime_error(
        "spectrum_outside: cavity population above 1e-3, spectrum is stale");
  SpectralDensity s;
  s.omega = grid.nodes;
  s.density.resize(grid.count());
  for (std::size_t j = 0; j < grid.count(); ++j) {
    s.density[j] = std::norm(state.c[j]) / grid.weights[j];
    s.integral += std::norm(state.c[j]);
  }
  return s;
}

// Fourier estimate of the outgoing spectrum from the intracavity amplitude:
// sigma |int_0^T conj(c_f10(t)) e^{-i(omega + omega_fg - omega_L) t} dt|^2
// with sigma = kappa_m / (2 pi). Composite trapezoid on a subsampled series.
inline SpectralDensity spectrum_fourier(std::span<const cplx> f10_series,
                                        double series_dt,
                                        const FrequencyGrid& grid,
                                        const ResonanceFit& fit,
                                        const AtomParams& atom,
                                        bool allow_stale = false) {
  if (f10_series.size() < 2 || !(series_dt > 0.0))
    throw std::domain_error("spectrum_fourier: missing mode series");
  if (!allow_stale && std::norm(f10_series.back()) >= 1e-3)
    throw std::runtime_error(
        "spectrum_fourier: cavity population above 1e-3, spectrum is stale");

  double max_det = 0.0;
  for (double w : {grid.nodes.front(), grid.nodes.back()})
    max_det = std::max(max_det, std::abs(w + atom.omega_fg - atom.omega_L));
  max_det = std::max(max_det, 1e-6);
  const std::size_t stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(0.5 / (series_dt * max_det)));

  std::vector<cplx> d;  // conj(c_f10) at the subsampled times
  std::vector<double> ts;
  for (std::size_t i = 0; i < f10_series.size(); i += stride) {
    d.push_back(std::conj(f10_series[i]));
    ts.push_back(static_cast<double>(i) * series_dt);
  }
  if (ts.back() < static_cast<double>(f10_series.size() - 1) * series_dt) {
    d.push_back(std::conj(f10_series.back()));
    ts.push_back(static_cast<double>(f10_series.size() - 1) * series_dt);
  }

  const double sigma = fit.kappa_m / (2.0 * std::numbers::pi);
  SpectralDensity s;
  s.omega = grid.nodes;
  s.density.resize(grid.count());
  const double h = ts[1] - ts[0];
  for (std::size_t j = 0; j < grid.count(); ++j) {
    const double nu = grid.nodes[j] + atom.omega_fg - atom.omega_L;
    const cplx rot = std::polar(1.0, -nu * h);
    cplx phase = std::polar(1.0, -nu * ts[0]);
    cplx acc = 0.0;
    const std::size_t m = d.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double w = (i == 0) ? 0.5 : 1.0;
      acc += w * d[i] * phase;
      phase *= rot;
    }
    // the final interval may be shorter; close the trapezoid explicitly
    acc *= h;
    const double tail = ts[m - 1] - ts[m - 2];
    acc += 0.5 * (tail - h) * d[m - 2] * std::polar(1.0, -nu * ts[m - 2]);
    acc += 0.5 * tail * d[m - 1] * std::polar(1.0, -nu * ts[m - 1]);
    s.density[j] = sigma * std::norm(acc);
  }
  for (std::size_t j = 0; j < grid.count(); ++j)
    s.integral += s.density[j] * grid.weights[j];
  return s;
}

// Unit-normalized copy (integral one over the grid weights).
inline std::vector<double> normalized_density(const SpectralDensity& s,
                                              const FrequencyGrid& grid) {
  std::vector<double> p(s.density);
  double integral = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) integral += p[j] * grid.weights[j];
  if (integral <= 0.0) return p;
  for (double& v : p) v /= integral;
  return p;
}

// L2 distance between unit-normalized densities, relative to the larger norm.
inline double spectral_distance(const SpectralDensity& a,
                                const SpectralDensity& b,
                                const FrequencyGrid& grid) {
  const auto pa = normalized_density(a, grid);
  const auto pb = normalized_density(b, grid);
  double d2 = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < pa.size(); ++j) {
    const double w = grid.weights[j];
    d2 += w * sqr(pa[j] - pb[j]);
    na += w * sqr(pa[j]);
    nb += w * sqr(pb[j]);
  }
  return std::sqrt(d2) / std::sqrt(std::max(na, nb));
}

// Photon number density along the propagation axis,
//   Phi(x) = |c01(x)|^2,  c01(x) = (1/sqrt(c kappa)) int domega conj(V_m) e^{i omega x/c} c(omega).
inline std::vector<double> spatial_profile(const SimState& state,
                                           const FrequencyGrid& grid,
                                           const ResonanceFit& fit,
                                           std::span<const double> x_grid) {
  if (state.c.size() != grid.count())
    throw std::logic_error("spatial_profile: state does not match the grid");
  const double half_span = 0.5 * (grid.nodes.back() - grid.nodes.front());
  for (std::size_t k = 1; k < x_grid.size(); ++k) {
    const double dx = x_grid[k] - x_grid[k - 1];
    if (dx > std::numbers::pi * kSpeedOfLight / half_span)
      throw std::domain_error(
          "spatial_profile: x spacing coarser than the grid can resolve");
  }
  // q_j = sqrt(w_j) conj(V(omega_j)) c_j, fixed over x
  const std::size_t n = grid.count();
  std::vector<double> qr(n), qi(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx q = std::sqrt(grid.weights[j]) *
                   std::conj(coupling_V(grid.nodes[j], fit)) * state.c[j];
    qr[j] = q.real();
    qi[j] = q.imag();
  }
  const double w0 = grid.nodes.front();
  const double dw = grid.spacing();
  std::vector<double> phi(x_grid.size());
  for (std::size_t k = 0; k < x_grid.size(); ++k) {
    const double x = x_grid[k] / kSpeedOfLight;
    const cplx rho = std::polar(1.0, dw * x);
    cplx phase = std::polar(1.0, w0 * x);
    double ar = 0.0, ai = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pr = phase.real(), pi_ = phase.imag();
      ar += qr[j] * pr - qi[j] * pi_;
      ai += qr[j] * pi_ + qi[j] * pr;
      phase *= rho;
    }
    phi[k] = (ar * ar + ai * ai) / (kSpeedOfLight * fit.kappa_m);
  }
  return phi;
}

// Default spatial grid: four samples per finest resolvable oscillation.
inline std::vector<double> default_x_grid(const FrequencyGrid& grid,
                                          double x_max) {
  const double half_span = 0.5 * (grid.nodes.back() - grid.nodes.front());
  const double dx = 0.25 * std::numbers::pi * kSpeedOfLight / half_span;
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(x_max / dx)) + 1;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = dx * static_cast<double>(k);
  return x;
}

// Trapezoid integral of the density over x >= 0.
inline double photon_number(std::span<const double> x,
                            std::span<const double> phi) {
  if (x.size() != phi.size() || x.size() < 2)
    throw std::domain_error("photon_number: bad profile");
  double n = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (x[k + 1] <= 0.0) continue;
    n += 0.5 * (x[k + 1] - x[k]) * (phi[k] + phi[k + 1]);
  }
  return n;
}

// Full width of the profile at a fraction of its maximum (outermost samples).
inline double profile_full_width(std::span<const double> x,
                                 std::span<const double> phi,
                                 double fraction = 0.05) {
  double peak = 0.0;
  for (double v : phi) peak = std::max(peak, v);
  if (peak <= 0.0) return 0.0;
  const double thr = fraction * peak;
  std::size_t lo = 0, hi = 0;
  bool found = false;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (phi[k] >= thr) {
      if (!found) lo = k;
      hi = k;
      found = true;
    }
  }
  return found ? x[hi] - x[lo] : 0.0;
}

// Coarse-grained two-point kernel int |V_m|^2 e^{i omega (x - x')/c} domega.
// The closed form is a triangle of height kappa c/(2 ell_eff) supported on
// |x - x'| <= 2 ell_eff; the numeric value integrates the sinc^2 profile on
// a wide internal grid cut at sinc zeros.
struct KernelCheck {
  cplx numeric;
  cplx analytic;
  double commutator;  // |numeric| / (c kappa); 1/(2 ell_eff) at zero separation
};

inline KernelCheck kernel_check(const ResonanceFit& fit, double separation) {
  const double lobe = std::numbers::pi * kSpeedOfLight / fit.ell_eff;
  const int lobes_up = 640;
  const int lobes_down = static_cast<int>(
      std::floor((fit.omega_m - 1e-9) / lobe));
  const double lo = fit.omega_m - lobes_down * lobe;
  const double hi = fit.omega_m + lobes_up * lobe;
  double dw = std::min(lobe / 64.0,
                       0.1 * kSpeedOfLight /
                           std::max(std::abs(separation), fit.ell_eff));
  const std::size_t n =
      static_cast<std::size_t>(std::ceil((hi - lo) / dw)) + 1;
  dw = (hi - lo) / static_cast<double>(n - 1);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = lo + dw * static_cast<double>(j);
    const double v2 = fit.kappa_m / (2.0 * std::numbers::pi) *
                      sqr(sinc((w - fit.omega_m) * fit.ell_eff / kSpeedOfLight));
    const double trap = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    acc += trap * v2 * std::polar(1.0, w * separation / kSpeedOfLight);
  }
  KernelCheck k;
  k.numeric = acc * dw;
  const double a = std::abs(separation);
  if (a <= 2.0 * fit.ell_eff) {
    const double height =
        fit.kappa_m * kSpeedOfLight / (4.0 * sqr(fit.ell_eff)) *
        (2.0 * fit.ell_eff - a);
    k.analytic = height * std::polar(1.0, fit.omega_m * separation / kSpeedOfLight);
  } else {
    k.analytic = 0.0;
  }
  k.commutator = std::abs(k.numeric) / (kSpeedOfLight * fit.kappa_m);
  return k;
}

// First time after the cavity-population peak at which it stays below the
// threshold; NaN when the photon never leaks out within the horizon.
inline double leak_out_time(const std::vector<Populations>& pops,
                            double threshold = 1e-3) {
  if (pops.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t peak = 0;
  for (std::size_t i = 0; i < pops.size(); ++i)
    if (pops[i].f10 > pops[peak].f10) peak = i;
  for (std::size_t i = peak; i < pops.size(); ++i)
    if (pops[i].f10 < threshold) return pops[i].t;
  return std::numeric_limits<double>::quiet_NaN();
}

// Scalar comparison metrics plus per-run diagnostics.
struct PhotonRecord {
  std::vector<Populations> populations;
  SpectralDensity spectrum;
  std::vector<double> x_grid;
  std::vector<double> spatial_times;
  std::vector<std::vector<double>> spatial;  // one profile per snapshot
  std::map<std::string, double> metrics;
};

}  // namespace cavitymodes
