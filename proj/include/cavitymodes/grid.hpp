// Uniform discretization of the photon continuum with trapezoid weights.
//
// The requested span [center - half_width, center + half_width] is clamped
// at a small positive floor (the continuum only has omega > 0), which makes
// the grid asymmetric for broad requests around low resonances. Discretizing
// the continuum introduces an artificial revival at 2*pi/spacing; runs must
// end well before it (enforced by the integrator configuration checks).

#pragma once

#include <cstddef>
#include <vector>

#include "cavitymodes/common.hpp"
#include "cavitymodes/resonances.hpp"

namespace cavitymodes {

struct FrequencyGrid {
  double center = 0.0;
  double half_width = 0.0;
  std::vector<double> nodes;    // ascending, all > 0
  std::vector<double> weights;  // trapezoid quadrature weights

  std::size_t count() const { return nodes.size(); }
  double spacing() const { return nodes[1] - nodes[0]; }
  double recurrence_time() const {
    return 2.0 * std::numbers::pi / spacing();
  }
};

inline FrequencyGrid make_frequency_grid(double center, double half_width,
                                         std::size_t count) {
  if (!(half_width > 0.0) || count < 3)
    throw std::domain_error("make_frequency_grid: bad span or count");
  FrequencyGrid g;
  g.center = center;
  g.half_width = half_width;
  const double hi = center + half_width;
  const double spacing_req = 2.0 * half_width / static_cast<double>(count - 1);
  const double lo = std::max(center - half_width, spacing_req);
  if (!(lo < hi)) throw std::domain_error("make_frequency_grid: empty span");
  const std::size_t n = static_cast<std::size_t>(
      std::lround((hi - lo) / spacing_req)) + 1;
  g.nodes.resize(n);
  g.weights.assign(n, 0.0);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    g.nodes[j] = lo + h * static_cast<double>(j);
  g.nodes.back() = hi;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double dw = g.nodes[j + 1] - g.nodes[j];
    g.weights[j] += 0.5 * dw;
    g.weights[j + 1] += 0.5 * dw;
  }
  return g;
}

// Default simulation grid for one retained resonance: the span covers both
// the Lorentzian wings (40 kappa) and six sinc lobes of the cavity-reservoir
// coupling; the spacing resolves the linewidth with 32 samples and keeps the
// recurrence horizon at least four run lengths away.
inline FrequencyGrid default_grid(const ResonanceFit& fit, double t_max) {
  const double w = std::max(40.0 * fit.kappa_m,
                            6.0 * std::numbers::pi * kSpeedOfLight / fit.ell_eff);
  double spacing = fit.kappa_m / 32.0;
  if (t_max > 0.0)
    spacing = std::min(spacing, 2.0 * std::numbers::pi / (4.0 * t_max) * 0.999);
  const std::size_t count =
      static_cast<std::size_t>(std::ceil(2.0 * w / spacing)) + 1;
  return make_frequency_grid(fit.omega_m, w, count);
}

}  // namespace cavitymodes
