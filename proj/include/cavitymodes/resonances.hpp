// Resonance location, Lorentzian fitting and effective mirror parameters.
//
// Each peak of |T|^2 is summarized by the Lorentzian
//   T_m(omega) = sqrt(c/(2 L_N)) sqrt(kappa) / ((omega - omega_m) + i kappa/2)
// with kappa from the full width at half maximum, L_N from the peak height
// |T(omega_m)|^2 = 2c/(kappa L_N), and the mode index m counting the
// antinodes of the resonant standing wave across the geometric mirror
// spacing. The effective length ell_eff = m pi c / omega_m then equals
// ell_c exactly when ell_c/l0 is an integer and the peak sits at a comb
// frequency, and tracks the field penetration into the stack otherwise.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cavitymodes/common.hpp"
#include "cavitymodes/stack.hpp"

namespace cavitymodes {

struct ResonanceFit {
  double omega_m = 0.0;       // peak frequency (c/l0)
  double kappa_m = 0.0;       // FWHM linewidth of |T|^2 (c/l0)
  double L_N = 0.0;           // amplification length (l0)
  double ell_eff = 0.0;       // m pi c / omega_m (l0)
  int mode_index = 0;         // m
  double r_eff = 0.0;         // exp(-kappa ell_eff / c)
  double overlap_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Parabolic refinement of a discrete maximum on log|T|^2; returns the
// sub-sample offset in units of the local spacing and the refined log peak.
struct ParabolicPeak {
  double offset;
  double log_peak;
};

inline ParabolicPeak refine_log_peak(double l0, double l1, double l2) {
  const double dd = l0 - 2.0 * l1 + l2;
  if (!(dd < 0.0)) return {0.0, l1};  // flat or degenerate: keep sample
  const double off = 0.5 * (l0 - l2) / dd;
  return {off, l1 - 0.25 * (l0 - l2) * off};
}

inline std::vector<double> abs2(const ResponseTable& t) {
  std::vector<double> a(t.values.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::norm(t.values[j]);
  return a;
}

}  // namespace detail

// Local maxima of |T|^2 inside [lo, hi], ascending, each refined by
// parabolic interpolation of log|T|^2 around the discrete maximum.
inline std::vector<double> find_peaks(const ResponseTable& table, double lo,
                                      double hi) {
  if (lo > hi) std::swap(lo, hi);
  if (lo < table.min_omega() || hi > table.max_omega())
    throw std::out_of_range("find_peaks: window outside tabulated grid");
  const auto a2 = detail::abs2(table);
  std::vector<double> peaks;
  for (std::size_t j = 1; j + 1 < a2.size(); ++j) {
    if (table.grid[j] < lo || table.grid[j] > hi) continue;
    if (!(a2[j] > a2[j - 1] && a2[j] > a2[j + 1])) continue;
    const auto ref = detail::refine_log_peak(std::log(a2[j - 1]),
                                             std::log(a2[j]),
                                             std::log(a2[j + 1]));
    const double h_lo = table.grid[j] - table.grid[j - 1];
    const double h_hi = table.grid[j + 1] - table.grid[j];
    peaks.push_back(table.grid[j] + ref.offset * (ref.offset >= 0 ? h_hi : h_lo));
  }
  return peaks;
}

namespace detail {

// Half-maximum crossing by linear interpolation of |T|^2 between samples.
inline double half_crossing(const ResponseTable& t, const std::vector<double>& a2,
                            std::size_t from, int step, double half) {
  std::size_t j = from;
  while (true) {
    if ((step < 0 && j == 0) || (step > 0 && j + 1 == a2.size()))
      throw std::out_of_range(
          "fit_resonance: half maximum not bracketed inside the grid");
    const std::size_t k = static_cast<std::size_t>(static_cast<long>(j) + step);
    if (a2[k] <= half) {
      const double u = (a2[j] - half) / (a2[j] - a2[k]);
      return t.grid[j] + u * (t.grid[k] - t.grid[j]);
    }
    j = k;
  }
}

}  // namespace detail

inline double overlap_error(const ResponseTable& table, const ResonanceFit& fit);

// Fit the resonance nearest to `peak`. The table must resolve the peak
// (>= 8 samples above half maximum) and bracket both half-max crossings.
inline ResonanceFit fit_resonance(const ResponseTable& table, double peak) {
  if (!table.contains(peak))
    throw std::out_of_range("fit_resonance: peak outside tabulated grid");
  const auto a2 = detail::abs2(table);

  // nearest sample, then climb to the discrete maximum
  std::size_t j = static_cast<std::size_t>(
      std::lower_bound(table.grid.begin(), table.grid.end(), peak) -
      table.grid.begin());
  if (j >= a2.size()) j = a2.size() - 1;
  if (j > 0 && std::abs(table.grid[j - 1] - peak) < std::abs(table.grid[j] - peak))
    --j;
  while (j + 1 < a2.size() && a2[j + 1] > a2[j]) ++j;
  while (j > 0 && a2[j - 1] > a2[j]) --j;
  if (j == 0 || j + 1 == a2.size())
    throw std::out_of_range("fit_resonance: peak sits on the grid boundary");

  const auto ref = detail::refine_log_peak(std::log(a2[j - 1]), std::log(a2[j]),
                                           std::log(a2[j + 1]));
  const double h = (ref.offset >= 0 ? table.grid[j + 1] - table.grid[j]
                                    : table.grid[j] - table.grid[j - 1]);
  ResonanceFit fit;
  fit.omega_m = table.grid[j] + ref.offset * h;
  const double peak_abs2 = std::exp(ref.log_peak);

  const double half = peak_abs2 / 2.0;
  const double w_lo = detail::half_crossing(table, a2, j, -1, half);
  const double w_hi = detail::half_crossing(table, a2, j, +1, half);
  fit.kappa_m = w_hi - w_lo;
  if (!(fit.kappa_m > 0.0))
    throw std::runtime_error("fit_resonance: non-positive linewidth");
  fit.L_N = 2.0 * kSpeedOfLight / (fit.kappa_m * peak_abs2);
  if (!(fit.L_N > 0.0))
    throw std::runtime_error("fit_resonance: non-positive amplification length");

  // Antinode count of sin(omega (x + ell_c)/c) across the mirror spacing.
  fit.mode_index = static_cast<int>(
      std::lround(fit.omega_m * table.spec.ell_c / (std::numbers::pi * kSpeedOfLight)));
  if (fit.mode_index < 1)
    throw std::runtime_error("fit_resonance: degenerate mode index");
  fit.ell_eff = fit.mode_index * std::numbers::pi * kSpeedOfLight / fit.omega_m;
  fit.r_eff = std::exp(-fit.kappa_m * fit.ell_eff / kSpeedOfLight);
  if (table.min_omega() <= fit.omega_m - fit.kappa_m / 2.0 &&
      table.max_omega() >= fit.omega_m + fit.kappa_m / 2.0)
    fit.overlap_error = overlap_error(table, fit);
  return fit;
}

// Lorentzian term rebuilt from a fit.
inline cplx lorentzian_term(const ResonanceFit& fit, double omega) {
  return std::sqrt(kSpeedOfLight / (2.0 * fit.L_N)) * std::sqrt(fit.kappa_m) /
         (cplx(omega - fit.omega_m, fit.kappa_m / 2.0));
}

// 1 - | <T, T_m> / <T, T> | over one linewidth around the peak, composite
// trapezoid on the tabulated grid with interpolated interval endpoints.
inline double overlap_error(const ResponseTable& table, const ResonanceFit& fit) {
  const double lo = fit.omega_m - fit.kappa_m / 2.0;
  const double hi = fit.omega_m + fit.kappa_m / 2.0;
  if (lo < table.min_omega() || hi > table.max_omega())
    throw std::out_of_range("overlap_error: linewidth interval outside grid");

  std::vector<double> w;
  std::vector<cplx> tv;
  w.push_back(lo);
  tv.push_back(table.value_at(lo));
  for (std::size_t j = 0; j < table.grid.size(); ++j) {
    if (table.grid[j] > lo && table.grid[j] < hi) {
      w.push_back(table.grid[j]);
      tv.push_back(table.values[j]);
    }
  }
  w.push_back(hi);
  tv.push_back(table.value_at(hi));

  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    const double dw = w[j + 1] - w[j];
    const cplx f0 = tv[j] * std::conj(lorentzian_term(fit, w[j]));
    const cplx f1 = tv[j + 1] * std::conj(lorentzian_term(fit, w[j + 1]));
    num += 0.5 * dw * (f0 + f1);
    den += 0.5 * dw * (std::norm(tv[j]) + std::norm(tv[j + 1]));
  }
  return 1.0 - std::abs(num / den);
}

// Analytic single-layer linewidth and shifted comb frequency, for
// cross-validating fits against a one-slab mirror.
struct SingleLayerReference {
  double kappa1;         // -(c/ell_c) ln |r_1(omega)|
  double omega_shifted;  // m pi c/ell_c + (c/2 ell_c)(pi - phi_r(omega))
};

inline SingleLayerReference single_layer_reference(const StackSpec& spec,
                                                   double peak) {
  if (spec.n_pairs != 1)
    throw std::domain_error("single_layer_reference: requires N = 1");
  const SlabOptics slab = slab_optics(spec.n_high, spec.delta, peak);
  const double mod = std::abs(slab.r1);
  if (!(mod > 0.0) || mod >= 1.0)
    throw std::domain_error("single_layer_reference: degenerate |r_1|");
  SingleLayerReference ref;
  ref.kappa1 = -(kSpeedOfLight / spec.ell_c) * std::log(mod);
  const double phi_r = std::arg(slab.r1);
  const double shift =
      (std::numbers::pi - phi_r) * kSpeedOfLight / (2.0 * spec.ell_c);
  const int m = static_cast<int>(std::lround(
      (peak - shift) * spec.ell_c / (std::numbers::pi * kSpeedOfLight)));
  ref.omega_shifted = m * std::numbers::pi * kSpeedOfLight / spec.ell_c + shift;
  return ref;
}

// Fictitious thin mirror equivalent to the stack around one resonance:
// |r_m(omega)| = |r_1(omega)|^(a ell_eff / ell_c) with
// a = kappa_m / kappa_1(omega_m), and phi_r pinned to pi at the peak.
struct EffectiveMirror {
  double a_scale = 0.0;
  double omega_m = 0.0;
  double ell_eff = 0.0;
  double L_N = 0.0;
  std::vector<double> grid;
  std::vector<double> r_mod;           // |r_m(omega_j)|
  std::vector<double> kappa_of_omega;  // a * kappa_1(omega_j)

  // Generalized response sqrt(ell_eff/L_N) t_m / (1 + r_m e^{2i omega ell_eff/c})
  // evaluated with the constant phase convention phi_r = pi, phi_t = pi/2.
  cplx generalized_response(double omega) const {
    if (omega < grid.front() || omega > grid.back())
      throw std::out_of_range("EffectiveMirror: omega outside grid");
    auto it = std::lower_bound(grid.begin(), grid.end(), omega);
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double u = (omega - grid[lo]) / (grid[hi] - grid[lo]);
    const double rm = r_mod[lo] + u * (r_mod[hi] - r_mod[lo]);
    const cplx r = -rm;                                   // phi_r = pi
    const cplx t = cplx(0.0, std::sqrt(1.0 - rm * rm));   // phi_t = pi/2
    const cplx den =
        1.0 + r * std::polar(1.0, 2.0 * omega * ell_eff / kSpeedOfLight);
    return std::sqrt(ell_eff / L_N) * t / den;
  }
};

inline EffectiveMirror effective_mirror(const ResonanceFit& fit,
                                        const StackSpec& spec,
                                        std::span<const double> grid,
                                        std::span<const SlabOptics> slabs) {
  if (grid.size() != slabs.size() || grid.empty())
    throw std::domain_error("effective_mirror: grid/slab size mismatch");
  const SlabOptics at_peak = slab_optics(spec.n_high, spec.delta, fit.omega_m);
  const double kappa1_peak =
      -(kSpeedOfLight / spec.ell_c) * std::log(std::abs(at_peak.r1));
  if (!(kappa1_peak > 0.0) || !std::isfinite(kappa1_peak))
    throw std::runtime_error("effective_mirror: degenerate kappa_1 scale");
  EffectiveMirror em;
  em.a_scale = fit.kappa_m / kappa1_peak;
  em.omega_m = fit.omega_m;
  em.ell_eff = fit.ell_eff;
  em.L_N = fit.L_N;
  em.grid.assign(grid.begin(), grid.end());
  em.r_mod.resize(grid.size());
  em.kappa_of_omega.resize(grid.size());
  const double expo = em.a_scale * fit.ell_eff / spec.ell_c;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double r1 = std::abs(slabs[j].r1);
    em.r_mod[j] = std::pow(r1, expo);
    em.kappa_of_omega[j] =
        -em.a_scale * (kSpeedOfLight / spec.ell_c) * std::log(r1);
  }
  return em;
}

// End-to-end analysis: coarse scan, peak pick, iterative zoom, final fit.
struct ResonanceAnalysis {
  ResonanceFit fit;
  ResponseTable zoom;  // dense table around the fitted peak
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) v[j] = lo + h * static_cast<double>(j);
  v.back() = hi;
  return v;
}

}  // namespace detail

inline ResonanceAnalysis analyze_resonance(const StackSpec& spec,
                                           double window_lo = 0.88 * kOmegaDesign,
                                           double window_hi = 1.12 * kOmegaDesign) {
  validate(spec);
  if (spec.n_pairs == 0)
    throw std::domain_error("analyze_resonance: N = 0 stack has no resonances");
  ResonanceAnalysis out;

  // Coarse scan: at least 64 samples per conservative free spectral range.
  const double fsr = std::numbers::pi * kSpeedOfLight /
                     (spec.ell_c + spec.stack_thickness() + 4.0);
  const std::size_t coarse_n = std::max<std::size_t>(
      2049, static_cast<std::size_t>(std::ceil((window_hi - window_lo) / (fsr / 64.0))));
  ResponseTable coarse =
      response(spec, detail::linspace(window_lo, window_hi, coarse_n));
  std::vector<double> peaks = find_peaks(coarse, window_lo, window_hi);
  if (peaks.empty())
    throw std::runtime_error("analyze_resonance: no peak inside the window");

  double best = peaks.front();
  if (peaks.size() > 1) {
    double best_val = 0.0;
    std::vector<double> vals;
    for (double p : peaks) {
      const double v = std::norm(coarse.value_at(p));
      vals.push_back(v);
      if (v > best_val) {
        best_val = v;
        best = p;
      }
    }
    std::sort(vals.rbegin(), vals.rend());
    if (vals.size() > 1 && vals[1] > 0.98 * vals[0])
      out.warnings.push_back(
          "analyze_resonance: two comparable peaks straddle the window; "
          "keeping the taller one");
  }

  // Iterative zoom: re-grid around the peak until the linewidth is resolved
  // with ~64 samples and the window spans 20 linewidths.
  double center = best;
  double half = fsr / 2.0;
  ResonanceFit fit;
  for (int pass = 0; pass < 3; ++pass) {
    const std::size_t n = 8193;
    out.zoom = response(spec, detail::linspace(center - half, center + half, n));
    fit = fit_resonance(out.zoom, center);
    center = fit.omega_m;
    half = 20.0 * fit.kappa_m;
  }
  out.fit = fit;
  return out;
}

}  // namespace cavitymodes
