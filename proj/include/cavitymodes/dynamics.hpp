// Coupled atom-cavity-continuum amplitude equations in both pictures.
//
// True-mode picture: the atom couples to the exact continuum through
//   eta(omega) = i D sqrt(omega/pi) e^{i omega ell_c / c}
//                  sin(omega (x_A + ell_c)/c) T(omega).
// Inside-outside picture: a single retained perfect-cavity mode couples to
// the atom through g_m and to the semi-infinite reservoir through the
// sinc-shaped V_m(omega).
//
// Continuum amplitudes are stored with quadrature normalization,
// c_j = c(omega_j) sqrt(w_j), which makes the discretized generator exactly
// Hermitian and the state norm a plain sum of squared moduli. All phases are
// kept in the frame rotating at the laser frequency, so detunings
// omega_j + omega_fg - omega_L appear explicitly.
//
// The integrator is classic fixed-step RK4 over a structure-of-arrays
// workspace; a trajectory is deterministic for a given configuration.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "cavitymodes/atom.hpp"
#include "cavitymodes/common.hpp"
#include "cavitymodes/grid.hpp"
#include "cavitymodes/resonances.hpp"
#include "cavitymodes/stack.hpp"

namespace cavitymodes {

enum class Representation { true_mode, inside_outside };

enum class InitialPreset { atom_excited, ground_driven };

struct SimState {
  Representation rep = Representation::true_mode;
  cplx c_g{0.0};
  cplx c_e{0.0};
  cplx c_f10{0.0};           // retained cavity mode (inside-outside only)
  std::vector<cplx> c;       // folded continuum amplitudes c(omega_j) sqrt(w_j)
  double t = 0.0;

  double continuum_population() const {
    double s = 0.0;
    for (const cplx& z : c) s += std::norm(z);
    return s;
  }
  double norm_sq() const {
    return std::norm(c_g) + std::norm(c_e) + std::norm(c_f10) +
           continuum_population();
  }
};

// Emitter coupling to the exact continuum.
inline cplx eta(double omega, const AtomParams& atom, const ResponseTable& table) {
  const cplx t = table.value_at(omega);  // out_of_range off the grid
  const double ell_c = table.spec.ell_c;
  const double k = omega / kSpeedOfLight;
  return cplx(0.0, 1.0) * atom.dipole_scale *
         std::sqrt(omega / std::numbers::pi) * std::polar(1.0, k * ell_c) *
         std::sin(k * (atom.x_A + ell_c)) * t;
}

// Atom coupling to the retained perfect-cavity mode.
inline double g_m(const ResonanceFit& fit, const AtomParams& atom, double ell_c) {
  return -atom.dipole_scale *
         std::sqrt(fit.omega_m * kSpeedOfLight / fit.L_N) *
         std::sin(fit.omega_m * (atom.x_A + ell_c) / kSpeedOfLight);
}

// Cavity-reservoir coupling.
inline cplx coupling_V(double omega, const ResonanceFit& fit) {
  if (!(omega > 0.0)) throw std::domain_error("coupling_V: omega must be > 0");
  const double arg = (omega - fit.omega_m) * fit.ell_eff / kSpeedOfLight;
  return cplx(0.0, -1.0) *
         std::polar(1.0, -omega * fit.ell_eff / kSpeedOfLight) *
         std::sqrt(fit.kappa_m / (2.0 * std::numbers::pi)) * sinc(arg);
}

namespace detail {

// Hot-path state layout: scalars plus split real/imaginary continuum.
struct AmpSoA {
  cplx g{0.0}, e{0.0}, f10{0.0};
  std::vector<double> x, y;

  void resize(std::size_t n) {
    x.assign(n, 0.0);
    y.assign(n, 0.0);
  }
  double continuum_norm() const {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      s0 += x[j] * x[j] + y[j] * y[j];
      s1 += x[j + 1] * x[j + 1] + y[j + 1] * y[j + 1];
      s2 += x[j + 2] * x[j + 2] + y[j + 2] * y[j + 2];
      s3 += x[j + 3] * x[j + 3] + y[j + 3] * y[j + 3];
    }
    for (; j < n; ++j) s0 += x[j] * x[j] + y[j] * y[j];
    return (s0 + s1) + (s2 + s3);
  }
};

inline void load(const SimState& s, AmpSoA& a) {
  a.g = s.c_g;
  a.e = s.c_e;
  a.f10 = s.c_f10;
  a.resize(s.c.size());
  for (std::size_t j = 0; j < s.c.size(); ++j) {
    a.x[j] = s.c[j].real();
    a.y[j] = s.c[j].imag();
  }
}

inline void store(const AmpSoA& a, Representation rep, double t, SimState& s) {
  s.rep = rep;
  s.t = t;
  s.c_g = a.g;
  s.c_e = a.e;
  s.c_f10 = a.f10;
  s.c.resize(a.x.size());
  for (std::size_t j = 0; j < a.x.size(); ++j) s.c[j] = cplx(a.x[j], a.y[j]);
}

// Fixed-order two-lane reduction of sum k_j c_j.
inline cplx coupled_sum(const std::vector<double>& kr,
                        const std::vector<double>& ki,
                        const std::vector<double>& x,
                        const std::vector<double>& y) {
  double r0 = 0, r1 = 0, i0 = 0, i1 = 0;
  const std::size_t n = x.size();
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    r0 += kr[j] * x[j] - ki[j] * y[j];
    i0 += kr[j] * y[j] + ki[j] * x[j];
    r1 += kr[j + 1] * x[j + 1] - ki[j + 1] * y[j + 1];
    i1 += kr[j + 1] * y[j + 1] + ki[j + 1] * x[j + 1];
  }
  for (; j < n; ++j) {
    r0 += kr[j] * x[j] - ki[j] * y[j];
    i0 += kr[j] * y[j] + ki[j] * x[j];
  }
  return {r0 + r1, i0 + i1};
}

// Fixed-order four-lane reduction of sum conj(k_j) c_j.
inline cplx coupled_sum_conj(const std::vector<double>& kr,
                             const std::vector<double>& ki,
                             const std::vector<double>& x,
                             const std::vector<double>& y) {
  double r0 = 0, r1 = 0, r2 = 0, r3 = 0;
  double i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  const std::size_t n = x.size();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    r0 += kr[j] * x[j] + ki[j] * y[j];
    i0 += kr[j] * y[j] - ki[j] * x[j];
    r1 += kr[j + 1] * x[j + 1] + ki[j + 1] * y[j + 1];
    i1 += kr[j + 1] * y[j + 1] - ki[j + 1] * x[j + 1];
    r2 += kr[j + 2] * x[j + 2] + ki[j + 2] * y[j + 2];
    i2 += kr[j + 2] * y[j + 2] - ki[j + 2] * x[j + 2];
    r3 += kr[j + 3] * x[j + 3] + ki[j + 3] * y[j + 3];
    i3 += kr[j + 3] * y[j + 3] - ki[j + 3] * x[j + 3];
  }
  for (; j < n; ++j) {
    r0 += kr[j] * x[j] + ki[j] * y[j];
    i0 += kr[j] * y[j] - ki[j] * x[j];
  }
  return {(r0 + r1) + (r2 + r3), (i0 + i1) + (i2 + i3)};
}

}  // namespace detail

// ----------------------------------------------------------------------
// True-mode system: d/dt of (c_g, c_e, {c_j}).
//   i c_g' = Omega c_e
//   i c_e' = Delta c_e + Omega c_g + i sum_j k_j c_j
//   i c_j' = (omega_j + omega_fg - omega_L) c_j - i conj(k_j) c_e
// with k_j = sqrt(w_j) eta(omega_j).
class TrueModeSystem {
 public:
  // Couplings use the exact tabulated T(omega); `surrogate` switches to the
  // fitted Lorentzian instead, for sensitivity analysis.
  TrueModeSystem(const AtomParams& atom, const ResponseTable& table,
                 const FrequencyGrid& grid,
                 std::optional<ResonanceFit> surrogate = std::nullopt)
      : atom_(atom), grid_(grid) {
    validate(atom, table.spec.ell_c);
    const std::size_t n = grid_.count();
    det_.resize(n);
    kr_.resize(n);
    ki_.resize(n);
    max_phase_ = std::abs(atom_.delta);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = grid_.nodes[j];
      det_[j] = w + atom_.omega_fg - atom_.omega_L;
      cplx k;
      if (surrogate) {
        const double ell_c = table.spec.ell_c;
        k = cplx(0.0, 1.0) * atom_.dipole_scale *
            std::sqrt(w / std::numbers::pi) *
            std::polar(1.0, w * ell_c / kSpeedOfLight) *
            std::sin(w * (atom_.x_A + ell_c) / kSpeedOfLight) *
            lorentzian_term(*surrogate, w);
      } else {
        k = eta(w, atom_, table);
      }
      k *= std::sqrt(grid_.weights[j]);
      kr_[j] = k.real();
      ki_[j] = k.imag();
      max_phase_ = std::max(max_phase_, std::abs(det_[j]));
    }
    max_phase_ = std::max(max_phase_, std::abs(atom_.drive.amplitude));
    max_phase_ = std::max(max_phase_, 1e-3);
  }

  Representation representation() const { return Representation::true_mode; }
  const FrequencyGrid& grid() const { return grid_; }
  const AtomParams& atom() const { return atom_; }
  double max_phase() const { return max_phase_; }

  SimState initial_state(InitialPreset preset) const {
    SimState s;
    s.rep = Representation::true_mode;
    s.c.assign(grid_.count(), cplx(0.0));
    if (preset == InitialPreset::atom_excited)
      s.c_e = 1.0;
    else
      s.c_g = 1.0;
    return s;
  }

  void rhs(double t, const detail::AmpSoA& s, detail::AmpSoA& d) const {
    const double om = atom_.drive(t);
    const cplx i1(0.0, 1.0);
    d.g = -i1 * (om * s.e);
    d.e = -i1 * (atom_.delta * s.e + om * s.g) +
          detail::coupled_sum(kr_, ki_, s.x, s.y);
    d.f10 = 0.0;
    const double er = s.e.real(), ei = s.e.imag();
    const std::size_t n = s.x.size();
    d.x.resize(n);
    d.y.resize(n);
    const double* __restrict det = det_.data();
    const double* __restrict kr = kr_.data();
    const double* __restrict ki = ki_.data();
    const double* __restrict sx = s.x.data();
    const double* __restrict sy = s.y.data();
    double* __restrict dx = d.x.data();
    double* __restrict dy = d.y.data();
    for (std::size_t j = 0; j < n; ++j) {
      // c_j' = -i det_j c_j - conj(k_j) e
      dx[j] = det[j] * sy[j] - (kr[j] * er + ki[j] * ei);
      dy[j] = -det[j] * sx[j] - (kr[j] * ei - ki[j] * er);
    }
  }

  SimState derivative(const SimState& state) const {
    if (state.rep != Representation::true_mode)
      throw std::logic_error("TrueModeSystem: state is not true-mode");
    detail::AmpSoA s, d;
    detail::load(state, s);
    d.resize(s.x.size());
    rhs(state.t, s, d);
    SimState out;
    detail::store(d, Representation::true_mode, state.t, out);
    return out;
  }

 private:
  AtomParams atom_;
  FrequencyGrid grid_;
  std::vector<double> det_, kr_, ki_;
  double max_phase_ = 0.0;
};

// ----------------------------------------------------------------------
// Inside-outside system: d/dt of (c_g, c_e, c_f10, {c_j}).
//   i c_g'   = Omega c_e
//   i c_e'   = Delta c_e + Omega c_g + g c_f10
//   i c_f10' = (omega_fg + omega_m - omega_L) c_f10 + g c_e
//              + sum_j conj(k_j) c_j
//   i c_j'   = (omega_j + omega_fg - omega_L) c_j + k_j c_f10
// with k_j = sqrt(w_j) V_m(omega_j).
class InsideOutsideSystem {
 public:
  InsideOutsideSystem(const AtomParams& atom, const ResonanceFit& fit,
                      double ell_c, const FrequencyGrid& grid)
      : atom_(atom), fit_(fit), grid_(grid) {
    validate(atom, ell_c);
    g_ = g_m(fit_, atom_, ell_c);
    nu_m_ = atom_.omega_fg + fit_.omega_m - atom_.omega_L;
    const std::size_t n = grid_.count();
    det_.resize(n);
    kr_.resize(n);
    ki_.resize(n);
    max_phase_ = std::max(std::abs(atom_.delta), std::abs(nu_m_));
    for (std::size_t j = 0; j < n; ++j) {
      const double w = grid_.nodes[j];
      det_[j] = w + atom_.omega_fg - atom_.omega_L;
      const cplx k = coupling_V(w, fit_) * std::sqrt(grid_.weights[j]);
      kr_[j] = k.real();
      ki_[j] = k.imag();
      max_phase_ = std::max(max_phase_, std::abs(det_[j]));
    }
    max_phase_ = std::max(max_phase_, std::abs(atom_.drive.amplitude));
    max_phase_ = std::max(max_phase_, 1e-3);
  }

  // Single retained mode: refuse overlapped Lorentzian sets up front, since
  // modes rebuilt from overlapped peaks do not form an orthogonal set.
  InsideOutsideSystem(const AtomParams& atom,
                      const std::vector<ResonanceFit>& fits, double ell_c,
                      const FrequencyGrid& grid)
      : InsideOutsideSystem(atom, select_mode(atom, fits), ell_c, grid) {}

  static const ResonanceFit& select_mode(const AtomParams& atom,
                                         const std::vector<ResonanceFit>& fits) {
    if (fits.empty())
      throw std::domain_error("InsideOutsideSystem: no fitted mode supplied");
    for (const ResonanceFit& f : fits) {
      if (std::isfinite(f.overlap_error) && f.overlap_error > 0.05)
        throw std::domain_error(
            "InsideOutsideSystem: overlapped resonances (overlap error > "
            "0.05); the retained-mode picture does not apply");
    }
    const double target = atom.delta + atom.omega_L - atom.omega_fg;
    const ResonanceFit* best = &fits.front();
    for (const ResonanceFit& f : fits)
      if (std::abs(f.omega_m - target) < std::abs(best->omega_m - target))
        best = &f;
    return *best;
  }

  Representation representation() const {
    return Representation::inside_outside;
  }
  const FrequencyGrid& grid() const { return grid_; }
  const AtomParams& atom() const { return atom_; }
  const ResonanceFit& fit() const { return fit_; }
  double coupling_g() const { return g_; }
  double mode_detuning() const { return nu_m_; }
  double max_phase() const { return max_phase_; }

  SimState initial_state(InitialPreset preset) const {
    SimState s;
    s.rep = Representation::inside_outside;
    s.c.assign(grid_.count(), cplx(0.0));
    if (preset == InitialPreset::atom_excited)
      s.c_e = 1.0;
    else
      s.c_g = 1.0;
    return s;
  }

  void rhs(double t, const detail::AmpSoA& s, detail::AmpSoA& d) const {
    const double om = atom_.drive(t);
    const cplx i1(0.0, 1.0);
    d.g = -i1 * (om * s.e);
    d.e = -i1 * (atom_.delta * s.e + om * s.g + g_ * s.f10);
    const cplx sum = detail::coupled_sum_conj(kr_, ki_, s.x, s.y);
    d.f10 = -i1 * (nu_m_ * s.f10 + g_ * s.e + sum);
    const double fr = s.f10.real(), fi = s.f10.imag();
    const std::size_t n = s.x.size();
    d.x.resize(n);
    d.y.resize(n);
    const double* __restrict det = det_.data();
    const double* __restrict kr = kr_.data();
    const double* __restrict ki = ki_.data();
    const double* __restrict sx = s.x.data();
    const double* __restrict sy = s.y.data();
    double* __restrict dx = d.x.data();
    double* __restrict dy = d.y.data();
    for (std::size_t j = 0; j < n; ++j) {
      // c_j' = -i det_j c_j - i k_j f10
      dx[j] = det[j] * sy[j] + (kr[j] * fi + ki[j] * fr);
      dy[j] = -det[j] * sx[j] - (kr[j] * fr - ki[j] * fi);
    }
  }

  SimState derivative(const SimState& state) const {
    if (state.rep != Representation::inside_outside)
      throw std::logic_error("InsideOutsideSystem: state is not inside-outside");
    detail::AmpSoA s, d;
    detail::load(state, s);
    d.resize(s.x.size());
    rhs(state.t, s, d);
    SimState out;
    detail::store(d, Representation::inside_outside, state.t, out);
    return out;
  }

 private:
  AtomParams atom_;
  ResonanceFit fit_;
  FrequencyGrid grid_;
  double g_ = 0.0;
  double nu_m_ = 0.0;
  std::vector<double> det_, kr_, ki_;
  double max_phase_ = 0.0;
};

// ----------------------------------------------------------------------
// Fixed-step RK4 integration with population snapshots.

struct Populations {
  double t = 0.0;
  double g = 0.0, e = 0.0, f10 = 0.0, cont = 0.0;
  double norm() const { return g + e + f10 + cont; }
};

struct IntegratorOptions {
  double t_max = 0.0;
  double dt = 0.0;                  // 0: auto, 0.1 / max phase
  std::size_t snapshot_stride = 0;  // 0: auto (~2000 snapshots)
  bool record_mode_series = false;  // keep c_f10 every step
  std::vector<double> state_times;  // ascending; full-state snapshots
};

struct Trajectory {
  std::vector<Populations> pops;
  std::vector<cplx> f10_series;
  double f10_series_dt = 0.0;
  std::vector<SimState> states;  // at (nearest steps to) requested times
  SimState final_state;
  double norm_drift_max = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
};

namespace detail {

inline void axpy(const AmpSoA& y, double a, const AmpSoA& k, AmpSoA& out) {
  out.g = y.g + a * k.g;
  out.e = y.e + a * k.e;
  out.f10 = y.f10 + a * k.f10;
  const std::size_t n = y.x.size();
  out.x.resize(n);
  out.y.resize(n);
  const double* __restrict yx = y.x.data();
  const double* __restrict yy = y.y.data();
  const double* __restrict kx = k.x.data();
  const double* __restrict ky = k.y.data();
  double* __restrict ox = out.x.data();
  double* __restrict oy = out.y.data();
  for (std::size_t j = 0; j < n; ++j) {
    ox[j] = yx[j] + a * kx[j];
    oy[j] = yy[j] + a * ky[j];
  }
}

inline void rk4_combine(AmpSoA& y, double dt, const AmpSoA& k1, const AmpSoA& k2,
                        const AmpSoA& k3, const AmpSoA& k4) {
  const double w = dt / 6.0;
  y.g += w * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
  y.e += w * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
  y.f10 += w * (k1.f10 + 2.0 * k2.f10 + 2.0 * k3.f10 + k4.f10);
  const std::size_t n = y.x.size();
  double* __restrict yx = y.x.data();
  double* __restrict yy = y.y.data();
  const double* __restrict ax = k1.x.data();
  const double* __restrict ay = k1.y.data();
  const double* __restrict bx = k2.x.data();
  const double* __restrict by = k2.y.data();
  const double* __restrict cx = k3.x.data();
  const double* __restrict cy = k3.y.data();
  const double* __restrict ex = k4.x.data();
  const double* __restrict ey = k4.y.data();
  for (std::size_t j = 0; j < n; ++j) {
    yx[j] += w * (ax[j] + 2.0 * bx[j] + 2.0 * cx[j] + ex[j]);
    yy[j] += w * (ay[j] + 2.0 * by[j] + 2.0 * cy[j] + ey[j]);
  }
}

}  // namespace detail

template <class System>
Trajectory integrate(const System& sys, const SimState& initial,
                     const IntegratorOptions& opt) {
  if (initial.rep != sys.representation())
    throw std::logic_error("integrate: state/system representation mismatch");
  if (initial.c.size() != sys.grid().count())
    throw std::logic_error("integrate: state size does not match the grid");
  if (!(opt.t_max > 0.0)) throw ConfigError("integrate: t_max must be > 0");

  const double recurrence = sys.grid().recurrence_time();
  if (!(opt.t_max < 0.25 * recurrence))
    throw ConfigError(
        "integrate: t_max exceeds a quarter of the grid recurrence time " +
        std::to_string(0.25 * recurrence) + "; refine the frequency grid");

  const double dt_bound = 0.1 / sys.max_phase();
  double dt = opt.dt > 0.0 ? opt.dt : dt_bound;
  if (dt > dt_bound * (1.0 + 1e-12))
    throw ConfigError("integrate: dt exceeds the phase-resolution bound " +
                      std::to_string(dt_bound));

  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.t_max / dt - 1e-9)));
  dt = opt.t_max / static_cast<double>(steps);

  std::size_t stride = opt.snapshot_stride;
  if (stride == 0) stride = std::max<std::size_t>(1, steps / 2000);

  Trajectory traj;
  traj.dt = dt;
  traj.steps = steps;

  detail::AmpSoA y, k1, k2, k3, k4, tmp;
  detail::load(initial, y);
  const std::size_t n = y.x.size();
  k1.resize(n);
  k2.resize(n);
  k3.resize(n);
  k4.resize(n);
  tmp.resize(n);

  const double norm0 = std::norm(y.g) + std::norm(y.e) + std::norm(y.f10) +
                       y.continuum_norm();

  auto snapshot = [&](std::size_t step) {
    const double t = static_cast<double>(step) * dt;
    Populations p;
    p.t = t;
    p.g = std::norm(y.g);
    p.e = std::norm(y.e);
    p.f10 = std::norm(y.f10);
    p.cont = y.continuum_norm();
    if (!std::isfinite(p.norm()))
      throw NumericalError("integrate: non-finite amplitudes",
                           traj.pops.empty() ? 0.0 : traj.pops.back().t);
    traj.norm_drift_max =
        std::max(traj.norm_drift_max, std::abs(p.norm() - norm0));
    traj.pops.push_back(p);
  };

  if (opt.record_mode_series) {
    traj.f10_series.reserve(steps + 1);
    traj.f10_series_dt = dt;
    traj.f10_series.push_back(y.f10);
  }

  std::size_t next_state = 0;
  auto maybe_state_snapshot = [&](std::size_t step) {
    const double t = static_cast<double>(step) * dt;
    while (next_state < opt.state_times.size() &&
           t >= opt.state_times[next_state] - 0.5 * dt) {
      SimState s;
      detail::store(y, sys.representation(), t, s);
      traj.states.push_back(std::move(s));
      ++next_state;
    }
  };

  snapshot(0);
  maybe_state_snapshot(0);
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    sys.rhs(t, y, k1);
    detail::axpy(y, 0.5 * dt, k1, tmp);
    sys.rhs(t + 0.5 * dt, tmp, k2);
    detail::axpy(y, 0.5 * dt, k2, tmp);
    sys.rhs(t + 0.5 * dt, tmp, k3);
    detail::axpy(y, dt, k3, tmp);
    sys.rhs(t + dt, tmp, k4);
    detail::rk4_combine(y, dt, k1, k2, k3, k4);

    const std::size_t done = step + 1;
    if (opt.record_mode_series) traj.f10_series.push_back(y.f10);
    if (done % stride == 0 || done == steps) snapshot(done);
    maybe_state_snapshot(done);
  }

  detail::store(y, sys.representation(), opt.t_max, traj.final_state);
  return traj;
}

}  // namespace cavitymodes
