// Lambda-type emitter trapped inside the cavity.
//
// Levels: ground g, excited e, metastable f. The g-e transition is driven
// by a classical field Omega(t) detuned by Delta = omega_eg - omega_L; the
// e-f transition emits into the cavity. Amplitudes evolve in the frame
// rotating at omega_L, so continuum phases appear as omega + omega_fg -
// omega_L. dipole_scale is d_fe / sqrt(hbar eps0 c A).

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cavitymodes/common.hpp"

namespace cavitymodes {

enum class DriveShape { off, constant, gaussian };

struct Drive {
  DriveShape shape = DriveShape::off;
  double amplitude = 0.0;  // peak Rabi frequency Omega_0 (c/l0)
  double t0 = 0.0;         // gaussian center
  double tau = 1.0;        // gaussian width

  double operator()(double t) const {
    switch (shape) {
      case DriveShape::off:
        return 0.0;
      case DriveShape::constant:
        return amplitude;
      case DriveShape::gaussian: {
        const double u = (t - t0) / tau;
        return amplitude * std::exp(-0.5 * u * u);
      }
    }
    return 0.0;
  }

  // Time after which the pulse is negligible (for monotonicity diagnostics).
  double end_time() const {
    switch (shape) {
      case DriveShape::off:
        return 0.0;
      case DriveShape::constant:
        return std::numeric_limits<double>::infinity();
      case DriveShape::gaussian:
        return t0 + 5.0 * tau;
    }
    return 0.0;
  }
};

struct AtomParams {
  double dipole_scale = 0.0025;  // D = d_fe / sqrt(hbar eps0 c A)
  double x_A = -4.5;             // atom position (l0), -ell_c < x_A < 0
  double delta = 0.0;            // Delta = omega_eg - omega_L (c/l0)
  double omega_fg = 0.0;         // f-g splitting (c/l0)
  double omega_L = kOmegaDesign; // laser frequency (c/l0)
  Drive drive;
};

inline void validate(const AtomParams& a, double ell_c) {
  require_finite(a.dipole_scale, "AtomParams.dipole_scale");
  require_finite(a.x_A, "AtomParams.x_A");
  require_finite(a.delta, "AtomParams.delta");
  require_finite(a.omega_fg, "AtomParams.omega_fg");
  require_finite(a.omega_L, "AtomParams.omega_L");
  if (a.dipole_scale < 0.0)
    throw std::domain_error("AtomParams.dipole_scale: must be >= 0");
  if (!(a.x_A > -ell_c) || !(a.x_A < 0.0))
    throw std::domain_error("AtomParams.x_A: must satisfy -ell_c < x_A < 0");
  if (a.drive.shape == DriveShape::gaussian && !(a.drive.tau > 0.0))
    throw std::domain_error("AtomParams.drive.tau: must be > 0");
  require_finite(a.drive.amplitude, "AtomParams.drive.amplitude");
}

}  // namespace cavitymodes
