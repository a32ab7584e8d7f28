// Shared constants, small math helpers and error types.
//
// Unit system used throughout the library: c = 1, l0 = 1, hbar = eps0 = 1
// and unit transverse mode area. Lengths are measured in l0, frequencies in
// c/l0, so the half-wave spacing is lambda0 = 2 and the mirror design
// frequency is omega_c = pi.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cavitymodes {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 1.0;
inline constexpr double kLambda0 = 2.0;
inline constexpr double kOmegaDesign = std::numbers::pi;  // 2*pi*c/lambda0

// Layer index calibrated so that the quarter-wave stack with N = 8 pairs and
// mirror spacing 10*l0 fits to an effective reflectivity of 0.953. Obtained
// with the `calibrate-index` CLI subcommand; see README.
inline constexpr double kCalibratedIndex = 1.2487822905632878;

inline double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

inline double sqr(double x) { return x * x; }

// Raised for malformed run configurations (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for output/filesystem failures (CLI exit code 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an integration produces non-finite values (CLI exit code 4).
struct NumericalError : std::runtime_error {
  double last_good_time;
  NumericalError(const std::string& what, double t)
      : std::runtime_error(what), last_good_time(t) {}
};

inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x))
    throw std::domain_error(std::string(name) + ": non-finite value");
}

}  // namespace cavitymodes
