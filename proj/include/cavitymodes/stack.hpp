// One-dimensional cavity with a multilayer dielectric output mirror.
//
// Geometry: a perfect mirror sits at x = -ell_c, the stack occupies
// [0, s] with s = N*delta + (N-1)*alpha. Each of the N pairs is a dense
// layer (index n_high, thickness delta) followed by a vacuum spacer of
// thickness alpha; the trailing spacer merges with the outside vacuum, so
// the stack is dense-terminated on both faces and left-right symmetric.
//
// The complex response T(omega) is the ratio of the intracavity standing
// wave amplitude to the incoming amplitude, with the incoming wave phase
// referenced at the outer face of the stack. It is obtained by solving the
// boundary-value problem with 2x2 characteristic matrices acting on the
// state (E, E'/k), each of determinant one.

#pragma once

#include <algorithm>
#include <complex>
#include <utility>
#include <vector>

#include "cavitymodes/common.hpp"

namespace cavitymodes {

struct StackSpec {
  int n_pairs = 8;                      // N >= 0 dielectric pairs
  double n_high = kCalibratedIndex;     // dense-layer refractive index
  double delta = 0.5 / kCalibratedIndex;  // dense-layer thickness (l0)
  double alpha = 0.5;                   // spacer thickness (l0)
  double ell_c = 10.0;                  // mirror spacing (l0)
  double omega_design = kOmegaDesign;   // best-reflection frequency (c/l0)

  // Quarter-wave pair at the design wavelength: n*delta = alpha = lambda0/4.
  static StackSpec quarter_wave(int n_pairs, double ell_c,
                                double n_high = kCalibratedIndex) {
    StackSpec s;
    s.n_pairs = n_pairs;
    s.n_high = n_high;
    s.delta = kLambda0 / 4.0 / n_high;
    s.alpha = kLambda0 / 4.0;
    s.ell_c = ell_c;
    return s;
  }

  double stack_thickness() const {
    if (n_pairs < 1) return 0.0;
    return n_pairs * delta + (n_pairs - 1) * alpha;
  }
};

inline void validate(const StackSpec& s) {
  require_finite(s.n_high, "StackSpec.n_high");
  require_finite(s.delta, "StackSpec.delta");
  require_finite(s.alpha, "StackSpec.alpha");
  require_finite(s.ell_c, "StackSpec.ell_c");
  if (s.n_pairs < 0) throw std::domain_error("StackSpec.n_pairs: must be >= 0");
  if (s.ell_c <= 0.0) throw std::domain_error("StackSpec.ell_c: must be > 0");
  if (s.n_pairs >= 1) {
    if (s.delta <= 0.0) throw std::domain_error("StackSpec.delta: must be > 0");
    if (s.alpha <= 0.0) throw std::domain_error("StackSpec.alpha: must be > 0");
    if (s.n_high <= 1.0)
      throw std::domain_error("StackSpec.n_high: must be > 1");
  }
}

// Spectral reflection/transmission of a free-standing dielectric slab,
// reference planes at the slab faces (Airy formulas).
struct SlabOptics {
  cplx r1;
  cplx t1;
};

inline SlabOptics slab_optics(double n_high, double delta, double omega) {
  require_finite(n_high, "slab_optics.n_high");
  require_finite(delta, "slab_optics.delta");
  require_finite(omega, "slab_optics.omega");
  if (n_high < 1.0) throw std::domain_error("slab_optics: n_high must be >= 1");
  if (delta < 0.0) throw std::domain_error("slab_optics: delta must be >= 0");
  if (omega <= 0.0) throw std::domain_error("slab_optics: omega must be > 0");
  const double r01 = (1.0 - n_high) / (1.0 + n_high);
  const double beta = n_high * omega * delta / kSpeedOfLight;
  const cplx e2ib = std::polar(1.0, 2.0 * beta);
  const cplx den = 1.0 - r01 * r01 * e2ib;
  SlabOptics s;
  s.r1 = r01 * (1.0 - e2ib) / den;
  s.t1 = (1.0 - r01 * r01) * std::polar(1.0, beta) / den;
  return s;
}

namespace detail {

// Characteristic matrix of a homogeneous layer acting on (E, E'/k); real
// entries, determinant one.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double det() const { return a * d - b * c; }
  Mat2 inv() const { return {d, -b, -c, a}; }  // valid for det = 1
};

inline Mat2 layer_matrix(double n, double thickness, double omega) {
  const double beta = n * omega * thickness / kSpeedOfLight;
  const double cb = std::cos(beta), sb = std::sin(beta);
  return {cb, sb / n, -n * sb, cb};
}

struct Layer {
  double index;
  double thickness;
};

inline std::vector<Layer> layer_sequence(const StackSpec& s) {
  std::vector<Layer> seq;
  seq.reserve(std::max(0, 2 * s.n_pairs - 1));
  for (int i = 0; i < s.n_pairs; ++i) {
    seq.push_back({s.n_high, s.delta});
    if (i + 1 < s.n_pairs) seq.push_back({1.0, s.alpha});
  }
  return seq;
}

inline Mat2 stack_matrix(const StackSpec& s, double omega) {
  Mat2 m;
  for (int i = 0; i < s.n_pairs; ++i) {
    m = layer_matrix(s.n_high, s.delta, omega) * m;
    if (i + 1 < s.n_pairs) m = layer_matrix(1.0, s.alpha, omega) * m;
  }
  return m;
}

// Intracavity/incoming ratio for a precomputed stack matrix.
inline cplx response_from_matrix(const Mat2& m, double ell_c, double omega) {
  const double k = omega / kSpeedOfLight;
  const double sl = std::sin(k * ell_c), cl = std::cos(k * ell_c);
  const double p = m.a * sl + m.b * cl;
  const double q = m.c * sl + m.d * cl;
  return cplx(0.0, 1.0) * std::polar(1.0, -k * ell_c) / cplx(p, q);
}

// Outgoing/incoming coefficient from the same boundary-value problem, both
// referenced at the outer stack face. Equals exp(2 i omega ell_c / c) T/T*
// for a lossless stack; kept as an independent route for property tests.
inline cplx outgoing_from_matrix(const Mat2& m, const StackSpec& s,
                                 double omega) {
  const double k = omega / kSpeedOfLight;
  const cplx t = response_from_matrix(m, s.ell_c, omega);
  // amplitude of the standing wave: A = 2 i e^{i k ell_c} T
  const cplx amp = 2.0 * cplx(0.0, 1.0) * std::polar(1.0, k * s.ell_c) * t;
  const double sl = std::sin(k * s.ell_c), cl = std::cos(k * s.ell_c);
  const cplx e_face = amp * (m.a * sl + m.b * cl);
  const cplx de_face = amp * (m.c * sl + m.d * cl);
  // outside field G e^{ik(x-s)} - e^{-ik(x-s)} matched at the face
  return 0.5 * (e_face + de_face / cplx(0.0, 1.0));
}

}  // namespace detail

inline cplx response_at(const StackSpec& spec, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw std::domain_error("response: omega must be positive and finite");
  return detail::response_from_matrix(detail::stack_matrix(spec, omega),
                                      spec.ell_c, omega);
}

struct ResponseTable {
  std::vector<double> grid;    // ascending frequencies (c/l0)
  std::vector<cplx> values;    // T(omega_j)
  StackSpec spec;

  double min_omega() const { return grid.front(); }
  double max_omega() const { return grid.back(); }

  bool contains(double omega) const {
    return omega >= grid.front() && omega <= grid.back();
  }

  // Linear interpolation on real and imaginary parts.
  cplx value_at(double omega) const {
    if (!contains(omega))
      throw std::out_of_range("ResponseTable: omega outside tabulated grid");
    auto it = std::lower_bound(grid.begin(), grid.end(), omega);
    if (it == grid.begin()) return values.front();
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double u = (omega - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] + u * (values[hi] - values[lo]);
  }
};

inline ResponseTable response(const StackSpec& spec, std::vector<double> grid) {
  validate(spec);
  if (grid.empty()) throw std::domain_error("response: empty frequency grid");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] > 0.0) || !std::isfinite(grid[j]))
      throw std::domain_error("response: grid must be positive and finite");
    if (j > 0 && grid[j] <= grid[j - 1])
      throw std::domain_error("response: grid must be strictly increasing");
  }
  ResponseTable table;
  table.spec = spec;
  table.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    table.values[j] = response_at(spec, grid[j]);
  table.grid = std::move(grid);
  return table;
}

// Unit-modulus factor relating outgoing to incoming waves outside the stack.
inline cplx outside_phase(const ResponseTable& table, double omega) {
  const cplx t = table.value_at(omega);  // throws out_of_range off-grid
  const double k = omega / kSpeedOfLight;
  return std::polar(1.0, 2.0 * k * table.spec.ell_c) * t / std::conj(t);
}

}  // namespace cavitymodes
