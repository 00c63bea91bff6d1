#pragma once

// Single-qubit state-vector arithmetic: 2-vectors, 2x2 unitaries, the
// rotation gates and Pauli expectation values.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qapprox {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Tolerance for identities that hold in exact arithmetic.
inline constexpr double kExactTol = 1e-10;
/// Tolerance for validating user-supplied states and data.
inline constexpr double kInputTol = 1e-6;

inline void require_finite(double v, std::string_view what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + ": non-finite value");
  }
}

/// Amplitudes of |0> and |1>.
struct State2 {
  Complex a0{1.0, 0.0};
  Complex a1{0.0, 0.0};

  static State2 zero() { return {Complex{1.0, 0.0}, Complex{0.0, 0.0}}; }
  static State2 one() { return {Complex{0.0, 0.0}, Complex{1.0, 0.0}}; }
  static State2 plus() {
    const double h = 1.0 / std::sqrt(2.0);
    return {Complex{h, 0.0}, Complex{h, 0.0}};
  }

  double norm() const { return std::sqrt(std::norm(a0) + std::norm(a1)); }
};

struct Unitary2 {
  Complex m00{1.0, 0.0};
  Complex m01{0.0, 0.0};
  Complex m10{0.0, 0.0};
  Complex m11{1.0, 0.0};

  static Unitary2 identity() { return {}; }

  Unitary2 adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }
};

/// Largest elementwise deviation between two matrices.
inline double max_abs_diff(const Unitary2& a, const Unitary2& b) {
  return std::max({std::abs(a.m00 - b.m00), std::abs(a.m01 - b.m01),
                   std::abs(a.m10 - b.m10), std::abs(a.m11 - b.m11)});
}

/// max |U^dagger U - I|, elementwise.
inline double unitarity_defect(const Unitary2& u) {
  return max_abs_diff(u.adjoint() * u, Unitary2::identity());
}

/// Ry(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
inline Unitary2 rotation_y(double theta) {
  require_finite(theta, "rotation_y");
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  return {Complex{c, 0.0}, Complex{-s, 0.0}, Complex{s, 0.0}, Complex{c, 0.0}};
}

/// Rz(theta) = diag(e^{+i theta/2}, e^{-i theta/2}).
///
/// The positive phase on |0> is what makes the five-rotation Fourier gate
/// expand to the closed-form matrix used by the coefficient recursion.
inline Unitary2 rotation_z(double theta) {
  require_finite(theta, "rotation_z");
  const Complex p = std::polar(1.0, 0.5 * theta);
  return {p, Complex{}, Complex{}, std::conj(p)};
}

inline State2 apply(const Unitary2& u, const State2& s) {
  return {u.m00 * s.a0 + u.m01 * s.a1, u.m10 * s.a0 + u.m11 * s.a1};
}

enum class Observable { X, Y, Z };

inline std::string_view to_string(Observable o) {
  switch (o) {
    case Observable::X: return "X";
    case Observable::Y: return "Y";
    case Observable::Z: return "Z";
  }
  return "?";
}

/// Expectation without the normalization check; for hot loops whose states
/// come straight out of unitary evolution.
inline double expectation_unchecked(const State2& s, Observable obs) {
  switch (obs) {
    case Observable::Z: return std::norm(s.a0) - std::norm(s.a1);
    case Observable::X: return 2.0 * (std::conj(s.a0) * s.a1).real();
    case Observable::Y: return 2.0 * (std::conj(s.a0) * s.a1).imag();
  }
  return 0.0;
}

inline double expectation(const State2& s, Observable obs) {
  const double n = s.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kInputTol) {
    throw std::invalid_argument("expectation: state is not normalized (norm " +
                                std::to_string(n) + ")");
  }
  return expectation_unchecked(s, obs);
}

}  // namespace qapprox
