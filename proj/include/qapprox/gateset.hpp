#pragma once

// Fundamental re-uploading gates and the layered circuits built from them.
//
// Parameter layout per layer:
//   Fourier: [omega, alpha, beta, phi, lambda]
//   UAT:     [omega_1 .. omega_m, alpha, phi]

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qapprox/linalg.hpp"

namespace qapprox {

struct FourierParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
};

struct UatParams {
  std::vector<double> omega;
  double alpha = 0.0;
  double phi = 0.0;
};

enum class GateFamily { Fourier, Uat };
enum class InitialState { Zero, Plus };

inline std::string_view to_string(GateFamily f) {
  return f == GateFamily::Fourier ? "fourier" : "uat";
}
inline std::string_view to_string(InitialState s) {
  return s == InitialState::Zero ? "zero" : "plus";
}

inline State2 make_state(InitialState s) {
  return s == InitialState::Zero ? State2::zero() : State2::plus();
}

struct CircuitModel {
  GateFamily family = GateFamily::Uat;
  std::size_t layers = 1;
  std::size_t input_dim = 1;
  InitialState initial_state = InitialState::Plus;

  /// Fourier circuits start from |0>.
  static CircuitModel fourier(std::size_t layers) {
    return CircuitModel{GateFamily::Fourier, layers, 1, InitialState::Zero};
  }
  /// UAT circuits start from |+> = H|0>.
  static CircuitModel uat(std::size_t layers, std::size_t input_dim = 1) {
    return CircuitModel{GateFamily::Uat, layers, input_dim, InitialState::Plus};
  }

  void validate() const {
    if (layers < 1) throw std::invalid_argument("CircuitModel: layers must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("CircuitModel: input_dim must be >= 1");
    if (family == GateFamily::Fourier && input_dim != 1) {
      throw std::invalid_argument("CircuitModel: Fourier gates take a single input");
    }
  }

  std::size_t params_per_layer() const {
    return family == GateFamily::Fourier ? 5 : input_dim + 2;
  }
  std::size_t parameter_count() const { return layers * params_per_layer(); }
};

/// Flat parameter storage with a per-layer view.
class ParameterVector {
 public:
  ParameterVector() = default;

  explicit ParameterVector(const CircuitModel& model)
      : values_(model.parameter_count(), 0.0), per_layer_(model.params_per_layer()) {
    model.validate();
  }

  ParameterVector(const CircuitModel& model, std::vector<double> values)
      : values_(std::move(values)), per_layer_(model.params_per_layer()) {
    model.validate();
    if (values_.size() != model.parameter_count()) {
      throw std::invalid_argument("ParameterVector: expected " +
                                  std::to_string(model.parameter_count()) +
                                  " values, got " + std::to_string(values_.size()));
    }
  }

  std::size_t size() const { return values_.size(); }
  std::size_t per_layer() const { return per_layer_; }
  std::size_t layers() const { return per_layer_ == 0 ? 0 : values_.size() / per_layer_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& vector() const { return values_; }

  std::span<const double> layer(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * per_layer_, per_layer_);
  }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool matches(const CircuitModel& model) const {
    return per_layer_ == model.params_per_layer() && values_.size() == model.parameter_count();
  }

 private:
  std::vector<double> values_;
  std::size_t per_layer_ = 0;
};

inline FourierParams fourier_layer(std::span<const double> slice) {
  return {slice[0], slice[1], slice[2], slice[3], slice[4]};
}

inline UatParams uat_layer(std::span<const double> slice) {
  const std::size_t m = slice.size() - 2;
  return {std::vector<double>(slice.begin(), slice.begin() + static_cast<std::ptrdiff_t>(m)),
          slice[m], slice[m + 1]};
}

/// Rz(alpha + beta) Ry(2 lambda) Rz(alpha - beta) Rz(2 omega x) Ry(2 phi).
inline Unitary2 build_fourier_gate(double x, const FourierParams& p) {
  require_finite(x, "build_fourier_gate: x");
  return rotation_z(p.alpha + p.beta) * rotation_y(2.0 * p.lambda) *
         rotation_z(p.alpha - p.beta) * rotation_z(2.0 * p.omega * x) *
         rotation_y(2.0 * p.phi);
}

/// Rz(2 (omega . x + alpha)) Ry(2 phi).
inline Unitary2 build_uat_gate(std::span<const double> x, const UatParams& p) {
  if (x.size() != p.omega.size()) {
    throw std::invalid_argument("build_uat_gate: input has dimension " +
                                std::to_string(x.size()) + ", weights have " +
                                std::to_string(p.omega.size()));
  }
  double arg = p.alpha;
  for (std::size_t i = 0; i < x.size(); ++i) arg += p.omega[i] * x[i];
  return rotation_z(2.0 * arg) * rotation_y(2.0 * p.phi);
}

inline void check_layout(const CircuitModel& model, const ParameterVector& params,
                         std::span<const double> x) {
  model.validate();
  if (!params.matches(model)) {
    throw std::invalid_argument("parameter layout does not match the circuit model (" +
                                std::to_string(params.size()) + " values for " +
                                std::to_string(model.parameter_count()) + " slots)");
  }
  if (x.size() != model.input_dim) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.input_dim));
  }
}

/// U_k ... U_2 U_1: layer 1 acts on the state first.
inline Unitary2 circuit_unitary(const CircuitModel& model, const ParameterVector& params,
                                std::span<const double> x) {
  check_layout(model, params, x);
  Unitary2 u = Unitary2::identity();
  for (std::size_t l = 0; l < model.layers; ++l) {
    const auto slice = params.layer(l);
    const Unitary2 g = model.family == GateFamily::Fourier
                           ? build_fourier_gate(x[0], fourier_layer(slice))
                           : build_uat_gate(x, uat_layer(slice));
    u = g * u;
  }
  return u;
}

/// <1| U |0>, independent of the model's benchmark initial state.
inline Complex amplitude_10(const CircuitModel& model, const ParameterVector& params,
                            std::span<const double> x) {
  return circuit_unitary(model, params, x).m10;
}

// ---------------------------------------------------------------------------
// Rotation layout: the circuit flattened into single-axis rotations in time
// order, each angle an affine function of the parameters. Used by the loss
// engine and the parameter-shift gradient.

enum class Axis { Y, Z };

struct RotationTerm {
  std::size_t param = 0;
  double factor = 0.0;
  /// Input coordinate multiplying the factor, or -1 for none.
  int input = -1;
};

struct RotationSlot {
  Axis axis = Axis::Z;
  std::size_t first_term = 0;
  std::size_t term_count = 0;
};

class RotationLayout {
 public:
  explicit RotationLayout(const CircuitModel& model) {
    model.validate();
    const std::size_t per = model.params_per_layer();
    for (std::size_t l = 0; l < model.layers; ++l) {
      const std::size_t base = l * per;
      if (model.family == GateFamily::Fourier) {
        add(Axis::Y, {{base + 3, 2.0, -1}});                    // Ry(2 phi)
        add(Axis::Z, {{base + 0, 2.0, 0}});                     // Rz(2 omega x)
        add(Axis::Z, {{base + 1, 1.0, -1}, {base + 2, -1.0, -1}});  // Rz(alpha - beta)
        add(Axis::Y, {{base + 4, 2.0, -1}});                    // Ry(2 lambda)
        add(Axis::Z, {{base + 1, 1.0, -1}, {base + 2, 1.0, -1}});   // Rz(alpha + beta)
      } else {
        const std::size_t m = model.input_dim;
        add(Axis::Y, {{base + m + 1, 2.0, -1}});  // Ry(2 phi)
        std::vector<RotationTerm> z;
        for (std::size_t j = 0; j < m; ++j) z.push_back({base + j, 2.0, static_cast<int>(j)});
        z.push_back({base + m, 2.0, -1});
        add(Axis::Z, z);  // Rz(2 (omega . x + alpha))
      }
    }
  }

  std::span<const RotationSlot> slots() const { return slots_; }
  std::span<const RotationTerm> terms(const RotationSlot& s) const {
    return std::span<const RotationTerm>(terms_).subspan(s.first_term, s.term_count);
  }

  static double coefficient(const RotationTerm& t, std::span<const double> x) {
    return t.input < 0 ? t.factor : t.factor * x[static_cast<std::size_t>(t.input)];
  }

  double angle(const RotationSlot& s, std::span<const double> params,
               std::span<const double> x) const {
    double a = 0.0;
    for (const auto& t : terms(s)) a += coefficient(t, x) * params[t.param];
    return a;
  }

 private:
  void add(Axis axis, std::vector<RotationTerm> t) {
    slots_.push_back({axis, terms_.size(), t.size()});
    terms_.insert(terms_.end(), t.begin(), t.end());
  }

  std::vector<RotationSlot> slots_;
  std::vector<RotationTerm> terms_;
};

inline State2 rotate(const State2& s, Axis axis, double angle) {
  if (axis == Axis::Z) {
    const Complex p = std::polar(1.0, 0.5 * angle);
    return {s.a0 * p, s.a1 * std::conj(p)};
  }
  const double c = std::cos(0.5 * angle);
  const double sn = std::sin(0.5 * angle);
  return {c * s.a0 - sn * s.a1, sn * s.a0 + c * s.a1};
}

inline Unitary2 rotation(Axis axis, double angle) {
  return axis == Axis::Z ? rotation_z(angle) : rotation_y(angle);
}

}  // namespace qapprox
