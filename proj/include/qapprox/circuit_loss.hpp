#pragma once

// Chi-square loss of a re-uploading circuit over a dataset, with its exact
// gradient from the two-point parameter-shift rule.
//
// Each circuit rotation R(g) = exp(-+ i g P / 2) has dE/dg =
// [E(g + pi/2) - E(g - pi/2)] / 2. A parameter's derivative is the sum over
// the rotations it feeds, weighted by its coefficient in that rotation's
// angle (2 for phi, lambda and alpha-in-UAT; +-1 for the Fourier alpha and
// beta; 2 x_j for input weights).

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qapprox/encodings.hpp"
#include "qapprox/gateset.hpp"
#include "qapprox/objective.hpp"

namespace qapprox {

class CircuitLoss {
 public:
  CircuitLoss(CircuitModel model, Dataset data, Benchmark benchmark)
      : model_(model),
        data_(std::make_shared<const Dataset>(std::move(data))),
        benchmark_(benchmark),
        layout_(std::make_shared<const RotationLayout>(model)) {
    data_->validate(benchmark_);
    if (data_->input_dim() != model_.input_dim) {
      throw std::invalid_argument("CircuitLoss: dataset dimension " +
                                  std::to_string(data_->input_dim()) + " != model input " +
                                  std::to_string(model_.input_dim));
    }
  }

  const CircuitModel& model() const { return model_; }
  const Dataset& data() const { return *data_; }
  Benchmark benchmark() const { return benchmark_; }
  std::size_t dimension() const { return model_.parameter_count(); }

  double value(std::span<const double> params) const {
    check(params);
    double sum = 0.0;
    for (const auto& p : data_->points) {
      State2 s = make_state(model_.initial_state);
      for (const auto& slot : layout_->slots()) {
        s = rotate(s, slot.axis, layout_->angle(slot, params, p.x));
      }
      sum += residual_norm(s, p.target);
    }
    return sum / static_cast<double>(data_->size());
  }

  /// Loss and parameter-shift gradient in one sweep per data point.
  double value_and_gradient(std::span<const double> params, std::span<double> grad) const {
    check(params);
    if (grad.size() != params.size()) throw std::invalid_argument("gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);

    const auto slots = layout_->slots();
    const std::size_t r_count = slots.size();
    std::vector<State2> forward(r_count + 1);
    std::vector<double> angles(r_count);
    const Unitary2 shift_y[2] = {rotation_y(kPi / 2), rotation_y(-kPi / 2)};
    const Unitary2 shift_z[2] = {rotation_z(kPi / 2), rotation_z(-kPi / 2)};
    const double inv_m = 1.0 / static_cast<double>(data_->size());

    double sum = 0.0;
    for (const auto& p : data_->points) {
      forward[0] = make_state(model_.initial_state);
      for (std::size_t r = 0; r < r_count; ++r) {
        angles[r] = layout_->angle(slots[r], params, p.x);
        forward[r + 1] = rotate(forward[r], slots[r].axis, angles[r]);
      }
      const State2& out = forward[r_count];
      sum += residual_norm(out, p.target);

      // dL/dE for each measured observable.
      double w_z = 0.0, w_x = 0.0, w_y = 0.0;
      if (benchmark_ == Benchmark::Z) {
        w_z = 2.0 * (expectation_unchecked(out, Observable::Z) - p.target.real()) * inv_m;
      } else {
        w_x = 2.0 * (expectation_unchecked(out, Observable::X) - p.target.real()) * inv_m;
        w_y = 2.0 * (expectation_unchecked(out, Observable::Y) - p.target.imag()) * inv_m;
      }

      // Walk backwards keeping `after` = product of the rotations following r.
      Unitary2 after = Unitary2::identity();
      for (std::size_t r = r_count; r-- > 0;) {
        const auto& slot = slots[r];
        const Unitary2* sh = slot.axis == Axis::Y ? shift_y : shift_z;
        const State2 plus = apply(after, apply(sh[0], forward[r + 1]));
        const State2 minus = apply(after, apply(sh[1], forward[r + 1]));
        double d_loss;
        if (benchmark_ == Benchmark::Z) {
          d_loss = w_z * 0.5 * (expectation_unchecked(plus, Observable::Z) -
                                expectation_unchecked(minus, Observable::Z));
        } else {
          d_loss = w_x * 0.5 * (expectation_unchecked(plus, Observable::X) -
                                expectation_unchecked(minus, Observable::X)) +
                   w_y * 0.5 * (expectation_unchecked(plus, Observable::Y) -
                                expectation_unchecked(minus, Observable::Y));
        }
        for (const auto& t : layout_->terms(slot)) {
          grad[t.param] += RotationLayout::coefficient(t, p.x) * d_loss;
        }
        after = after * rotation(slot.axis, angles[r]);
      }
    }
    return sum * inv_m;
  }

  Vector gradient(std::span<const double> params, GradientMethod method) const {
    return qapprox::gradient(objective(), params, method);
  }

  /// Copies share the dataset; safe to call concurrently.
  Objective objective() const {
    Objective obj;
    obj.value = [self = *this](std::span<const double> p) { return self.value(p); };
    obj.value_and_gradient = [self = *this](std::span<const double> p, std::span<double> g) {
      return self.value_and_gradient(p, g);
    };
    return obj;
  }

 private:
  void check(std::span<const double> params) const {
    if (params.size() != model_.parameter_count()) {
      throw std::invalid_argument("CircuitLoss: expected " +
                                  std::to_string(model_.parameter_count()) + " parameters, got " +
                                  std::to_string(params.size()));
    }
  }

  double residual_norm(const State2& s, Complex target) const {
    if (benchmark_ == Benchmark::Z) {
      const double r = expectation_unchecked(s, Observable::Z) - target.real();
      return r * r;
    }
    const Complex r{expectation_unchecked(s, Observable::X) - target.real(),
                    expectation_unchecked(s, Observable::Y) - target.imag()};
    return std::norm(r);
  }

  CircuitModel model_;
  std::shared_ptr<const Dataset> data_;
  Benchmark benchmark_;
  std::shared_ptr<const RotationLayout> layout_;
};

}  // namespace qapprox
