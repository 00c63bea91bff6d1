#pragma once

// Z and X-Y benchmark encodings and their chi-square losses.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qapprox/gateset.hpp"
#include "qapprox/linalg.hpp"

namespace qapprox {

enum class Benchmark { Z, XY };

inline std::string_view to_string(Benchmark b) { return b == Benchmark::Z ? "Z" : "XY"; }

struct DataPoint {
  std::vector<double> x;
  Complex target;
};

struct GridMeta {
  std::string target_name;
  std::vector<std::pair<double, double>> bounds;
  std::vector<std::size_t> shape;
  /// Raw values were divided by this to obtain the stored targets.
  double scale = 1.0;
};

struct Dataset {
  std::vector<DataPoint> points;
  GridMeta meta;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t input_dim() const { return points.empty() ? 0 : points.front().x.size(); }

  /// Throws std::invalid_argument when the dataset cannot drive `benchmark`.
  void validate(Benchmark benchmark) const {
    if (points.empty()) throw std::invalid_argument("dataset is empty");
    const std::size_t m = input_dim();
    for (std::size_t j = 0; j < points.size(); ++j) {
      const auto& p = points[j];
      if (p.x.size() != m) throw std::invalid_argument("dataset: ragged input dimension");
      for (std::size_t d = 0; d < m; ++d) {
        require_finite(p.x[d], "dataset input");
        if (d < meta.bounds.size() &&
            (p.x[d] < meta.bounds[d].first - kInputTol ||
             p.x[d] > meta.bounds[d].second + kInputTol)) {
          throw std::invalid_argument("dataset: point " + std::to_string(j) +
                                      " outside the domain");
        }
      }
      require_finite(p.target.real(), "dataset target");
      require_finite(p.target.imag(), "dataset target");
      if (std::abs(p.target) > 1.0 + kInputTol) {
        throw std::invalid_argument("dataset: |target| > 1 at point " + std::to_string(j));
      }
      if (benchmark == Benchmark::Z && std::abs(p.target.imag()) > kInputTol) {
        throw std::invalid_argument("dataset: Z benchmark needs real targets");
      }
    }
  }
};

/// Circuit applied to the model's initial state.
inline State2 encode_state(const CircuitModel& model, const ParameterVector& params,
                           std::span<const double> x) {
  return apply(circuit_unitary(model, params, x), make_state(model.initial_state));
}

/// Observable readout compared against the target: <Z> for the Z benchmark,
/// <X> + i<Y> for the X-Y benchmark.
inline Complex readout(const State2& s, Benchmark b) {
  if (b == Benchmark::Z) return {expectation(s, Observable::Z), 0.0};
  return {expectation(s, Observable::X), expectation(s, Observable::Y)};
}

/// (1/M) sum_j (<Z(x_j)> - f(x_j))^2
inline double chi2_z(const CircuitModel& model, const ParameterVector& params,
                     const Dataset& data) {
  data.validate(Benchmark::Z);
  double sum = 0.0;
  for (const auto& p : data.points) {
    const double r = expectation(encode_state(model, params, p.x), Observable::Z) -
                     p.target.real();
    sum += r * r;
  }
  return sum / static_cast<double>(data.size());
}

/// (1/M) sum_j |<X(x_j)> + i<Y(x_j)> - z(x_j)|^2
inline double chi2_xy(const CircuitModel& model, const ParameterVector& params,
                      const Dataset& data) {
  data.validate(Benchmark::XY);
  double sum = 0.0;
  for (const auto& p : data.points) {
    const State2 s = encode_state(model, params, p.x);
    sum += std::norm(readout(s, Benchmark::XY) - p.target);
  }
  return sum / static_cast<double>(data.size());
}

inline double chi2(const CircuitModel& model, const ParameterVector& params,
                   const Dataset& data, Benchmark b) {
  return b == Benchmark::Z ? chi2_z(model, params, data) : chi2_xy(model, params, data);
}

}  // namespace qapprox
