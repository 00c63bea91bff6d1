#pragma once

// Objectives, fit results and gradient evaluation shared by the optimizers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qapprox {

using Vector = std::vector<double>;

enum class GradientMethod { FiniteDiff, ParameterShift };

/// A loss and, optionally, its exact gradient (parameter-shift for circuits,
/// analytic for classical models). `value_and_gradient` writes the gradient
/// into its second argument and returns the loss.
struct Objective {
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double>, std::span<double>)> value_and_gradient;
};

struct FitResult {
  Vector best_params;
  double best_loss = std::numeric_limits<double>::infinity();
  /// Accepted (quasi-Newton) or best-so-far (evolution strategy) losses.
  Vector loss_trace;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t restart_index = 0;
  std::uint64_t rng_seed = 0;
  bool converged = false;
  std::string status;
};

inline void require_finite_param(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("start point has a non-finite parameter");
}

/// Central-difference step for coordinate value v.
inline double fd_step(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

inline Vector finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> p) {
  Vector probe(p.begin(), p.end());
  Vector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = fd_step(p[i]);
    probe[i] = p[i] + h;
    const double fp = f(probe);
    probe[i] = p[i] - h;
    const double fm = f(probe);
    probe[i] = p[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::domain_error("finite_difference_gradient: non-finite loss probing parameter " +
                              std::to_string(i) + (std::isfinite(fp) ? " (-h)" : " (+h)"));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Wraps a plain loss so that its gradient comes from central differences.
inline Objective make_fd_objective(std::function<double(std::span<const double>)> f) {
  Objective obj;
  obj.value = f;
  obj.value_and_gradient = [f](std::span<const double> p, std::span<double> g) {
    const Vector fd = finite_difference_gradient(f, p);
    std::copy(fd.begin(), fd.end(), g.begin());
    return f(p);
  };
  return obj;
}

/// Gradient of `obj` at `p`. ParameterShift requires the objective to carry
/// an exact gradient.
inline Vector gradient(const Objective& obj, std::span<const double> p, GradientMethod method) {
  const double f0 = obj.value(p);
  if (!std::isfinite(f0)) {
    throw std::domain_error("gradient: non-finite loss at the base point");
  }
  if (method == GradientMethod::FiniteDiff) return finite_difference_gradient(obj.value, p);
  if (!obj.value_and_gradient) {
    throw std::invalid_argument("gradient: objective has no exact gradient");
  }
  Vector g(p.size());
  const double f = obj.value_and_gradient(p, g);
  if (!std::isfinite(f)) throw std::domain_error("gradient: non-finite loss at a shifted probe");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw std::domain_error("gradient: non-finite shifted probe for parameter " +
                              std::to_string(i));
    }
  }
  return g;
}

}  // namespace qapprox
