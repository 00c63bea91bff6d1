#pragma once

// Fit orchestration shared by quantum and classical models: one optimizer
// choice, one multistart policy.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qapprox/circuit_loss.hpp"
#include "qapprox/cmaes.hpp"
#include "qapprox/lbfgs.hpp"
#include "qapprox/multistart.hpp"
#include "qapprox/objective.hpp"

namespace qapprox {

enum class OptimizerKind { Lbfgs, Cma };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::Lbfgs ? "lbfgs" : "cma"; }

struct FitSettings {
  OptimizerKind optimizer = OptimizerKind::Lbfgs;
  QnOptions qn;
  EsOptions es;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  /// Gradient fed to the quasi-Newton optimizer.
  GradientMethod gradient = GradientMethod::ParameterShift;
};

inline FitResult fit_once(const Objective& obj, std::span<const double> p0, std::uint64_t seed,
                          const FitSettings& s) {
  if (s.optimizer == OptimizerKind::Cma) {
    EsOptions es = s.es;
    es.seed = seed;
    return minimize_es(obj.value, p0, es);
  }
  if (s.gradient == GradientMethod::FiniteDiff) {
    return minimize_qn(make_fd_objective(obj.value), p0, s.qn);
  }
  return minimize_qn(obj, p0, s.qn);
}

/// Every restart, in restart order.
inline std::vector<FitResult> fit_restarts(const Objective& obj, std::size_t dim,
                                           const FitSettings& s) {
  return run_restarts(
      [&](std::span<const double> p0, std::uint64_t seed) { return fit_once(obj, p0, seed, s); },
      dim, s.restarts, s.seed, s.workers);
}

inline FitResult fit_objective(const Objective& obj, std::size_t dim, const FitSettings& s) {
  return best_of(fit_restarts(obj, dim, s));
}

inline FitResult fit_circuit(const CircuitModel& model, const Dataset& data, Benchmark b,
                             const FitSettings& s) {
  const CircuitLoss loss(model, data, b);
  return fit_objective(loss.objective(), model.parameter_count(), s);
}

}  // namespace qapprox
