#pragma once

// Best-of-N restarts from uniform random angles.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qapprox/linalg.hpp"
#include "qapprox/objective.hpp"
#include "qapprox/parallel.hpp"

namespace qapprox {

/// Start point for restart `r`: uniform in [-pi, pi] from its own stream.
inline Vector restart_point(std::size_t dim, std::uint64_t seed, std::size_t r) {
  Rng rng(derive_seed(seed, r));
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  Vector p(dim);
  for (double& v : p) v = angle(rng);
  return p;
}

/// Runs `fit(p0, stream_seed)` for every restart. The returned vector is in
/// restart order regardless of `workers`.
template <typename FitFn>
std::vector<FitResult> run_restarts(FitFn&& fit, std::size_t dim, std::size_t restarts,
                                    std::uint64_t seed, std::size_t workers = 1) {
  if (restarts < 1) throw std::invalid_argument("multistart: restarts must be >= 1");
  std::vector<FitResult> runs(restarts);
  parallel_for(restarts, workers, [&](std::size_t r) {
    const Vector p0 = restart_point(dim, seed, r);
    const std::uint64_t stream = derive_seed(seed, r);
    FitResult res = fit(std::span<const double>(p0), derive_seed(stream, 1));
    res.restart_index = r;
    res.rng_seed = stream;
    runs[r] = std::move(res);
  });
  return runs;
}

/// Lowest loss; ties go to the earliest restart.
inline FitResult best_of(const std::vector<FitResult>& runs) {
  if (runs.empty()) throw std::invalid_argument("best_of: no runs");
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const double f = runs[r].best_loss;
    if (std::isfinite(f) && (!std::isfinite(runs[best].best_loss) || f < runs[best].best_loss)) {
      best = r;
    }
  }
  if (!std::isfinite(runs[best].best_loss)) {
    throw std::runtime_error("multistart: no restart produced a finite loss");
  }
  return runs[best];
}

template <typename FitFn>
FitResult multistart(FitFn&& fit, std::size_t dim, std::size_t restarts, std::uint64_t seed,
                     std::size_t workers = 1) {
  return best_of(run_restarts(std::forward<FitFn>(fit), dim, restarts, seed, workers));
}

}  // namespace qapprox
