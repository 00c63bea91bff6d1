#pragma once

// Finite-shot measurement emulation. Outcome counts are drawn from the
// binomial distribution directly; there is no gate or readout error model.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "qapprox/encodings.hpp"
#include "qapprox/gateset.hpp"
#include "qapprox/linalg.hpp"
#include "qapprox/parallel.hpp"

namespace qapprox {

/// Default shot count per point and observable.
inline constexpr std::size_t kDefaultShots = 50000;

struct ShotConfig {
  std::size_t shots = kDefaultShots;
  std::uint64_t seed = 0;

  void validate() const {
    if (shots < 1) throw std::invalid_argument("ShotConfig: shots must be >= 1");
  }
};

/// Estimate of <obs> from `shots` projective measurements. The +1 outcome
/// probability (1 + <obs>)/2 is the |0> population after rotating the
/// observable's eigenbasis onto the computational basis.
inline double sample_expectation(const State2& s, Observable obs, std::size_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("sample_expectation: shots must be >= 1");
  const double p = std::clamp(0.5 * (1.0 + expectation(s, obs)), 0.0, 1.0);
  std::binomial_distribution<std::size_t> counts(shots, p);
  const std::size_t k = counts(rng);
  return 2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0;
}

inline double sample_expectation(const State2& s, Observable obs, const ShotConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return sample_expectation(s, obs, cfg.shots, rng);
}

namespace detail {
inline std::size_t observable_slot(Observable o) {
  return o == Observable::X ? 0 : (o == Observable::Y ? 1 : 2);
}
}  // namespace detail

/// Chi-square with every expectation replaced by a shot estimate. Each
/// (point, observable) pair draws from its own stream.
inline double sampled_chi2(const CircuitModel& model, const ParameterVector& params,
                           const Dataset& data, Benchmark b, const ShotConfig& cfg) {
  cfg.validate();
  data.validate(b);
  auto draw = [&](const State2& s, std::size_t j, Observable o) {
    Rng rng(derive_seed(cfg.seed, 3 * j + detail::observable_slot(o)));
    return sample_expectation(s, o, cfg.shots, rng);
  };
  double sum = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto& p = data.points[j];
    const State2 s = encode_state(model, params, p.x);
    if (b == Benchmark::Z) {
      const double r = draw(s, j, Observable::Z) - p.target.real();
      sum += r * r;
    } else {
      const Complex est{draw(s, j, Observable::X), draw(s, j, Observable::Y)};
      sum += std::norm(est - p.target);
    }
  }
  return sum / static_cast<double>(data.size());
}

/// Expected excess of the sampled chi-square over the exact one:
/// (1/M) sum_j sum_obs (1 - <obs>^2) / shots.
inline double shot_noise_floor(const CircuitModel& model, const ParameterVector& params,
                               const Dataset& data, Benchmark b, std::size_t shots) {
  double sum = 0.0;
  for (const auto& p : data.points) {
    const State2 s = encode_state(model, params, p.x);
    if (b == Benchmark::Z) {
      const double z = expectation(s, Observable::Z);
      sum += 1.0 - z * z;
    } else {
      const double x = expectation(s, Observable::X), y = expectation(s, Observable::Y);
      sum += 2.0 - x * x - y * y;
    }
  }
  return sum / (static_cast<double>(data.size()) * static_cast<double>(shots));
}

}  // namespace qapprox
