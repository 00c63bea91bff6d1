#pragma once

// (mu/mu_w, lambda) covariance matrix adaptation evolution strategy with
// cumulative step-size adaptation, rank-one and rank-mu covariance updates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "qapprox/objective.hpp"
#include "qapprox/parallel.hpp"

namespace qapprox {

struct EsOptions {
  /// 0 selects 4 + floor(3 ln n).
  std::size_t population = 0;
  double sigma0 = 0.5;
  /// Maximum number of loss evaluations, including the start point.
  std::size_t budget = 20000;
  std::uint64_t seed = 0;
  double x_tol = 1e-12;
  double f_tol = 1e-15;
};

inline std::size_t default_population(std::size_t n) {
  return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

inline FitResult minimize_es(const std::function<double(std::span<const double>)>& loss,
                             std::span<const double> p0, const EsOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const std::size_t n = p0.size();
  if (n == 0) throw std::invalid_argument("minimize_es: empty start point");
  if (opt.budget == 0) throw std::invalid_argument("minimize_es: budget must be positive");
  const std::size_t lambda = opt.population == 0 ? std::max<std::size_t>(4, default_population(n))
                                                 : opt.population;
  if (lambda < 4) throw std::invalid_argument("minimize_es: population must be >= 4");
  if (!(opt.sigma0 > 0.0)) throw std::invalid_argument("minimize_es: sigma0 must be positive");
  for (double v : p0) require_finite_param(v);

  const std::size_t mu = lambda / 2;
  VectorXd weights(mu);
  for (std::size_t i = 0; i < mu; ++i) {
    weights[i] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();
  const double dn = static_cast<double>(n);

  const double c_sigma = (mu_eff + 2.0) / (dn + mu_eff + 5.0);
  const double d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dn + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / dn) / (dn + 4.0 + 2.0 * mu_eff / dn);
  const double c_1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                              ((dn + 2.0) * (dn + 2.0) + mu_eff));
  const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));
  const std::size_t history_len =
      10 + static_cast<std::size_t>(std::ceil(30.0 * dn / static_cast<double>(lambda)));

  auto safe = [&loss](std::span<const double> x) {
    const double f = loss(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  FitResult res;
  res.rng_seed = opt.seed;
  VectorXd mean = Eigen::Map<const VectorXd>(p0.data(), static_cast<Eigen::Index>(n));
  res.best_params.assign(p0.begin(), p0.end());
  res.best_loss = safe(p0);
  res.evaluations = 1;
  res.loss_trace.push_back(res.best_loss);

  double sigma = opt.sigma0;
  MatrixXd cov = MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  MatrixXd basis = cov;
  VectorXd scales = VectorXd::Ones(static_cast<Eigen::Index>(n));
  VectorXd p_sigma = VectorXd::Zero(static_cast<Eigen::Index>(n));
  VectorXd p_c = VectorXd::Zero(static_cast<Eigen::Index>(n));

  Rng rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::deque<double> best_history;

  std::vector<VectorXd> xs(lambda), ys(lambda);
  std::vector<double> fs(lambda);
  std::vector<std::size_t> order(lambda);
  std::vector<double> buf(n);

  res.status = "budget exhausted";
  std::size_t generation = 0;
  while (res.evaluations + lambda <= opt.budget) {
    for (std::size_t k = 0; k < lambda; ++k) {
      VectorXd z(static_cast<Eigen::Index>(n));
      for (auto& v : z) v = normal(rng);
      ys[k] = basis * scales.cwiseProduct(z);
      xs[k] = mean + sigma * ys[k];
      std::copy(xs[k].begin(), xs[k].end(), buf.begin());
      fs[k] = safe(buf);
    }
    res.evaluations += lambda;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&fs](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });

    if (fs[order[0]] < res.best_loss) {
      res.best_loss = fs[order[0]];
      res.best_params.assign(xs[order[0]].begin(), xs[order[0]].end());
    }
    res.loss_trace.push_back(res.best_loss);
    ++generation;

    VectorXd y_w = VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < mu; ++i) y_w += weights[static_cast<Eigen::Index>(i)] * ys[order[i]];
    mean += sigma * y_w;

    const VectorXd inv_sqrt_y = basis * (basis.transpose() * y_w).cwiseQuotient(scales);
    p_sigma = (1.0 - c_sigma) * p_sigma + std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * inv_sqrt_y;
    const double ps_norm = p_sigma.norm();
    const double decay = 1.0 - std::pow(1.0 - c_sigma, 2.0 * static_cast<double>(generation));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (dn + 1.0)) * chi_n;
    p_c = (1.0 - c_c) * p_c + (h_sigma ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * y_w;

    MatrixXd rank_mu = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < mu; ++i) {
      rank_mu += weights[static_cast<Eigen::Index>(i)] * ys[order[i]] * ys[order[i]].transpose();
    }
    const double correction = h_sigma ? 0.0 : c_c * (2.0 - c_c);
    cov = (1.0 - c_1 - c_mu) * cov + c_1 * (p_c * p_c.transpose() + correction * cov) +
          c_mu * rank_mu;
    cov = 0.5 * (cov + cov.transpose());
    sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    basis = eig.eigenvectors();
    scales = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();

    if (!std::isfinite(sigma) || !mean.allFinite()) {
      res.status = "numerical breakdown";
      break;
    }
    if (sigma * scales.maxCoeff() < opt.x_tol) {
      res.converged = true;
      res.status = "step-size tolerance";
      break;
    }
    best_history.push_back(fs[order[0]]);
    if (best_history.size() > history_len) best_history.pop_front();
    if (best_history.size() == history_len) {
      const auto [lo, hi] = std::minmax_element(best_history.begin(), best_history.end());
      const double spread = std::max(*hi - *lo, fs[order[lambda - 1]] - fs[order[0]]);
      if (spread < opt.f_tol) {
        res.converged = true;
        res.status = "function tolerance";
        break;
      }
    }
  }
  res.iterations = generation;
  return res;
}

}  // namespace qapprox
