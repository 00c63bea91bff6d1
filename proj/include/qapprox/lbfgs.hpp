#pragma once

// Limited-memory BFGS with a strong-Wolfe line search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>

#include "qapprox/objective.hpp"

namespace qapprox {

struct QnOptions {
  std::size_t max_iters = 1000;
  /// Stop when max_i |g_i| falls below this.
  double grad_tol = 1e-10;
  /// Stop when |f_k - f_{k+1}| <= f_tol * max(|f_k|, |f_{k+1}|).
  double f_tol = 1e-12;
  std::size_t memory = 10;
  std::size_t max_line_search = 40;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct LinePoint {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;
  Vector g;
};

/// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class WolfeSearch {
 public:
  WolfeSearch(const Objective& obj, std::span<const double> x, std::span<const double> dir,
              double f0, double slope0, std::size_t max_evals)
      : obj_(obj), x_(x), dir_(dir), f0_(f0), slope0_(slope0), max_evals_(max_evals),
        trial_(x.size()) {}

  /// Returns true with `out` holding a point satisfying the strong Wolfe
  /// conditions, or a point with sufficient decrease when the budget runs out.
  bool search(double step0, LinePoint& out) {
    LinePoint prev{0.0, f0_, slope0_, {}};
    double step = step0;
    for (std::size_t i = 0; evals_ < max_evals_; ++i) {
      LinePoint cur = eval(step);
      if (!std::isfinite(cur.f) || cur.f > f0_ + kC1 * step * slope0_ ||
          (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, out);
      }
      if (std::abs(cur.slope) <= -kC2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      step *= 2.0;
    }
    return fallback(prev, out);
  }

  std::size_t evaluations() const { return evals_; }

 private:
  static constexpr double kC1 = 1e-4;
  static constexpr double kC2 = 0.9;

  LinePoint eval(double step) {
    for (std::size_t i = 0; i < x_.size(); ++i) trial_[i] = x_[i] + step * dir_[i];
    LinePoint p;
    p.step = step;
    p.g.assign(x_.size(), 0.0);
    p.f = obj_.value_and_gradient(trial_, p.g);
    p.slope = std::isfinite(p.f) ? dot(p.g, dir_) : std::numeric_limits<double>::quiet_NaN();
    ++evals_;
    return p;
  }

  bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
    while (evals_ < max_evals_) {
      const double width = hi.step - lo.step;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      double step = std::isfinite(hi.f)
                        ? cubic_min(lo.step, lo.f, lo.slope, hi.step, hi.f, hi.slope)
                        : std::numeric_limits<double>::quiet_NaN();
      const double a = std::min(lo.step, hi.step), b = std::max(lo.step, hi.step);
      const double guard = 0.1 * (b - a);
      if (!std::isfinite(step) || step < a + guard || step > b - guard) {
        step = 0.5 * (lo.step + hi.step);
      }
      LinePoint cur = eval(step);
      if (!std::isfinite(cur.f) || cur.f > f0_ + kC1 * step * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -kC2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return fallback(lo, out);
  }

  bool fallback(LinePoint& best, LinePoint& out) {
    if (best.step > 0.0 && std::isfinite(best.f) && best.f < f0_) {
      out = std::move(best);
      return true;
    }
    return false;
  }

  const Objective& obj_;
  std::span<const double> x_;
  std::span<const double> dir_;
  double f0_;
  double slope0_;
  std::size_t max_evals_;
  std::size_t evals_ = 0;
  Vector trial_;
};

}  // namespace detail

/// Quasi-Newton minimization. A failed line search ends the run with the best
/// point so far and `converged == false`; it is not an error.
inline FitResult minimize_qn(const Objective& obj, std::span<const double> p0,
                             const QnOptions& opt = {}) {
  if (!obj.value_and_gradient) throw std::invalid_argument("minimize_qn: objective needs a gradient");
  for (double v : p0) require_finite_param(v);

  const std::size_t n = p0.size();
  FitResult res;
  Vector x(p0.begin(), p0.end());
  Vector g(n);
  double f = obj.value_and_gradient(x, g);
  res.evaluations = 1;
  if (!std::isfinite(f)) throw std::domain_error("minimize_qn: non-finite loss at the start point");
  res.loss_trace.push_back(f);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector dir(n), alpha_buf;

  res.status = "iteration limit";
  for (; res.iterations < opt.max_iters; ++res.iterations) {
    if (detail::max_abs(g) < opt.grad_tol) {
      res.converged = true;
      res.status = "gradient tolerance";
      break;
    }

    // Two-loop recursion: dir = -H g.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    const std::size_t k = s_hist.size();
    alpha_buf.assign(k, 0.0);
    for (std::size_t j = k; j-- > 0;) {
      alpha_buf[j] = rho_hist[j] * detail::dot(s_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha_buf[j] * y_hist[j][i];
    }
    if (k > 0) {
      const double gamma = detail::dot(s_hist.back(), y_hist.back()) /
                           detail::dot(y_hist.back(), y_hist.back());
      for (double& d : dir) d *= gamma;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double beta = rho_hist[j] * detail::dot(y_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha_buf[j] - beta) * s_hist[j][i];
    }

    double slope = detail::dot(g, dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = detail::dot(g, dir);
    }
    const double step0 = s_hist.empty() ? std::min(1.0, 1.0 / detail::max_abs(g)) : 1.0;

    detail::LinePoint next;
    detail::WolfeSearch ls(obj, x, dir, f, slope, opt.max_line_search);
    bool ok = ls.search(step0, next);
    res.evaluations += ls.evaluations();
    if (!ok && !s_hist.empty()) {
      // Retry once along steepest descent with a fresh memory.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = detail::dot(g, dir);
      detail::WolfeSearch retry(obj, x, dir, f, slope, opt.max_line_search);
      ok = retry.search(std::min(1.0, 1.0 / detail::max_abs(g)), next);
      res.evaluations += retry.evaluations();
    }
    if (!ok) {
      res.status = "line search failed";
      break;
    }

    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = next.step * dir[i];
      y[i] = next.g[i] - g[i];
      x[i] += s[i];
    }
    const double sy = detail::dot(s, y);
    if (sy > 1e-12 * std::sqrt(detail::dot(s, s) * detail::dot(y, y))) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double f_old = f;
    f = next.f;
    g = std::move(next.g);
    res.loss_trace.push_back(f);

    if (std::abs(f_old - f) <= opt.f_tol * std::max({std::abs(f_old), std::abs(f), 1e-300})) {
      ++res.iterations;
      res.converged = true;
      res.status = "function tolerance";
      break;
    }
  }
  res.best_params = std::move(x);
  res.best_loss = f;
  return res;
}

}  // namespace qapprox
