#pragma once

// Classical comparators: truncated Fourier series from quadrature, and the
// single-hidden-layer approximant sum_n a_n sigma(w_n . x + b_n) with a cosine
// (real targets) or complex-exponential (complex targets) activation.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qapprox/encodings.hpp"
#include "qapprox/fit.hpp"
#include "qapprox/linalg.hpp"
#include "qapprox/targets.hpp"

namespace qapprox {

/// z_N(x) = sum_{n=-N}^{N} c_n e^{i 2 pi n x / P}
struct FourierSeries {
  double period = 1.0;
  int order = 0;
  std::vector<Complex> coeffs;  ///< c_{-N} .. c_{N}

  Complex c(int n) const { return coeffs.at(static_cast<std::size_t>(n + order)); }
};

inline constexpr std::size_t kDefaultQuadrature = 10000;

/// c_n = (1/P) int_a^b f(x) e^{-i 2 pi n x / P} dx by composite trapezoid over
/// `resolution` subintervals.
inline FourierSeries fourier_fit(const std::function<Complex(double)>& f, double a, double b,
                                 int order, std::size_t resolution = kDefaultQuadrature) {
  if (order < 0) throw std::invalid_argument("fourier_fit: order must be >= 0");
  if (resolution < static_cast<std::size_t>(2 * order + 2)) {
    throw std::invalid_argument("fourier_fit: resolution " + std::to_string(resolution) +
                                " below 2N+2 = " + std::to_string(2 * order + 2));
  }
  if (!(b > a)) throw std::invalid_argument("fourier_fit: empty interval");

  FourierSeries s;
  s.period = b - a;
  s.order = order;
  s.coeffs.assign(static_cast<std::size_t>(2 * order + 1), Complex{});
  const double h = s.period / static_cast<double>(resolution);
  std::vector<Complex> samples(resolution + 1);
  std::vector<double> xs(resolution + 1);
  for (std::size_t k = 0; k <= resolution; ++k) {
    xs[k] = k == resolution ? b : a + h * static_cast<double>(k);
    samples[k] = f(xs[k]);
  }
  for (int n = -order; n <= order; ++n) {
    const double kappa = -2.0 * kPi * n / s.period;
    Complex sum;
    for (std::size_t k = 0; k <= resolution; ++k) {
      const double w = (k == 0 || k == resolution) ? 0.5 : 1.0;
      sum += w * samples[k] * std::polar(1.0, kappa * xs[k]);
    }
    s.coeffs[static_cast<std::size_t>(n + order)] = sum * h / s.period;
  }
  return s;
}

inline FourierSeries fourier_fit(const TargetFunction& t, int order,
                                 std::size_t resolution = kDefaultQuadrature) {
  if (t.dim != 1) throw std::invalid_argument("fourier_fit: target must be one-dimensional");
  const auto [a, b] = t.domain.front();
  return fourier_fit([&t](double x) { return t(std::span<const double>(&x, 1)); }, a, b, order,
                     resolution);
}

inline Complex fourier_eval(const FourierSeries& s, double x) {
  Complex sum;
  for (int n = -s.order; n <= s.order; ++n) {
    sum += s.c(n) * std::polar(1.0, 2.0 * kPi * n * x / s.period);
  }
  return sum;
}

/// Chi-square of a series against a dataset; the Z benchmark compares the
/// real part.
inline double fourier_chi2(const FourierSeries& s, const Dataset& data, Benchmark b) {
  data.validate(b);
  if (data.input_dim() != 1) throw std::invalid_argument("fourier_chi2: needs 1D data");
  double sum = 0.0;
  for (const auto& p : data.points) {
    const Complex v = fourier_eval(s, p.x[0]);
    sum += b == Benchmark::Z ? std::pow(v.real() - p.target.real(), 2) : std::norm(v - p.target);
  }
  return sum / static_cast<double>(data.size());
}

enum class Activation { Cosine, ComplexExp };

/// amplitude * cos(w . x + bias), or amplitude * e^{i (w . x + bias)}.
struct Neuron {
  std::vector<double> weights;
  double bias = 0.0;
  double amplitude = 0.0;
};

/// Flat parameter layout per term: [w_1 .. w_m, bias, amplitude].
struct UatModel {
  Activation activation = Activation::Cosine;
  std::size_t input_dim = 1;
  std::vector<Neuron> terms;

  static UatModel from_params(Activation act, std::size_t input_dim, std::span<const double> p) {
    const std::size_t per = input_dim + 2;
    if (p.empty() || p.size() % per != 0) {
      throw std::invalid_argument("UatModel: parameter count is not a multiple of m + 2");
    }
    UatModel m{act, input_dim, {}};
    for (std::size_t k = 0; k < p.size(); k += per) {
      m.terms.push_back({std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(k),
                                             p.begin() + static_cast<std::ptrdiff_t>(k + input_dim)),
                         p[k + input_dim], p[k + input_dim + 1]});
    }
    return m;
  }

  Vector params() const {
    Vector p;
    for (const auto& t : terms) {
      p.insert(p.end(), t.weights.begin(), t.weights.end());
      p.push_back(t.bias);
      p.push_back(t.amplitude);
    }
    return p;
  }
};

inline Complex classical_uat_eval(const UatModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim) throw std::invalid_argument("classical_uat_eval: dimension mismatch");
  Complex sum;
  for (const auto& t : m.terms) {
    double arg = t.bias;
    for (std::size_t j = 0; j < x.size(); ++j) arg += t.weights[j] * x[j];
    sum += m.activation == Activation::Cosine ? Complex{t.amplitude * std::cos(arg), 0.0}
                                              : t.amplitude * std::polar(1.0, arg);
  }
  return sum;
}

/// Mean |G(x_j) - z_j|^2 with its analytic gradient.
inline Objective classical_uat_objective(const Dataset& data, Activation act) {
  auto shared = std::make_shared<const Dataset>(data);
  const std::size_t m = data.input_dim();
  Objective obj;
  obj.value_and_gradient = [shared, act, m](std::span<const double> p, std::span<double> g) {
    const std::size_t per = m + 2;
    std::fill(g.begin(), g.end(), 0.0);
    const double inv = 1.0 / static_cast<double>(shared->size());
    double sum = 0.0;
    std::vector<double> args(p.size() / per);
    for (const auto& pt : shared->points) {
      Complex model;
      for (std::size_t k = 0; k < args.size(); ++k) {
        const std::size_t o = k * per;
        double a = p[o + m];
        for (std::size_t j = 0; j < m; ++j) a += p[o + j] * pt.x[j];
        args[k] = a;
        model += act == Activation::Cosine ? Complex{p[o + m + 1] * std::cos(a), 0.0}
                                           : p[o + m + 1] * std::polar(1.0, a);
      }
      const Complex r = model - pt.target;
      sum += std::norm(r);
      // dL = 2/M Re(conj(r) dG)
      for (std::size_t k = 0; k < args.size(); ++k) {
        const std::size_t o = k * per;
        const double amp = p[o + m + 1];
        double d_arg, d_amp;
        if (act == Activation::Cosine) {
          d_amp = r.real() * std::cos(args[k]);
          d_arg = -r.real() * amp * std::sin(args[k]);
        } else {
          const Complex e = std::polar(1.0, args[k]);
          d_amp = (std::conj(r) * e).real();
          d_arg = (std::conj(r) * Complex{0.0, amp} * e).real();
        }
        for (std::size_t j = 0; j < m; ++j) g[o + j] += 2.0 * inv * d_arg * pt.x[j];
        g[o + m] += 2.0 * inv * d_arg;
        g[o + m + 1] += 2.0 * inv * d_amp;
      }
    }
    return sum * inv;
  };
  obj.value = [f = obj.value_and_gradient](std::span<const double> p) {
    std::vector<double> scratch(p.size());
    return f(p, scratch);
  };
  return obj;
}

struct ClassicalUatFit {
  UatModel model;
  FitResult fit;
};

/// Best-of-restarts fit with `terms` neurons, minimizing the same chi-square
/// as the circuit models.
inline ClassicalUatFit classical_uat_fit(const Dataset& data, std::size_t terms, Activation act,
                                         const FitSettings& settings) {
  if (terms < 1) throw std::invalid_argument("classical_uat_fit: needs at least one term");
  data.validate(act == Activation::Cosine ? Benchmark::Z : Benchmark::XY);
  const std::size_t dim = terms * (data.input_dim() + 2);
  FitSettings s = settings;
  // The analytic gradient plays the role of the circuit's shift-rule gradient.
  FitResult best = fit_objective(classical_uat_objective(data, act), dim, s);
  return {UatModel::from_params(act, data.input_dim(), best.best_params), std::move(best)};
}

inline double classical_uat_chi2(const UatModel& m, const Dataset& data) {
  double sum = 0.0;
  for (const auto& p : data.points) sum += std::norm(classical_uat_eval(m, p.x) - p.target);
  return sum / static_cast<double>(data.size());
}

}  // namespace qapprox
