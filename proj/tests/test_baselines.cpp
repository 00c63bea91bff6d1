#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qapprox/baselines.hpp"

using namespace qapprox;

namespace {

Dataset line_data(std::size_t n, const std::function<Complex(double)>& f) {
  Dataset d;
  d.meta.bounds = {{-1.0, 1.0}};
  d.meta.shape = {n};
  for (std::size_t k = 0; k < n; ++k) {
    const double x = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    d.points.push_back({{x}, f(x)});
  }
  return d;
}

// Trapezoid integral of |f|^2 / P, used as an independent Parseval bound.
double mean_square(const std::function<Complex(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += (k == 0 || k == n ? 0.5 : 1.0) * std::norm(f(a + h * k));
  return s * h / (b - a);
}

}  // namespace

TEST(FourierFit, CosineHasTwoHalfCoefficients) {
  const auto s = fourier_fit([](double x) { return Complex(std::cos(kPi * x)); }, -1, 1, 5);
  for (int n = -5; n <= 5; ++n) {
    const double expected = std::abs(n) == 1 ? 0.5 : 0.0;
    EXPECT_LT(std::abs(s.c(n) - expected), 1e-8) << n;
  }
  EXPECT_NEAR(fourier_eval(s, 0.0).real(), 1.0, 1e-8);
}

TEST(FourierFit, ConstantFunction) {
  const auto s = fourier_fit([](double) { return Complex(1); }, -1, 1, 4);
  EXPECT_LT(std::abs(s.c(0) - 1.0), 1e-12);
  for (int n = 1; n <= 4; ++n) EXPECT_LT(std::abs(s.c(n)) + std::abs(s.c(-n)), 1e-12);
}

TEST(FourierFit, IdentityMatchesAnalyticCoefficients) {
  const auto s = fourier_fit([](double x) { return Complex(x); }, -1, 1, 10, 10000);
  EXPECT_LT(std::abs(s.c(0)), 1e-6);
  for (int n = 1; n <= 10; ++n) {
    const Complex expected{0.0, (n % 2 ? -1.0 : 1.0) / (n * kPi)};
    EXPECT_LT(std::abs(s.c(n) - expected), 1e-6) << n;
    EXPECT_LT(std::abs(s.c(-n) - std::conj(expected)), 1e-6) << n;
  }
}

TEST(FourierFit, Errors) {
  auto f = [](double x) { return Complex(x); };
  EXPECT_THROW(fourier_fit(f, -1, 1, -1), std::invalid_argument);
  EXPECT_THROW(fourier_fit(f, -1, 1, 10, 21), std::invalid_argument);
  EXPECT_NO_THROW(fourier_fit(f, -1, 1, 10, 22));
  EXPECT_THROW(fourier_fit(make_target("himmelblau"), 2), std::invalid_argument);
}

TEST(FourierEval, ConstantSeries) {
  FourierSeries s{2.0, 0, {Complex(1)}};
  for (double x : {-1.0, 0.3, 1.0}) EXPECT_EQ(fourier_eval(s, x), Complex(1));
}

TEST(FourierEval, IdentityErrorShrinksWithOrder) {
  double prev = 1e9;
  for (int n : {3, 7, 15}) {
    const auto s = fourier_fit([](double x) { return Complex(x); }, -1, 1, n);
    double mse = 0.0;
    int count = 0;
    for (int k = -80; k <= 80; ++k) {
      const double x = k / 100.0;
      mse += std::norm(fourier_eval(s, x) - x);
      ++count;
    }
    mse /= count;
    EXPECT_LT(mse, prev) << n;
    prev = mse;
  }
}

TEST(FourierFit, RealTargetsParsevalAndLinearity) {
  for (const char* name : {"relu", "tanh5", "step", "poly"}) {
    const auto t = make_target(name);
    const auto s = fourier_fit(t, 8);
    for (int k = 0; k <= 40; ++k) {
      EXPECT_LT(std::abs(fourier_eval(s, -1.0 + 0.05 * k).imag()), 1e-10) << name;
    }
    double power = 0.0;
    for (const Complex& c : s.coeffs) power += std::norm(c);
    const double energy = mean_square([&t](double x) { return t(std::span<const double>(&x, 1)); }, -1, 1, 20000);
    EXPECT_LE(power, energy + 1e-6) << name;
  }
  auto f = [](double x) { return Complex(std::tanh(5 * x)); };
  auto g = [](double x) { return Complex(std::max(0.0, x)); };
  const auto sf = fourier_fit(f, -1, 1, 6), sg = fourier_fit(g, -1, 1, 6);
  const auto sh = fourier_fit([&](double x) { return 2.0 * f(x) - 0.5 * g(x); }, -1, 1, 6);
  for (int n = -6; n <= 6; ++n) EXPECT_LT(std::abs(sh.c(n) - (2.0 * sf.c(n) - 0.5 * sg.c(n))), 1e-12);
}

TEST(ClassicalUatEval, Examples) {
  const double x0 = 0.37;
  const std::span<const double> x(&x0, 1);
  EXPECT_EQ(classical_uat_eval({Activation::Cosine, 1, {{{0.0}, 0.0, 1.0}}}, x), Complex(1));
  EXPECT_LT(std::abs(classical_uat_eval({Activation::ComplexExp, 1, {{{0.0}, kPi / 2, 1.0}}}, x) - Complex(0, 1)),
            1e-15);
  EXPECT_THROW(classical_uat_eval({Activation::Cosine, 2, {{{0.0, 1.0}, 0.0, 1.0}}}, x), std::invalid_argument);
}

TEST(ClassicalUatEval, MatchesTermByTermSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> p(12);
  for (double& v : p) v = u(rng);
  const std::vector<double> x{0.3, -0.8};
  for (Activation act : {Activation::Cosine, Activation::ComplexExp}) {
    const UatModel m = UatModel::from_params(act, 2, p);
    EXPECT_EQ(m.params(), p);
    Complex sum;
    for (int k = 0; k < 3; ++k) {
      const double* q = &p[static_cast<std::size_t>(4 * k)];
      const double arg = q[0] * x[0] + q[1] * x[1] + q[2];
      sum += act == Activation::Cosine ? Complex(q[3] * std::cos(arg)) : q[3] * std::exp(Complex(0, arg));
    }
    EXPECT_LT(std::abs(classical_uat_eval(m, x) - sum), 1e-12);
  }
  EXPECT_THROW(UatModel::from_params(Activation::Cosine, 2, std::vector<double>(5)), std::invalid_argument);
}

TEST(ClassicalUatObjective, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  const Dataset real = line_data(21, [](double x) { return Complex(std::tanh(5 * x)); });
  const Dataset cplx = line_data(21, [](double x) { return Complex(0.5 * std::tanh(5 * x), 0.5 * std::max(0.0, x)); });
  for (Activation act : {Activation::Cosine, Activation::ComplexExp}) {
    const Objective obj = classical_uat_objective(act == Activation::Cosine ? real : cplx, act);
    std::vector<double> p(9);
    for (double& v : p) v = u(rng);
    const Vector exact = gradient(obj, p, GradientMethod::ParameterShift);
    const Vector fd = gradient(obj, p, GradientMethod::FiniteDiff);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(exact[i], fd[i], 1e-7);
  }
}

TEST(ClassicalUatFit, ZeroTargetIsExact) {
  FitSettings s;
  s.restarts = 3;
  const auto fit = classical_uat_fit(line_data(21, [](double) { return Complex(0); }), 1, Activation::Cosine, s);
  EXPECT_LT(fit.fit.best_loss, 1e-12);
}

TEST(ClassicalUatFit, RecoversCos3x) {
  FitSettings s;
  s.restarts = 10;
  s.seed = 1;
  const Dataset d = line_data(101, [](double x) { return Complex(std::cos(3 * x)); });
  const auto fit = classical_uat_fit(d, 1, Activation::Cosine, s);
  EXPECT_LT(fit.fit.best_loss, 1e-6);
  EXPECT_NEAR(classical_uat_chi2(fit.model, d), fit.fit.best_loss, 1e-14);
}

TEST(ClassicalUatFit, MoreTermsDoNoWorse) {
  FitSettings s;
  s.restarts = 10;
  s.seed = 2;
  const Dataset d = make_dataset(prepare_target("tanh5", GridSpec::line(101)), 101);
  const double one = classical_uat_fit(d, 1, Activation::Cosine, s).fit.best_loss;
  const double five = classical_uat_fit(d, 5, Activation::Cosine, s).fit.best_loss;
  EXPECT_LE(five, one);
}

TEST(FourierChi2, UsesRealPartForZ) {
  const Dataset d = line_data(11, [](double x) { return Complex(0.5 * x); });
  FourierSeries s{2.0, 0, {Complex(0.0, 0.7)}};
  double sum = 0.0;
  for (const auto& p : d.points) sum += std::norm(p.target);
  EXPECT_NEAR(fourier_chi2(s, d, Benchmark::Z), sum / 11, 1e-15);
  EXPECT_NEAR(fourier_chi2(s, d, Benchmark::XY), sum / 11 + 0.49, 1e-15);
}
