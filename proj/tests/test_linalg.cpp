#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "qapprox/linalg.hpp"

using namespace qapprox;

namespace {

void expect_matrix(const Unitary2& u, Complex m00, Complex m01, Complex m10, Complex m11,
                   double tol = 1e-15) {
  EXPECT_LT(std::abs(u.m00 - m00), tol);
  EXPECT_LT(std::abs(u.m01 - m01), tol);
  EXPECT_LT(std::abs(u.m10 - m10), tol);
  EXPECT_LT(std::abs(u.m11 - m11), tol);
}

State2 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  State2 s{{g(rng), g(rng)}, {g(rng), g(rng)}};
  const double n = s.norm();
  return {s.a0 / n, s.a1 / n};
}

Unitary2 random_unitary(std::mt19937_64& rng) {
  return rotation_z(oracle::uniform(rng, -7, 7)) * rotation_y(oracle::uniform(rng, -7, 7)) *
         rotation_z(oracle::uniform(rng, -7, 7));
}

}  // namespace

TEST(RotationY, ClosedForms) {
  const double h = 1.0 / std::sqrt(2.0);
  expect_matrix(rotation_y(0.0), 1, 0, 0, 1);
  expect_matrix(rotation_y(kPi), 0, -1, 1, 0);
  expect_matrix(rotation_y(kPi / 2), h, -h, h, h);
}

TEST(RotationZ, ClosedForms) {
  const Complex i{0, 1};
  expect_matrix(rotation_z(0.0), 1, 0, 0, 1);
  expect_matrix(rotation_z(kPi), i, 0, 0, -i);
  expect_matrix(rotation_z(2 * kPi), -1, 0, 0, -1);
}

TEST(Rotations, RejectNonFinite) {
  EXPECT_THROW(rotation_y(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(rotation_z(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Apply, BasisExamples) {
  const State2 s = apply(Unitary2::identity(), State2::zero());
  EXPECT_EQ(s.a0, Complex(1));
  EXPECT_EQ(s.a1, Complex(0));
  const State2 f = apply(rotation_y(kPi), State2::zero());
  EXPECT_LT(std::abs(f.a0), 1e-15);
  EXPECT_LT(std::abs(f.a1 - Complex(1)), 1e-15);
}

TEST(Apply, MatchesScratchMultiplyAndPreservesNorm) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Unitary2 u = random_unitary(rng);
    const State2 s = random_state(rng);
    const State2 out = apply(u, s);
    // Column vector as a matrix with a zero second column.
    const oracle::Mat m = oracle::mul({u.m00, u.m01, u.m10, u.m11}, {s.a0, 0, s.a1, 0});
    EXPECT_LT(std::abs(out.a0 - m[0]), 1e-14);
    EXPECT_LT(std::abs(out.a1 - m[2]), 1e-14);
    EXPECT_NEAR(out.norm(), 1.0, 1e-10);
  }
}

TEST(Unitarity, RandomRotationProducts) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    Unitary2 u = Unitary2::identity();
    for (int j = 0; j < 5; ++j) u = u * random_unitary(rng);
    EXPECT_LT(unitarity_defect(u), 1e-10);
  }
}

TEST(Expectation, Eigenstates) {
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(expectation(State2::zero(), Observable::Z), 1.0);
  EXPECT_DOUBLE_EQ(expectation(State2::one(), Observable::Z), -1.0);
  EXPECT_NEAR(expectation(State2::plus(), Observable::X), 1.0, 1e-15);
  EXPECT_NEAR(expectation(State2{{h, 0}, {0, h}}, Observable::Y), 1.0, 1e-15);
}

TEST(Expectation, RejectsUnnormalizedState) {
  EXPECT_THROW(expectation(State2{{1, 0}, {1, 0}}, Observable::Z), std::invalid_argument);
  EXPECT_NO_THROW(expectation(State2{{1.0 + 1e-8, 0}, {0, 0}}, Observable::Z));
}

TEST(Expectation, BlochIdentityAndRange) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    const State2 s = random_state(rng);
    const double x = expectation(s, Observable::X);
    const double y = expectation(s, Observable::Y);
    const double z = expectation(s, Observable::Z);
    EXPECT_NEAR(x * x + y * y + z * z, 1.0, 1e-9);
    for (double v : {x, y, z}) EXPECT_LE(std::abs(v), 1.0 + 1e-10);
  }
}

TEST(Unitary2, AdjointInvertsProduct) {
  std::mt19937_64 rng(3);
  const Unitary2 u = random_unitary(rng);
  EXPECT_LT(max_abs_diff(u * u.adjoint(), Unitary2::identity()), 1e-14);
}
