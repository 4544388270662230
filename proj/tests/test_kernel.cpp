#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctrap/kernel.hpp"
#include "ctrap/special.hpp"
#include "ctrap/sphere.hpp"

using namespace ctrap;

TEST(Kernel, FirstExample) {
  const auto k = make_monomial_kernel({2, 0, 0}, 3.5);
  EXPECT_DOUBLE_EQ(k.delta, 1.5);
  EXPECT_EQ(k.kappa, 0);
  EXPECT_TRUE(k.identity_axes());
}

TEST(Kernel, SecondExample) {
  const auto k = make_monomial_kernel({1, 0, 0}, 2.0);
  EXPECT_DOUBLE_EQ(k.delta, 2.0);
  EXPECT_EQ(k.kappa, 1);
  const double x[] = {0.3, -0.2, 0.7};
  const double y[] = {-0.3, -0.2, 0.7};
  EXPECT_EQ(k(y), -k(x));
}

TEST(Kernel, InverseDistance) {
  const auto k = make_monomial_kernel({0, 0}, 1.0);
  EXPECT_DOUBLE_EQ(k.delta, 1.0);
  EXPECT_EQ(k.kappa, 0);
  const double x[] = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(k(x), 0.2);
}

TEST(Kernel, Admissibility) {
  try {
    make_monomial_kernel({2, 0, 0}, 2.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::admissibility_violation);
  }
  EXPECT_THROW(make_monomial_kernel({2, 0, 0}, 5.0), error);
}

TEST(Kernel, RelabelsOddAxesFirst) {
  const auto k = make_monomial_kernel({2, 1, 0, 3}, 6.5);
  EXPECT_EQ(k.kappa, 2);
  EXPECT_EQ(k.axis_order, (std::vector<int>{1, 3, 0, 2}));
  EXPECT_EQ(k.monomial->alpha, (MultiIndex{1, 3, 2, 0}));
  const double nat[] = {0.4, -0.3, 0.2, 0.9};
  const auto can = k.to_canonical(nat);
  const double direct = std::pow(0.4, 2) * -0.3 * std::pow(0.9, 3) /
                        std::pow(0.16 + 0.09 + 0.04 + 0.81, 3.25);
  EXPECT_NEAR(k(can), direct, 1e-15);
  const auto back = k.to_natural(can);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(back[i], nat[i]);
}

TEST(Kernel, ValidationPasses) {
  const auto r1 = validate_kernel(make_monomial_kernel({2, 0, 0}, 3.5), 200, 1e-12);
  EXPECT_TRUE(r1.passed) << r1.max_dilation_violation << " " << r1.max_symmetry_violation;
  const auto r2 = validate_kernel(make_monomial_kernel({1, 0, 0}, 2.0), 200, 1e-12);
  EXPECT_TRUE(r2.passed);
}

TEST(Kernel, ValidationCatchesWrongKappa) {
  const auto s2 = make_monomial_kernel({1, 0, 0}, 2.0);
  const auto wrong = make_custom_kernel(3, 2.0, 0, s2.evaluate, s2.angular, "s2 declared even");
  const auto r = validate_kernel(wrong, 50, 1e-12);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.violating_axis, 0);
  EXPECT_EQ(r.violating_point.size(), 3u);
}

TEST(Kernel, AngularFactor) {
  const auto k = make_monomial_kernel({2, 1, 0}, 4.2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 1000; ++s) {
    double x[3], th[3], r2 = 0;
    for (auto& v : x) {
      v = nd(rng);
      r2 += v * v;
    }
    const double r = std::sqrt(r2);
    for (int i = 0; i < 3; ++i) th[i] = x[i] / r;
    const double lhs = k(x) * std::pow(r, k.n - k.delta);
    const double rhs = k.angular(th);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Special, GammaReferenceValues) {
  // mpmath, 20 digits
  const std::pair<double, double> ref[] = {
      {0.1875, 4.915113473814229487}, {0.375, 2.3704361844166009086}, {0.5, 1.7724538509055160273},
      {1.5, 0.88622692545275801365},  {2.5, 1.3293403881791370205},  {7.5, 1871.2543057977883465},
      {15.0, 87178291200.0},          {0.8125, 1.1504754492745264716}, {4.25, 8.2850851418352201659}};
  for (auto [x, g] : ref) EXPECT_NEAR(gamma_fn(x), g, 1e-13 * g) << x;
}

TEST(Special, GaussLegendre) {
  const auto [x, w] = gauss_legendre(10);
  double s0 = 0, s18 = 0;
  for (int i = 0; i < 10; ++i) {
    s0 += w[i];
    s18 += w[i] * std::pow(x[i], 18);
  }
  EXPECT_NEAR(s0, 2.0, 1e-14);
  EXPECT_NEAR(s18, 2.0 / 19.0, 1e-14);
}

TEST(Sphere, AreaAndMonomials) {
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  EXPECT_NEAR(sphere_integral(one, 3, 8), 4 * M_PI, 1e-13);
  EXPECT_NEAR(sphere_integral(one, 2, 8), 2 * M_PI, 1e-13);
  EXPECT_NEAR(sphere_integral(one, 4, 8), 2 * M_PI * M_PI, 1e-12);
  EXPECT_NEAR(sphere_monomial_integral({0, 0, 0}), 4 * M_PI, 1e-13);
  EXPECT_NEAR(sphere_monomial_integral({2, 0, 0}), 4 * M_PI / 3, 1e-13);
  EXPECT_EQ(sphere_monomial_integral({1, 2, 0}), 0.0);
  const MultiIndex a{4, 2, 2};
  const PointFunction f = [&](std::span<const double> t) { return std::pow(t[0], 4) * t[1] * t[1] * t[2] * t[2]; };
  EXPECT_NEAR(sphere_integral(f, 3, 12), sphere_monomial_integral(a), 1e-14);
}
