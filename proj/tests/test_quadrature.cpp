#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rstokes/quadrature.hpp"

using namespace rstokes;

namespace {

// int over the reference triangle of xi^a eta^b = a! b! / (a + b + 2)!
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

double apply(const QuadratureRule& rule, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    s += rule.weights[q] * std::pow(rule.points[q][0], a) * std::pow(rule.points[q][1], b);
  }
  return s;
}

}  // namespace

TEST(GaussLegendre, ExactForPolynomials) {
  for (int n = 1; n <= 20; ++n) {
    const LineRule rule = gauss_legendre(n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(TriangleRule, ExactToDegree) {
  for (int degree : {1, 2, 4, 6, 10, 14}) {
    const QuadratureRule rule = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        EXPECT_NEAR(apply(rule, a, b), monomial_integral(a, b), 1e-15) << degree << ' ' << a << ' ' << b;
      }
    }
  }
}

TEST(TriangleRule, PointsInsideAwayFromVertices) {
  const QuadratureRule rule = triangle_rule(6);
  for (const auto& p : rule.points) {
    EXPECT_GT(p[0], 0.0);
    EXPECT_GT(p[1], 0.0);
    EXPECT_LT(p[0] + p[1], 1.0);
  }
}

TEST(GradedTriangleRule, ExactAndResolvesVertexSingularity) {
  for (int vertex = 0; vertex < 3; ++vertex) {
    const QuadratureRule rule = graded_triangle_rule(6, vertex);
    for (int a = 0; a <= 6; ++a) {
      for (int b = 0; a + b <= 6; ++b) EXPECT_NEAR(apply(rule, a, b), monomial_integral(a, b), 1e-14);
    }
  }
  // (xi + eta)^{-3/2} is integrable at the vertex: int_0^1 u^{-3/2} u du = 2.
  // Degree 18 uses ten Gauss points per graded interval.
  const QuadratureRule rule = graded_triangle_rule(18, 0, 30, 0.15);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    s += rule.weights[q] * std::pow(rule.points[q][0] + rule.points[q][1], -1.5);
  }
  EXPECT_NEAR(s, 2.0, 1e-7);
}

TEST(GradedLineRule, IntegratesEndpointSingularity) {
  const LineRule rule = graded_line_rule(10, 30, 0.15);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * std::pow(rule.points[q], -0.5);
  // Ten Gauss points per geometric interval of ratio 0.15 resolve x^{-1/2}
  // to about 1e-8.
  EXPECT_NEAR(s, 2.0, 1e-7);
}

TEST(AdaptiveIntegral, SmoothAndSingular) {
  EXPECT_NEAR(adaptive_integral([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-13);
  EXPECT_NEAR(adaptive_integral([](double x) { return std::pow(x, -0.5); }, 0.0, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(adaptive_integral([](double x) { return std::log(x); }, 0.0, 1.0), -1.0, 1e-12);
  EXPECT_NEAR(adaptive_integral([](double x) { return std::pow(x, 0.01); }, 0.0, 0.5),
              std::pow(0.5, 1.01) / 1.01, 1e-14);
}
