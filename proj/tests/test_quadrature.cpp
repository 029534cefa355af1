#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fraclab/quadrature.hpp"

using namespace fraclab;

namespace {

double log_beta(double p, double q) {
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

}  // namespace

TEST_CASE("Gauss-Legendre reproduces the two-point rule", "[quadrature]") {
  GaussRule g = gauss_legendre(2);
  CHECK(g.nodes[0] == Catch::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(g.nodes[1] == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(g.weights[0] == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(g.weights[1] == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre is exact through degree 2n-1", "[quadrature]") {
  const int n = 12;
  GaussRule g = gauss_legendre(n);
  for (int k = 0; k <= 2 * n - 1; ++k) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(s == Catch::Approx(exact).margin(1e-13));
  }
}

TEST_CASE("Gauss-Jacobi at zero exponents matches Legendre", "[quadrature]") {
  GaussRule a = gauss_jacobi(8, 0.0, 0.0);
  GaussRule b = gauss_legendre(8);
  for (int i = 0; i < 8; ++i) {
    CHECK(a.nodes[i] == Catch::Approx(b.nodes[i]).margin(1e-13));
    CHECK(a.weights[i] == Catch::Approx(b.weights[i]).margin(1e-13));
  }
}

TEST_CASE("Gauss-Jacobi reproduces the Chebyshev rule", "[quadrature]") {
  const int n = 9;
  GaussRule g = gauss_jacobi(n, -0.5, -0.5);
  for (int i = 0; i < n; ++i) {
    // ascending eigenvalue order: node i is cos((n-i-1/2)pi/n)
    const double expect = std::cos((n - i - 0.5) * pi / n);
    CHECK(g.nodes[i] == Catch::Approx(expect).margin(1e-13));
    CHECK(g.weights[i] == Catch::Approx(pi / n).margin(1e-13));
  }
}

TEST_CASE("unit-interval Jacobi rule integrates weighted monomials exactly", "[quadrature]") {
  const int n = 10;
  for (double e0 : {-0.5, -0.25, 0.3}) {
    for (double e1 : {-0.7, 0.0, 0.5}) {
      GaussRule g = gauss_jacobi01(n, e0, e1);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
        const double exact = std::exp(log_beta(e0 + k + 1.0, e1 + 1.0));
        CHECK(s == Catch::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("transplanted Legendre rule integrates on a shifted interval", "[quadrature]") {
  GaussRule g = gauss_legendre_on(6, 1.5, 2.0);
  double s = 0, lin = 0;
  for (int i = 0; i < g.size(); ++i) {
    s += g.weights[i];
    lin += g.weights[i] * g.nodes[i];
  }
  CHECK(s == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(lin == Catch::Approx(0.5 * (2.0 * 2.0 - 1.5 * 1.5)).epsilon(1e-14));
}

TEST_CASE("quadrature construction rejects bad arguments", "[quadrature]") {
  CHECK_THROWS_AS(gauss_legendre(0), Error);
  CHECK_THROWS_AS(gauss_jacobi(4, -1.0, 0.0), Error);
  CHECK_THROWS_AS(gauss_jacobi(4, 0.0, -1.5), Error);
}
