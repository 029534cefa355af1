#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "fraclab/common.hpp"

namespace fraclab {

struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

// Golub–Welsch: nodes are eigenvalues of the symmetric tridiagonal recurrence
// matrix, weights are mu0 times the squared first eigenvector components.
inline GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag,
                              double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  GaussRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace detail

// n-point rule for \int_{-1}^1 f(x) dx, exact through degree 2n-1.
inline GaussRule gauss_legendre(int n) {
  require(n >= 1, "invalid-quadrature", "gauss_legendre needs n >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return detail::golub_welsch(diag, sub, 2.0);
}

// n-point rule for \int_{-1}^1 (1-x)^alpha (1+x)^beta f(x) dx, alpha,beta > -1.
inline GaussRule gauss_jacobi(int n, double alpha, double beta) {
  require(n >= 1, "invalid-quadrature", "gauss_jacobi needs n >= 1");
  require(alpha > -1.0 && beta > -1.0, "invalid-quadrature",
          "gauss_jacobi exponents must exceed -1");
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  diag[0] = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double d = 2.0 * k + ab;
    diag[k] = (beta * beta - alpha * alpha) / (d * (d + 2.0));
    double b2;
    if (k == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    } else {
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
           (d * d * (d + 1.0) * (d - 1.0));
    }
    sub[k - 1] = std::sqrt(b2);
  }
  const double mu0 = std::pow(2.0, ab + 1.0) *
                     std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
  return detail::golub_welsch(diag, sub, mu0);
}

// Rule for \int_0^1 t^{e0} (1-t)^{e1} f(t) dt: nodes in (0,1), weights carry
// the weight function, so sum_i w_i f(t_i) approximates the weighted integral.
inline GaussRule gauss_jacobi01(int n, double e0, double e1) {
  GaussRule j = gauss_jacobi(n, e1, e0);
  GaussRule rule;
  rule.nodes = (j.nodes.array() + 1.0) / 2.0;
  rule.weights = j.weights * std::pow(2.0, -(e0 + e1 + 1.0));
  return rule;
}

// Plain Gauss-Legendre transplanted to [lo, hi].
inline GaussRule gauss_legendre_on(int n, double lo, double hi) {
  GaussRule g = gauss_legendre(n);
  GaussRule rule;
  rule.nodes = 0.5 * (hi - lo) * (g.nodes.array() + 1.0) + lo;
  rule.weights = g.weights * (0.5 * (hi - lo));
  return rule;
}

}  // namespace fraclab
