#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>

#include "fraclab/constants.hpp"
#include "fraclab/fields.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

// R0(x,z) = (r^2-|x-c|^2)(r^2-|z-c|^2) / (r^2 |x-z|^2)
inline double r0(const Vec2& x, const Vec2& z, const DiskGeometry& geom) {
  const double r2 = geom.radius * geom.radius;
  const double px = r2 - (x - geom.center).squaredNorm();
  const double pz = r2 - (z - geom.center).squaredNorm();
  require(px > 0.0 && pz > 0.0, "outside-domain", "r0 needs both points strictly inside");
  const double d2 = (x - z).squaredNorm();
  require(d2 > 0.0, "coincident-points", "r0 is singular on the diagonal");
  return px * pz / (r2 * d2);
}

// Evaluator for B(R) = \int_0^R t^{a-1} (1+t)^{-n/2} dt at fixed (a, n).
// The endpoint singularity t^{a-1} is absorbed by a Jacobi rule on [0, min(R,1)];
// the remaining piece over [1, R] is mapped by t -> 1/t onto [1/R, 1], where the
// integrand becomes s^{n/2-a-1} (1+s)^{-n/2} and another Jacobi rule applies.
class BetaIntegral {
public:
  BetaIntegral(FractionalOrder order, int dim, int points = 30)
      : a_(order.a), halfn_(0.5 * dim) {
    left_ = gauss_jacobi01(points, a_ - 1.0, 0.0);
    if (halfn_ > a_) inverted_ = gauss_jacobi01(points, halfn_ - a_ - 1.0, 0.0);
    log_fallback_ = gauss_legendre(48);
  }

  double operator()(double R) const {
    require(R >= 0.0, "invalid-argument", "beta_integral needs R >= 0");
    if (R == 0.0) return 0.0;
    const double head = std::min(R, 1.0);
    double value = scaled_left(head);
    if (R > 1.0) {
      if (halfn_ > a_) {
        value += scaled_inverted(1.0) - scaled_inverted(1.0 / R);
      } else {
        // t = e^tau turns the tail into a smooth integrand on [0, log R]
        const double L = std::log(R);
        for (int i = 0; i < log_fallback_.size(); ++i) {
          const double tau = 0.5 * L * (log_fallback_.nodes[i] + 1.0);
          value += 0.5 * L * log_fallback_.weights[i] * std::exp(a_ * tau) *
                   std::pow(1.0 + std::exp(tau), -halfn_);
        }
      }
    }
    return value;
  }

private:
  // \int_0^X t^{a-1} (1+t)^{-n/2} dt for X <= 1, via t = X sigma
  double scaled_left(double X) const {
    double s = 0.0;
    for (int i = 0; i < left_.size(); ++i)
      s += left_.weights[i] * std::pow(1.0 + X * left_.nodes[i], -halfn_);
    return std::pow(X, a_) * s;
  }
  // \int_0^X s^{n/2-a-1} (1+s)^{-n/2} ds for X <= 1
  double scaled_inverted(double X) const {
    double s = 0.0;
    for (int i = 0; i < inverted_.size(); ++i)
      s += inverted_.weights[i] * std::pow(1.0 + X * inverted_.nodes[i], -halfn_);
    return std::pow(X, halfn_ - a_) * s;
  }

  double a_, halfn_;
  GaussRule left_, inverted_, log_fallback_;
};

inline double beta_integral(double R, FractionalOrder order, int dim) {
  thread_local std::map<std::pair<double, int>, BetaIntegral> cache;
  auto key = std::make_pair(order.a, dim);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, BetaIntegral(order, dim)).first;
  return it->second(R);
}

// Ball Green kernel G(x,z) = c_tilde |z-x|^{2a-n} B(R0(x,z)), zero whenever
// either argument leaves the closed disk.
inline double green_disk(const Vec2& x, const Vec2& z, FractionalOrder order,
                         const DiskGeometry& geom) {
  const double r = geom.radius;
  if ((x - geom.center).norm() >= r || (z - geom.center).norm() >= r) return 0.0;
  const double d2 = (x - z).squaredNorm();
  require(d2 > 0.0, "coincident-points", "green_disk is singular on the diagonal");
  const KernelConstants kc = KernelConstants::make(order, 2);
  return kc.c_tilde * std::pow(d2, order.a - 1.0) * beta_integral(r0(x, z, geom), order, 2);
}

// Boundary limit of G(x,z)/(r^2-|z-c|^2)^a as z approaches omega on the circle:
// kappa_n (1-|x'|^2)^a / |x-omega|^n with x' the unit-disk rescaling of x.
inline double green_trace_kernel(const Vec2& x, const Vec2& omega, FractionalOrder order,
                                 const DiskGeometry& geom) {
  const double r = geom.radius;
  require(std::abs((omega - geom.center).norm() - r) <= 1e-8 * r, "off-boundary",
          "green_trace_kernel needs omega on the circle");
  const double d2 = (x - omega).squaredNorm();
  require(d2 > 1e-28, "coincident-points", "green_trace_kernel is singular at omega");
  const double rho2 = (x - geom.center).squaredNorm() / (r * r);
  require(rho2 <= 1.0, "outside-domain", "green_trace_kernel needs x in the closed disk");
  const KernelConstants kc = KernelConstants::make(order, 2);
  return kc.kappa_n * std::pow(1.0 - rho2, order.a) / d2;
}

// Poisson integral of order a-1: u(x) = kappa_n (1-|x'|^2)^a
// \int_{circle} g(omega) / |x-omega|^n dS(omega), by boundary-grid quadrature.
inline double poisson_large(const Vec2& x, const BoundaryDatum& g, FractionalOrder order,
                            const BoundaryGrid& boundary) {
  const DiskGeometry& geom = boundary.geom;
  const double r = geom.radius;
  const double rho2 = (x - geom.center).squaredNorm() / (r * r);
  require(rho2 < 1.0, "outside-domain", "poisson_large needs x strictly inside");
  require(g.values.size() == boundary.size(), "domain-mismatch",
          "datum and boundary grid disagree");
  double s = 0.0;
  for (int j = 0; j < boundary.size(); ++j)
    s += boundary.arc_weights[j] * g.values[j] / (x - boundary.nodes[j]).squaredNorm();
  const KernelConstants kc = KernelConstants::make(order, 2);
  // rescaling x and omega to the unit disk divides |x-omega|^2 by r^2 and the
  // arc measure by r, leaving an overall factor r
  return kc.kappa_n * std::pow(1.0 - rho2, order.a) * s * r;
}

// Spectral form of the same Poisson operator: the datum's trigonometric
// interpolant is extended harmonically term by term (rho^{|m|} factors), and
// the order-(a-1) solution is (1-rho^2)^{a-1} times that extension. Exact for
// band-limited data and stable at every radius, unlike the direct quadrature,
// whose angular trapezoid degrades like rho^{angular_count} near the boundary.
class PoissonFourierExtension {
public:
  PoissonFourierExtension() = default;
  PoissonFourierExtension(const BoundaryGrid& boundary, const Eigen::VectorXd& values,
                          FractionalOrder order)
      : a_(order.a) {
    const int n = boundary.size();
    require(values.size() == n, "domain-mismatch", "datum and boundary grid disagree");
    m_max_ = n / 2;
    cosc_.assign(m_max_ + 1, 0.0);
    sinc_.assign(m_max_ + 1, 0.0);
    for (int m = 0; m <= m_max_; ++m) {
      double ac = 0.0, as = 0.0;
      for (int j = 0; j < n; ++j) {
        ac += values[j] * std::cos(m * boundary.phi[j]);
        as += values[j] * std::sin(m * boundary.phi[j]);
      }
      double scale = 2.0 / n;
      if (m == 0 || (2 * m == n)) scale = 1.0 / n;
      cosc_[m] = scale * ac;
      sinc_[m] = scale * as;
    }
  }

  // classical harmonic extension of the datum, polar coordinates about center
  double harmonic(double rho, double phi) const {
    double s = 0.0, rm = 1.0;
    for (int m = 0; m <= m_max_; ++m) {
      s += rm * (cosc_[m] * std::cos(m * phi) + sinc_[m] * std::sin(m * phi));
      rm *= rho;
    }
    return s;
  }

  double harmonic_dr(double phi) const {  // d/d rho at rho = 1
    double s = 0.0;
    for (int m = 1; m <= m_max_; ++m)
      s += m * (cosc_[m] * std::cos(m * phi) + sinc_[m] * std::sin(m * phi));
    return s;
  }

  double boundary_value(double phi) const { return harmonic(1.0, phi); }

  // the order-(a-1) solution with this Dirichlet datum in the algebraic weight
  double large(double rho, double phi) const {
    return std::pow(1.0 - rho * rho, a_ - 1.0) * harmonic(rho, phi);
  }

private:
  double a_ = 0.5;
  int m_max_ = 0;
  std::vector<double> cosc_, sinc_;
};

// h_src(x) = frac_constant \int_W f(y) |x-y|^{-n-2a} dy, the positive source
// field equal to -(-Delta)^a f on the disk for f supported in the patch.
inline double exterior_source_field(const SourceFunction& f, const Vec2& x,
                                    FractionalOrder order, const ExteriorPatch& patch) {
  // the closed disk: every point is separated from the patch, so boundary
  // evaluations (needed when taking trace limits of the source field) are fine
  require((x - patch.geom.center).norm() <= patch.geom.radius, "outside-domain",
          "source field is evaluated on the closed disk");
  require(f.values.size() == patch.size(), "domain-mismatch",
          "source and patch disagree");
  const KernelConstants kc = KernelConstants::make(order, 2);
  double s = 0.0;
  for (int k = 0; k < patch.size(); ++k) {
    const double d2 = (x - patch.nodes[k]).squaredNorm();
    s += patch.weights[k] * f.values[k] * std::pow(d2, -1.0 - order.a);
  }
  return kc.frac_constant * s;
}

}  // namespace fraclab
