#pragma once

// Explicit model functions for the pointwise fractional-Laplacian oracle.
// A profile carries its own smoothness bookkeeping so the principal-value
// quadrature can place the near-field ball and pick edge-weighted rules.

#include <cmath>
#include <functional>
#include <utility>

#include "fraclab/common.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

enum class SmoothnessTag {
  GloballySmooth,             // smooth on the whole plane (or line)
  InteriorSmoothZeroExterior, // smooth inside the support disk, identically 0 outside
  LargeClass                  // d^{a-1}-type blowup at the support circle, 0 outside
};

struct ProfileFunction {
  std::function<double(const Vec2&)> evaluator;
  SmoothnessTag smoothness_tag = SmoothnessTag::GloballySmooth;
  // Radius of the support disk (centered at the origin) for the compact tags.
  double support_radius = 0.0;
  // Power p in u ~ (R - |y|)^p near |y| = R; 0 requests a plain rule at the edge.
  double edge_exponent = 0.0;

  ProfileFunction() = default;
  ProfileFunction(std::function<double(const Vec2&)> f, SmoothnessTag tag,
                  double support, double edge)
      : evaluator(std::move(f)), smoothness_tag(tag), support_radius(support),
        edge_exponent(edge) {
    if (tag != SmoothnessTag::GloballySmooth)
      require(support > 0.0, "invalid-profile", "compact tag needs a support radius");
  }

  // The zero extension is enforced here rather than trusted to the evaluator.
  double operator()(const Vec2& y) const {
    if (smoothness_tag != SmoothnessTag::GloballySmooth &&
        y.norm() >= support_radius)
      return 0.0;
    return evaluator(y);
  }
};

// Jacobi polynomial P_k^{(alpha,0)}(t) by the three-term recurrence.
inline double jacobi_p(int k, double alpha, double t) {
  require(k >= 0, "invalid-profile", "negative Jacobi degree");
  if (k == 0) return 1.0;
  double pm1 = 1.0;
  double p = 0.5 * ((alpha + 2.0) * t + alpha);
  for (int m = 2; m <= k; ++m) {
    const double c = 2.0 * m + alpha;
    const double lhs = 2.0 * m * (m + alpha) * (c - 2.0);
    const double mid = (c - 1.0) * (c * (c - 2.0) * t + alpha * alpha);
    const double low = 2.0 * (m + alpha - 1.0) * (m - 1.0) * c;
    const double next = (mid * p - low * pm1) / lhs;
    pm1 = p;
    p = next;
  }
  return p;
}

inline ProfileFunction profile_constant_one() {
  return ProfileFunction([](const Vec2&) { return 1.0; },
                         SmoothnessTag::GloballySmooth, 0.0, 0.0);
}

inline ProfileFunction profile_gaussian() {
  return ProfileFunction([](const Vec2& y) { return std::exp(-y.squaredNorm()); },
                         SmoothnessTag::GloballySmooth, 0.0, 0.0);
}

// (1-|y|^2)^a inside the unit disk, 0 outside.
inline ProfileFunction profile_torsion(FractionalOrder order) {
  const double a = order.a;
  return ProfileFunction(
      [a](const Vec2& y) {
        const double m = 1.0 - y.squaredNorm();
        return m > 0.0 ? std::pow(m, a) : 0.0;
      },
      SmoothnessTag::InteriorSmoothZeroExterior, 1.0, a);
}

// (1-|y|^2)^a P_k^{(a,0)}(2|y|^2-1) inside the unit disk, 0 outside.
inline ProfileFunction profile_jacobi_mode(FractionalOrder order, int k) {
  const double a = order.a;
  return ProfileFunction(
      [a, k](const Vec2& y) {
        const double r2 = y.squaredNorm();
        const double m = 1.0 - r2;
        if (m <= 0.0) return 0.0;
        return std::pow(m, a) * jacobi_p(k, a, 2.0 * r2 - 1.0);
      },
      SmoothnessTag::InteriorSmoothZeroExterior, 1.0, a);
}

// (1-|y|^2)^{a-1} inside the unit disk, 0 outside.
inline ProfileFunction profile_large_harmonic(FractionalOrder order) {
  const double a = order.a;
  return ProfileFunction(
      [a](const Vec2& y) {
        const double m = 1.0 - y.squaredNorm();
        return m > 0.0 ? std::pow(m, a - 1.0) : 0.0;
      },
      SmoothnessTag::LargeClass, 1.0, a - 1.0);
}

// (1-|y|^2)^{a-1} rho^m cos(m phi) inside the unit disk, 0 outside.
inline ProfileFunction profile_large_mode(FractionalOrder order, int m, bool sine = false) {
  const double a = order.a;
  require(m >= 0, "invalid-profile", "negative angular mode");
  return ProfileFunction(
      [a, m, sine](const Vec2& y) {
        const double s = 1.0 - y.squaredNorm();
        if (s <= 0.0) return 0.0;
        const double rho = y.norm();
        const double phi = std::atan2(y.y(), y.x());
        const double ang = sine ? std::sin(m * phi) : std::cos(m * phi);
        return std::pow(s, a - 1.0) * std::pow(rho, m) * ang;
      },
      SmoothnessTag::LargeClass, 1.0, a - 1.0);
}

}  // namespace fraclab
