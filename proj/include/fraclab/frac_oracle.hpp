#pragma once

// Pointwise principal-value evaluation of (-Delta)^a for explicit profiles.
//
//   (-Delta)^a u(x) = C_{n,a} p.v. Int (u(x)-u(y)) |x-y|^{-n-2a} dy
//
// Split at radius rho around x.  The near field is symmetrized over antipodal
// angles, 2u(x)-u(x+se)-u(x-se) = O(s^2), which kills the principal value
// without touching derivatives of u; the radial factor s^{1-2a} is absorbed
// into a Gauss-Jacobi rule.  The far field is u(x)*Int |z|^{-n-2a} minus a
// panelled integral of u along rays, with an edge-weighted last panel when the
// profile has a power-law edge and an analytic O(T^{-2a}) tail bound for
// globally smooth profiles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/constants.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/profiles.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

struct OracleValue {
  double value;
  double error_estimate;  // difference between two quadrature resolutions
};

namespace detail {

struct OracleCounts {
  int near_radial;
  int near_angular;
  int out_angular;
  int panel_nodes;
};

inline OracleCounts oracle_counts(int level) {
  // level -1 is the internal coarse pass used for the error estimate
  return OracleCounts{8 + 4 * level, 16 + 8 * level, 32 + 16 * level,
                      12 + 4 * level};
}

// Int_{s0}^{s1} u(x+s e) s^{-1-2a} ds over geometric panels of ratio 3.
// When the ray ends on the support circle, the last panel weights in the
// (s1-s)^{edge} behavior through a right-edge Jacobi rule.
inline double ray_integral(const ProfileFunction& u, const Vec2& x, const Vec2& e,
                           double s0, double s1, double a, bool edge_weighted,
                           double edge, const GaussRule& plain,
                           const GaussRule& edge_rule) {
  double total = 0.0;
  double lo = s0;
  while (lo < s1) {
    double hi = std::min(3.0 * lo, s1);
    if (hi > 0.9 * s1) hi = s1;  // avoid a sliver of a final panel
    const bool last = hi == s1;
    const double width = hi - lo;
    if (last && edge_weighted && edge != 0.0) {
      // s = lo + width*t; the factor (1-t)^{edge} sits inside the rule weights
      for (int k = 0; k < edge_rule.size(); ++k) {
        const double t = edge_rule.nodes[k];
        const double s = lo + width * t;
        total += width * edge_rule.weights[k] * u(x + s * e) *
                 std::pow(s, -1.0 - 2.0 * a) * std::pow(1.0 - t, -edge);
      }
    } else {
      for (int k = 0; k < plain.size(); ++k) {
        const double s = lo + width * 0.5 * (plain.nodes[k] + 1.0);
        total += width * 0.5 * plain.weights[k] * u(x + s * e) *
                 std::pow(s, -1.0 - 2.0 * a);
      }
    }
    lo = hi;
  }
  return total;
}

inline double pv_once(const ProfileFunction& u, const Vec2& x, double a, int n,
                      const OracleCounts& c) {
  const bool compact = u.smoothness_tag != SmoothnessTag::GloballySmooth;
  const double dist =
      compact ? u.support_radius - x.norm() : std::numeric_limits<double>::infinity();
  const double rho = std::min(0.1, 0.5 * dist);
  const double ux = u(x);

  // near field: Int_0^rho D(s) s^{-1-2a} ds per direction pair, D = O(s^2)
  const GaussRule radial = gauss_jacobi01(c.near_radial, 1.0 - 2.0 * a, 0.0);
  const double rho_pow = std::pow(rho, -2.0 * a);
  double near = 0.0;
  const int pairs = n == 2 ? c.near_angular : 1;
  for (int j = 0; j < pairs; ++j) {
    const double phi = pi * j / pairs;
    const Vec2 e(std::cos(phi), std::sin(phi));
    double radial_sum = 0.0;
    for (int k = 0; k < radial.size(); ++k) {
      const double t = radial.nodes[k];
      const double s = rho * t;
      const double d2 = 2.0 * ux - u(x + s * e) - u(x - s * e);
      radial_sum += radial.weights[k] * d2 / (t * t);
    }
    near += (n == 2 ? pi / pairs : 1.0) * rho_pow * radial_sum;
  }

  // complement of the ball: u(x) times the exact kernel mass beyond rho
  const double sphere = n == 2 ? 2.0 * pi : 2.0;
  double total = near + ux * sphere * rho_pow / (2.0 * a);

  // far field along rays, truncated at the support circle or at T with a tail
  const double truncation = 50.0;
  const GaussRule plain = gauss_legendre(c.panel_nodes);
  const bool edge_weighted = compact && u.edge_exponent != 0.0;
  const GaussRule edge_rule = edge_weighted
                                  ? gauss_jacobi01(c.panel_nodes, 0.0, u.edge_exponent)
                                  : plain;
  const int rays = n == 2 ? c.out_angular : 2;
  double out = 0.0;
  double far_average = 0.0;
  for (int m = 0; m < rays; ++m) {
    const double phi = 2.0 * pi * m / rays;
    const Vec2 e = n == 2 ? Vec2(std::cos(phi), std::sin(phi))
                          : Vec2(m == 0 ? 1.0 : -1.0, 0.0);
    double reach = truncation;
    if (compact) {
      const double xe = x.dot(e);
      reach = -xe + std::sqrt(xe * xe + u.support_radius * u.support_radius -
                              x.squaredNorm());
    }
    out += (n == 2 ? 2.0 * pi / rays : 1.0) *
           ray_integral(u, x, e, rho, reach, a, edge_weighted, u.edge_exponent,
                        plain, edge_rule);
    if (!compact) far_average += u(x + truncation * e) / rays;
  }
  if (!compact)
    out += far_average * sphere * std::pow(truncation, -2.0 * a) / (2.0 * a);
  return total - out;
}

}  // namespace detail

inline OracleValue pv_fractional_laplacian(const ProfileFunction& u, const Vec2& x,
                                           FractionalOrder order, int n,
                                           int quad_level) {
  require(n == 1 || n == 2, "invalid-dimension", "n must be 1 or 2");
  require(quad_level >= 0, "invalid-quad-level", "quad_level must be nonnegative");
  require(n == 2 || x.y() == 0.0, "invalid-probe-point",
          "one-dimensional probes live on the axis");
  if (u.smoothness_tag != SmoothnessTag::GloballySmooth) {
    const double dist = u.support_radius - x.norm();
    if (dist <= 0.0)
      fail("exterior-probe-unsupported",
           "probe outside the support disk of a compact profile");
    if (dist < 0.02)
      fail("near-discontinuity", "probe within 0.02 of the support circle");
  }
  const double c = KernelConstants::make(order, n).frac_constant;
  const double fine = detail::pv_once(u, x, order.a, n, detail::oracle_counts(quad_level));
  const double coarse =
      detail::pv_once(u, x, order.a, n, detail::oracle_counts(quad_level - 1));
  return OracleValue{c * fine, std::abs(c * (fine - coarse))};
}

struct CertificateRow {
  Vec2 probe;
  double residual;  // (-Delta)^a u + q u - rhs at the probe
  double scale;     // local magnitude of u around the probe
};

struct CertificateReport {
  std::vector<CertificateRow> rows;
  double worst = 0.0;  // max |residual| / scale over the probes
};

// Fixed probe ladder for PDE certification: radii up to 0.8 at four angles,
// keeping the given clearance from every listed center (support edges of the
// potential, typically).  Deterministic so runs are comparable.
inline std::vector<Vec2> certificate_probes(const std::vector<Vec2>& avoid = {},
                                            double clearance = 0.0,
                                            int count = 10) {
  std::vector<Vec2> probes;
  const double rad[5] = {0.05, 0.2, 0.45, 0.65, 0.8};
  const double ang[4] = {0.0, 0.98, pi, 5.3};
  for (int i = 0; i < 5 && static_cast<int>(probes.size()) < count; ++i)
    for (int j = 0; j < 4 && static_cast<int>(probes.size()) < count; ++j) {
      const Vec2 x(rad[i] * std::cos(ang[j]), rad[i] * std::sin(ang[j]));
      bool clear = true;
      for (const Vec2& c : avoid)
        if ((x - c).norm() < clearance) clear = false;
      if (clear) probes.push_back(x);
    }
  return probes;
}

// PDE residual check (-Delta)^a u + q u = rhs at the probes, each residual
// normalized by the local scale of u (largest magnitude over the probe and a
// small ring of samples around it).
inline CertificateReport oracle_certificate(
    const ProfileFunction& u, const std::function<double(const Vec2&)>& q_of_x,
    const std::function<double(const Vec2&)>& rhs, const std::vector<Vec2>& probes,
    FractionalOrder order, int quad_level = 2) {
  CertificateReport report;
  for (const Vec2& x : probes) {
    double scale = std::abs(u(x));
    for (int s = 0; s < 8; ++s) {
      const double th = 2.0 * pi * s / 8.0;
      const Vec2 y = x + 0.05 * Vec2(std::cos(th), std::sin(th));
      scale = std::max(scale, std::abs(u(y)));
    }
    const OracleValue v = pv_fractional_laplacian(u, x, order, 2, quad_level);
    const double qx = q_of_x ? q_of_x(x) : 0.0;
    const double rx = rhs ? rhs(x) : 0.0;
    const double res = v.value + qx * u(x) - rx;
    report.rows.push_back(CertificateRow{x, res, scale});
    if (scale > 0.0) report.worst = std::max(report.worst, std::abs(res) / scale);
  }
  return report;
}

// Richardson-extrapolated radial limit of u((1-eps)omega)/eps^{exponent}.
inline double boundary_ratio_limit(const ProfileFunction& u, const Vec2& omega,
                                   double exponent) {
  require(std::abs(omega.norm() - 1.0) < 1e-8, "off-boundary",
          "ratio limits are taken along radii of the unit circle");
  const double eps[3] = {1e-2, 1e-3, 1e-4};
  double r[3];
  for (int i = 0; i < 3; ++i)
    r[i] = u((1.0 - eps[i]) * omega) / std::pow(eps[i], exponent);
  const double scale = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
  if (scale == 0.0) return 0.0;
  const bool decaying =
      std::abs(r[1]) <= 0.3 * std::abs(r[0]) && std::abs(r[2]) <= 0.3 * std::abs(r[1]);
  if (decaying) return 0.0;
  const double spread =
      (*std::max_element(r, r + 3) - *std::min_element(r, r + 3)) /
      std::max(std::abs(r[2]), 1e-300);
  if (spread > 0.1)
    fail("nonconvergent-limit",
         "radial ratios neither settle nor decay; wrong exponent for this profile");
  // the ratio expands in powers of eps, and the levels shrink by 10
  const double first = (10.0 * r[1] - r[0]) / 9.0;
  const double second = (10.0 * r[2] - r[1]) / 9.0;
  return (100.0 * second - first) / 99.0;
}

// (-Delta)^a f at a point separated from supp f: no principal value arises
// and the defining integral collapses to -C_{n,a} Int f(y) |x-y|^{-n-2a} dy
// over the support annulus, evaluated with the patch quadrature.
inline double offsupport_fractional_laplacian(const SourceFunction& f,
                                              const Vec2& x,
                                              FractionalOrder order,
                                              const ExteriorPatch& patch) {
  require((x - patch.geom.center).norm() < patch.inner_radius,
          "invalid-probe-point",
          "the plain-integral route needs x separated from the source annulus");
  return -exterior_source_field(f, x, order, patch);
}

}  // namespace fraclab
