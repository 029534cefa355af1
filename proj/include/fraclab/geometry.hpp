#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

using Vec2 = Eigen::Vector2d;

struct FractionalOrder {
  double a;
  explicit FractionalOrder(double a_) : a(a_) {
    require(a > 0.0 && a < 1.0, "invalid-order", "fractional order must lie in (0,1)");
  }
};

struct DiskGeometry {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  static constexpr int n = 2;
  DiskGeometry() = default;
  DiskGeometry(const Vec2& c, double r) : center(c), radius(r) {
    require(r > 0.0, "invalid-geometry", "disk radius must be positive");
  }
};

// Angular interval [phi0, phi1) identifying the measurement arc; spans of 2*pi
// or more mean the full circle.
struct AngularInterval {
  double phi0 = 0.0;
  double phi1 = pi;
  bool full() const { return phi1 - phi0 >= 2.0 * pi - 1e-12; }
  bool contains(double phi) const {
    if (full()) return true;
    double t = std::fmod(phi - phi0, 2.0 * pi);
    if (t < 0) t += 2.0 * pi;
    return t < phi1 - phi0 - 1e-14;
  }
};

// Tensor polar grid over the disk. Node layout is angular-major:
// index(i, j) = j * radial_count + i with i indexing radius and j angle.
// The radial rule is Gauss-Jacobi for the measure (1-rho)^{a-1} d rho, so
// nodes cluster at the boundary where solutions behave like d^a and d^{a-1}.
struct InteriorGrid {
  std::vector<Vec2> nodes;
  Eigen::VectorXd weights;   // plain area weights
  Eigen::VectorXd dist;      // r - |x - center|
  Eigen::VectorXd weight_a;  // (r^2 - |x - center|^2)^a
  int radial_count = 0;
  int angular_count = 0;
  Eigen::VectorXd rho;                  // radial coordinates in (0,1)
  Eigen::VectorXd phi;                  // angular coordinates
  Eigen::VectorXd radial_rule_weights;  // weights for \int_0^1 f (1-rho)^{a-1} d rho
  Eigen::VectorXd radial_plain_weights; // weights for \int_0^1 f rho d rho
  double order_a = 0.0;
  DiskGeometry geom;

  int size() const { return static_cast<int>(nodes.size()); }
  int index(int i, int j) const { return j * radial_count + i; }
  double node_rho(int k) const { return rho[k % radial_count]; }
  double node_phi(int k) const { return phi[k / radial_count]; }
};

struct BoundaryGrid {
  std::vector<Vec2> nodes;
  Eigen::VectorXd arc_weights;
  Eigen::VectorXd phi;
  std::vector<bool> sigma_mask;
  AngularInterval sigma;
  DiskGeometry geom;

  int size() const { return static_cast<int>(nodes.size()); }
  int sigma_count() const {
    int c = 0;
    for (bool b : sigma_mask) c += b ? 1 : 0;
    return c;
  }
};

struct ExteriorPatch {
  std::vector<Vec2> nodes;
  Eigen::VectorXd weights;
  double separation = 0.0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  int radial_count = 0;
  int angular_count = 0;
  DiskGeometry geom;

  int size() const { return static_cast<int>(nodes.size()); }
};

struct DiskGrids {
  InteriorGrid interior;
  BoundaryGrid boundary;
};

inline DiskGrids build_disk_grids(const DiskGeometry& geom, int radial_count,
                                  int angular_count, FractionalOrder order,
                                  AngularInterval sigma = AngularInterval{}) {
  require(radial_count >= 4, "invalid-grid-counts", "radial_count must be at least 4");
  require(angular_count >= 8, "invalid-grid-counts", "angular_count must be at least 8");

  const double a = order.a;
  const double r = geom.radius;
  GaussRule radial = gauss_jacobi01(radial_count, 0.0, a - 1.0);

  DiskGrids grids;
  InteriorGrid& in = grids.interior;
  in.radial_count = radial_count;
  in.angular_count = angular_count;
  in.order_a = a;
  in.geom = geom;
  in.rho = radial.nodes;
  in.radial_rule_weights = radial.weights;
  in.radial_plain_weights.resize(radial_count);
  for (int i = 0; i < radial_count; ++i) {
    // strip the rule's (1-rho)^{a-1} measure and attach the polar Jacobian
    in.radial_plain_weights[i] =
        radial.weights[i] * std::pow(1.0 - radial.nodes[i], 1.0 - a) * radial.nodes[i];
  }

  const int nn = radial_count * angular_count;
  in.nodes.resize(nn);
  in.weights.resize(nn);
  in.dist.resize(nn);
  in.weight_a.resize(nn);
  in.phi.resize(angular_count);
  const double dphi = 2.0 * pi / angular_count;
  for (int j = 0; j < angular_count; ++j) {
    const double phi = j * dphi;
    in.phi[j] = phi;
    const Vec2 dir(std::cos(phi), std::sin(phi));
    for (int i = 0; i < radial_count; ++i) {
      const int k = in.index(i, j);
      const double rho = radial.nodes[i];
      in.nodes[k] = geom.center + (r * rho) * dir;
      in.weights[k] = in.radial_plain_weights[i] * dphi * r * r;
      in.dist[k] = r * (1.0 - rho);
      in.weight_a[k] = std::pow(r * r * (1.0 - rho * rho), a);
    }
  }

  BoundaryGrid& bd = grids.boundary;
  bd.geom = geom;
  bd.sigma = sigma;
  bd.nodes.resize(angular_count);
  bd.arc_weights.resize(angular_count);
  bd.phi.resize(angular_count);
  bd.sigma_mask.resize(angular_count);
  for (int j = 0; j < angular_count; ++j) {
    const double phi = j * dphi;
    bd.phi[j] = phi;
    bd.nodes[j] = geom.center + r * Vec2(std::cos(phi), std::sin(phi));
    bd.arc_weights[j] = r * dphi;
    bd.sigma_mask[j] = sigma.contains(phi);
  }
  require(bd.sigma_count() > 0, "empty-sigma", "measurement arc contains no boundary nodes");
  return grids;
}

inline ExteriorPatch build_exterior_patch(const DiskGeometry& geom, double inner_radius,
                                          double outer_radius, int radial_count,
                                          int angular_count) {
  require(inner_radius > geom.radius, "patch-overlaps-disk",
          "exterior patch must keep positive separation from the disk");
  require(outer_radius > inner_radius, "invalid-geometry",
          "patch outer radius must exceed inner radius");
  require(radial_count >= 2 && angular_count >= 8, "invalid-grid-counts",
          "patch needs at least 2 radial and 8 angular nodes");

  GaussRule radial = gauss_legendre_on(radial_count, inner_radius, outer_radius);
  ExteriorPatch patch;
  patch.geom = geom;
  patch.inner_radius = inner_radius;
  patch.outer_radius = outer_radius;
  patch.radial_count = radial_count;
  patch.angular_count = angular_count;
  patch.separation = inner_radius - geom.radius;
  const int nn = radial_count * angular_count;
  patch.nodes.resize(nn);
  patch.weights.resize(nn);
  const double dphi = 2.0 * pi / angular_count;
  for (int j = 0; j < angular_count; ++j) {
    const Vec2 dir(std::cos(j * dphi), std::sin(j * dphi));
    for (int i = 0; i < radial_count; ++i) {
      const int k = j * radial_count + i;
      const double s = radial.nodes[i];
      patch.nodes[k] = geom.center + s * dir;
      patch.weights[k] = radial.weights[i] * s * dphi;
    }
  }
  return patch;
}

}  // namespace fraclab
