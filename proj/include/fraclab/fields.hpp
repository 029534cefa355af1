#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "fraclab/geometry.hpp"

namespace fraclab {

// Gaussian profile exp(-beta (d/width)^2) truncated to exact zero once it
// falls below 1e-14, so bump-shaped fields have genuinely compact support.
// beta is chosen so the profile is below the cutoff strictly inside d = width.
inline double truncated_gaussian(double dist, double width) {
  constexpr double beta = 36.841361487904734;  // 16 ln 10
  const double v = std::exp(-beta * (dist / width) * (dist / width));
  return v < 1e-14 ? 0.0 : v;
}

struct Potential {
  Eigen::VectorXd values;
  double support_radius = 0.0;

  Potential() = default;
  Potential(const InteriorGrid& grid, Eigen::VectorXd vals, double support)
      : values(std::move(vals)), support_radius(support) {
    require(values.size() == grid.size(), "domain-mismatch",
            "potential values must be sampled on the interior grid");
    require(support_radius <= 0.9 * grid.geom.radius, "invalid-potential",
            "potential support must stay within 0.9 of the disk radius");
    for (int k = 0; k < grid.size(); ++k) {
      const double d = (grid.nodes[k] - grid.geom.center).norm();
      if (d > support_radius) {
        require(values[k] == 0.0, "invalid-potential",
                "potential must vanish outside its declared support radius");
      }
    }
  }

  static Potential zero(const InteriorGrid& grid) {
    return Potential(grid, Eigen::VectorXd::Zero(grid.size()), 0.0);
  }

  static Potential bump(const InteriorGrid& grid, const Vec2& center, double height,
                        double width) {
    Eigen::VectorXd v(grid.size());
    for (int k = 0; k < grid.size(); ++k)
      v[k] = height * truncated_gaussian((grid.nodes[k] - center).norm(), width);
    const double support = (center - grid.geom.center).norm() + width;
    return Potential(grid, std::move(v), support);
  }

  static Potential two_bumps(const InteriorGrid& grid, const Vec2& c1, double h1,
                             const Vec2& c2, double h2, double width) {
    Eigen::VectorXd v(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
      v[k] = h1 * truncated_gaussian((grid.nodes[k] - c1).norm(), width) +
             h2 * truncated_gaussian((grid.nodes[k] - c2).norm(), width);
    }
    const double support = std::max((c1 - grid.geom.center).norm(),
                                    (c2 - grid.geom.center).norm()) +
                           width;
    return Potential(grid, std::move(v), support);
  }

  bool is_zero() const { return values.size() == 0 || values.isZero(0.0); }
};

struct SourceFunction {
  Eigen::VectorXd values;

  SourceFunction() = default;
  explicit SourceFunction(Eigen::VectorXd vals) : values(std::move(vals)) {
    require(values.allFinite(), "invalid-source", "source values must be finite");
  }

  static SourceFunction from_function(const ExteriorPatch& patch,
                                      const std::function<double(const Vec2&)>& f) {
    Eigen::VectorXd v(patch.size());
    for (int k = 0; k < patch.size(); ++k) v[k] = f(patch.nodes[k]);
    return SourceFunction(std::move(v));
  }
};

struct BoundaryDatum {
  Eigen::VectorXd values;

  BoundaryDatum() = default;
  BoundaryDatum(const BoundaryGrid& grid, Eigen::VectorXd vals)
      : values(std::move(vals)) {
    require(values.size() == grid.size(), "domain-mismatch",
            "boundary datum must be sampled on the boundary grid");
    for (int j = 0; j < grid.size(); ++j) {
      require(grid.sigma_mask[j] || values[j] == 0.0, "invalid-datum",
              "boundary datum must vanish outside the measurement arc");
    }
  }

  // Samples f(phi) on the arc and extends by zero off the mask.
  static BoundaryDatum from_angle_function(const BoundaryGrid& grid,
                                           const std::function<double(double)>& f) {
    Eigen::VectorXd v(grid.size());
    for (int j = 0; j < grid.size(); ++j)
      v[j] = grid.sigma_mask[j] ? f(grid.phi[j]) : 0.0;
    return BoundaryDatum(grid, std::move(v));
  }
};

enum class SolutionClass { AClass, LargeClass };

struct FieldSolution {
  SolutionClass class_tag = SolutionClass::AClass;
  Eigen::VectorXd interior_values;
  Eigen::VectorXd trace_a;    // limit of u'/d^a on the boundary
  Eigen::VectorXd trace_am1;  // limit of u/d^{a-1}; identically 0 for the a-class
  // Solver byproducts reused by identity checks and probe interpolation.
  Eigen::VectorXd density;         // a-class: psi with w = K[psi]; large class: -q*u
  Eigen::VectorXd rhs;             // a-class source field at interior nodes
  Eigen::VectorXd smooth_factor;   // u / (1-rho^2)^a, or / (1-rho^2)^{a-1} large class
  Eigen::VectorXd smooth_boundary; // boundary column of smooth_factor
  double residual = 0.0;  // max-norm residual of the discrete linear system
  double rcond = 1.0;     // reciprocal condition estimate of the solved system
};

}  // namespace fraclab
