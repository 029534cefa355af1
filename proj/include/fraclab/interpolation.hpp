#pragma once

// Globally smooth interpolation of grid fields in polar coordinates.
// Radially a barycentric Lagrange polynomial through the quadrature nodes
// (optionally augmented by a boundary column at rho = 1); angularly a full
// Fourier series through the equispaced angles.  Smoothness everywhere matters
// because the pointwise oracle feeds interpolated values into symmetrized
// second differences, which would amplify any stencil-switching jumps.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "fraclab/common.hpp"
#include "fraclab/fields.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/profiles.hpp"

namespace fraclab {

class PolarInterpolant {
 public:
  // values are angular-major on the interior grid: index j*nr + i.
  // boundary_column, when given, supplies the rho = 1 limits per angle.
  // radial_degree >= 0 replaces each angular mode's radial profile by its
  // weighted least-squares polynomial of that degree in 2 rho^2 - 1 (odd
  // modes carry one factor of rho for parity); this damps the node-frequency
  // component of discretization error instead of threading through it.
  PolarInterpolant(const InteriorGrid& grid, const Eigen::VectorXd& values,
                   const Eigen::VectorXd* boundary_column = nullptr,
                   int radial_degree = -1)
      : geom_(grid.geom) {
    require(values.size() == grid.size(), "domain-mismatch",
            "interpolant values must live on the interior grid");
    const int nr = grid.radial_count;
    const int nphi = grid.angular_count;
    const int rows = nr + (boundary_column ? 1 : 0);
    if (boundary_column)
      require(boundary_column->size() == nphi, "domain-mismatch",
              "boundary column must have one value per grid angle");

    rho_.resize(rows);
    for (int i = 0; i < nr; ++i) rho_[i] = grid.rho[i];
    if (boundary_column) rho_[nr] = 1.0;

    // Fourier coefficients per radius; the same half-spectrum convention as
    // the harmonic extension (modes 0..nphi/2, Nyquist and mean halved).
    modes_ = nphi / 2;
    cosc_.setZero(rows, modes_ + 1);
    sinc_.setZero(rows, modes_ + 1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < nphi; ++j) {
        const double v = boundary_column && i == nr
                             ? (*boundary_column)[j]
                             : values[grid.index(i, j)];
        const double phi = 2.0 * pi * j / nphi;
        for (int m = 0; m <= modes_; ++m) {
          cosc_(i, m) += v * std::cos(m * phi);
          sinc_(i, m) += v * std::sin(m * phi);
        }
      }
      for (int m = 0; m <= modes_; ++m) {
        const double scale = (m == 0 || m == modes_) ? 1.0 : 2.0;
        cosc_(i, m) *= scale / nphi;
        sinc_(i, m) *= scale / nphi;
      }
    }

    if (radial_degree >= 0) {
      const int deg = std::min(radial_degree, rows - 1);
      Eigen::VectorXd sw(rows);
      double wmean = 0.0;
      for (int i = 0; i < nr; ++i) wmean += grid.radial_plain_weights[i];
      wmean /= nr;
      for (int i = 0; i < rows; ++i)
        sw[i] = std::sqrt(i < nr ? grid.radial_plain_weights[i] : wmean);
      for (int m = 0; m <= modes_; ++m) {
        // mode m must vanish like rho^m at the center; carrying the first few
        // powers explicitly keeps the fitted field smooth across the origin,
        // where spurious angular content would break the second differences
        // the pointwise operator is built from
        const int vanish = std::min(m, m % 2 == 0 ? 4 : 5);
        Eigen::MatrixXd v(rows, deg + 1);
        for (int i = 0; i < rows; ++i) {
          const double t = 2.0 * rho_[i] * rho_[i] - 1.0;
          const double lead = std::pow(rho_[i], vanish);
          double tp = 1.0, tc = t;
          for (int d = 0; d <= deg; ++d) {
            v(i, d) = lead * tp;
            const double tn = 2.0 * t * tc - tp;
            tp = tc;
            tc = tn;
          }
        }
        const Eigen::MatrixXd vw = sw.asDiagonal() * v;
        const auto qr = vw.colPivHouseholderQr();
        cosc_.col(m) = v * qr.solve(sw.cwiseProduct(cosc_.col(m)));
        sinc_.col(m) = v * qr.solve(sw.cwiseProduct(sinc_.col(m)));
      }
    }

    // barycentric weights 1 / prod (rho_i - rho_k), normalized for safety
    bary_.resize(rows);
    for (int i = 0; i < rows; ++i) {
      double w = 1.0;
      for (int k = 0; k < rows; ++k)
        if (k != i) w /= rho_[i] - rho_[k];
      bary_[i] = w;
    }
    bary_ /= bary_.cwiseAbs().maxCoeff();
  }

  double operator()(double rho, double phi) const {
    const int rows = static_cast<int>(rho_.size());
    // exact node hit: read the Fourier row directly
    for (int i = 0; i < rows; ++i)
      if (std::abs(rho - rho_[i]) < 1e-13) return angular_value(i, phi);
    Eigen::VectorXd ell(rows);
    double den = 0.0;
    for (int i = 0; i < rows; ++i) {
      ell[i] = bary_[i] / (rho - rho_[i]);
      den += ell[i];
    }
    double total = 0.0;
    for (int m = 0; m <= modes_; ++m) {
      const double c = ell.dot(cosc_.col(m)) / den;
      const double s = ell.dot(sinc_.col(m)) / den;
      total += c * std::cos(m * phi) + s * std::sin(m * phi);
    }
    return total;
  }

  double at_point(const Vec2& y) const {
    const Vec2 rel = y - geom_.center;
    return (*this)(rel.norm() / geom_.radius, std::atan2(rel.y(), rel.x()));
  }

 private:
  double angular_value(int row, double phi) const {
    double total = 0.0;
    for (int m = 0; m <= modes_; ++m)
      total += cosc_(row, m) * std::cos(m * phi) + sinc_(row, m) * std::sin(m * phi);
    return total;
  }

  DiskGeometry geom_;
  Eigen::VectorXd rho_;
  Eigen::VectorXd bary_;
  Eigen::MatrixXd cosc_, sinc_;
  int modes_ = 0;
};

// Sliding tensor-product interpolation in (rho, phi): at each evaluation
// point a window of degree + 1 consecutive radial nodes (the boundary column
// counts as a node at rho = 1) and degree + 1 consecutive angles feeds a
// product Lagrange rule.  Staying local keeps fine-scale field content from
// rippling across the domain the way a global fit would spread it.
class LocalPolarInterpolant {
 public:
  LocalPolarInterpolant(const InteriorGrid& grid, const Eigen::VectorXd& values,
                        const Eigen::VectorXd* boundary_column = nullptr,
                        int degree = 4)
      : geom_(grid.geom), nphi_(grid.angular_count), win_(degree + 1) {
    require(values.size() == grid.size(), "domain-mismatch",
            "interpolant values must live on the interior grid");
    const int nr = grid.radial_count;
    const int rows = nr + (boundary_column ? 1 : 0);
    require(rows >= win_, "domain-mismatch",
            "radial grid too small for the interpolation degree");
    rho_.resize(rows);
    for (int i = 0; i < nr; ++i) rho_[i] = grid.rho[i];
    if (boundary_column) rho_[nr] = 1.0;
    vals_.resize(rows, nphi_);
    for (int j = 0; j < nphi_; ++j) {
      for (int i = 0; i < nr; ++i) vals_(i, j) = values[grid.index(i, j)];
      if (boundary_column) vals_(nr, j) = (*boundary_column)[j];
    }
  }

  double operator()(double rho, double phi) const {
    const int rows = static_cast<int>(rho_.size());
    // radial window of win_ nodes around rho
    int pos = 0;
    while (pos < rows && rho_[pos] < rho) ++pos;
    int lo = std::clamp(pos - win_ / 2 - (win_ + 1) % 2, 0, rows - win_);
    Eigen::VectorXd lr(win_);
    lagrange_weights(&rho_[lo], win_, rho, lr);
    // angular window around the nearest angle, unwrapped
    const double dphi = 2.0 * pi / nphi_;
    const int jc = static_cast<int>(std::llround(std::floor(phi / dphi)));
    const int ja = jc - win_ / 2 + 1;
    Eigen::VectorXd theta(win_), la(win_);
    for (int m = 0; m < win_; ++m) theta[m] = (ja + m) * dphi;
    const double shift =
        2.0 * pi * std::round((theta[win_ / 2] - phi) / (2.0 * pi));
    lagrange_weights(theta.data(), win_, phi + shift, la);
    double total = 0.0;
    for (int m = 0; m < win_; ++m) {
      const int j = ((ja + m) % nphi_ + nphi_) % nphi_;
      total += la[m] * lr.dot(vals_.col(j).segment(lo, win_));
    }
    return total;
  }

  double at_point(const Vec2& y) const {
    const Vec2 rel = y - geom_.center;
    return (*this)(rel.norm() / geom_.radius, std::atan2(rel.y(), rel.x()));
  }

 private:
  static void lagrange_weights(const double* x, int n, double t,
                               Eigen::VectorXd& out) {
    for (int i = 0; i < n; ++i) {
      double w = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != i) w *= (t - x[k]) / (x[i] - x[k]);
      out[i] = w;
    }
  }

  DiskGeometry geom_;
  int nphi_ = 0;
  int win_ = 0;
  Eigen::VectorXd rho_;
  Eigen::MatrixXd vals_;
};

// Oracle-ready profile for a solved field: the smooth factor is interpolated
// and the class weight (1-rho^2)^a or (1-rho^2)^{a-1} is restored exactly.
inline ProfileFunction solution_profile(const FieldSolution& sol,
                                        const InteriorGrid& grid,
                                        FractionalOrder order,
                                        int fit_degree = 9) {
  require(sol.smooth_factor.size() == grid.size(), "domain-mismatch",
          "solution lacks the smooth factor on this grid");
  const bool has_boundary = sol.smooth_boundary.size() == grid.angular_count;
  auto interp = std::make_shared<PolarInterpolant>(
      grid, sol.smooth_factor, has_boundary ? &sol.smooth_boundary : nullptr,
      fit_degree);
  const double power =
      sol.class_tag == SolutionClass::AClass ? order.a : order.a - 1.0;
  const DiskGeometry geom = grid.geom;
  auto eval = [interp, power, geom](const Vec2& y) {
    const Vec2 rel = y - geom.center;
    const double rho = rel.norm() / geom.radius;
    const double m = 1.0 - rho * rho;
    if (m <= 0.0) return 0.0;
    return std::pow(m, power) * (*interp)(rho, std::atan2(rel.y(), rel.x()));
  };
  const SmoothnessTag tag = sol.class_tag == SolutionClass::AClass
                                ? SmoothnessTag::InteriorSmoothZeroExterior
                                : SmoothnessTag::LargeClass;
  return ProfileFunction(eval, tag, geom.radius, power);
}

// Probe-evaluation profile: tensor polar interpolation of fixed degree on the
// smooth factor, with the class weight restored exactly.
inline ProfileFunction probe_profile(const FieldSolution& sol,
                                     const InteriorGrid& grid,
                                     FractionalOrder order, int degree = 4) {
  require(sol.smooth_factor.size() == grid.size(), "domain-mismatch",
          "solution lacks the smooth factor on this grid");
  const bool has_boundary = sol.smooth_boundary.size() == grid.angular_count;
  auto interp = std::make_shared<LocalPolarInterpolant>(
      grid, sol.smooth_factor, has_boundary ? &sol.smooth_boundary : nullptr,
      degree);
  const double power =
      sol.class_tag == SolutionClass::AClass ? order.a : order.a - 1.0;
  const DiskGeometry geom = grid.geom;
  auto eval = [interp, power, geom](const Vec2& y) {
    const Vec2 rel = y - geom.center;
    const double rho = rel.norm() / geom.radius;
    const double m = 1.0 - rho * rho;
    if (m <= 0.0) return 0.0;
    return std::pow(m, power) * (*interp)(rho, std::atan2(rel.y(), rel.x()));
  };
  const SmoothnessTag tag = sol.class_tag == SolutionClass::AClass
                                ? SmoothnessTag::InteriorSmoothZeroExterior
                                : SmoothnessTag::LargeClass;
  return ProfileFunction(eval, tag, geom.radius, power);
}

}  // namespace fraclab
