#pragma once

// Second-kind integral-equation solvers for the two boundary-value problems:
// the exterior-data problem, rewritten for w = u - f as
//   w + K[q w] = K[h],   h = the interior field of the exterior source,
// and the large Dirichlet problem
//   u + K[q u] = P_a g,
// where K inverts (-Delta)^a on the disk with zero exterior data.  K is the
// Green kernel in its inversion normalization; its Nystrom matrix gets the
// weakly singular diagonal by row calibration against the exact moment
//   Int K(x,z) dz = (r^2-|x|^2)^a / lambda,
// which is the torsion-function identity.  Traces at order a are extracted
// through the kernel limit (never a numerical ratio): the trace kernel is
// integrated against the solved density with its boundary moment subtracted.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "fraclab/constants.hpp"
#include "fraclab/fields.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/kernels.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

class ForwardSolver {
 public:
  ForwardSolver(const DiskGrids& grids, FractionalOrder order)
      : grids_(grids), order_(order), kc_(KernelConstants::make(order, 2)) {
    const InteriorGrid& gi = grids_.interior;
    const int n = gi.size();
    const double a = order_.a;
    mu01_ = std::pow(4.0, a) * std::tgamma(1.0 + a) * std::tgamma(2.0 + a);
    mu10_ = std::pow(4.0, a) * std::tgamma(2.0 + a) * std::tgamma(2.0 + a);
    mu02_ = std::pow(4.0, a) * std::tgamma(1.0 + a) * std::tgamma(3.0 + a) / 2.0;
    mu03_ = std::pow(4.0, a) * std::tgamma(1.0 + a) * std::tgamma(4.0 + a) / 6.0;
    mu11_ = std::pow(4.0, a) * std::tgamma(2.0 + a) * std::tgamma(3.0 + a) / 2.0;

    // disk-relative coordinates and the quadratic basis at every node
    zeta_.resize(n);
    basis_.resize(n, kMoments);
    for (int k = 0; k < n; ++k) {
      zeta_[k] = (gi.nodes[k] - gi.geom.center) / gi.geom.radius;
      basis_.row(k) = cubic_basis(zeta_[k]);
    }

    green_.resize(n, n);
    for (int i = 0; i < n; ++i)
      green_.row(i) = green_row(gi.nodes[i], i % gi.radial_count,
                                i / gi.radial_count, i);
  }

  const DiskGrids& grids() const { return grids_; }
  FractionalOrder order() const { return order_; }
  const KernelConstants& constants() const { return kc_; }
  const Eigen::MatrixXd& green_matrix() const { return green_; }

  // Factorization of the second-kind system restricted to supp q.  Off the
  // support the unknown is recovered by back substitution into w = b - K[q w].
  struct Reduced {
    std::vector<int> support;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::VectorXd q;
    double rcond = 1.0;
  };

  Reduced reduce(const Potential& q) const {
    const int n = grids_.interior.size();
    require(q.values.size() == 0 || q.values.size() == n, "domain-mismatch",
            "potential lives on a different grid");
    Reduced red;
    red.q = q.values.size() == n ? q.values : Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k)
      if (red.q[k] != 0.0) red.support.push_back(k);
    const int m = static_cast<int>(red.support.size());
    if (m == 0) return red;
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        sys(r, c) += green_(red.support[r], red.support[c]) * red.q[red.support[c]];
    red.lu.compute(sys);
    red.rcond = red.lu.rcond();
    if (!(red.rcond > 1e-12))
      fail("near-singular-system",
           "second-kind system conditioning exceeds 1e12; the homogeneous "
           "problem admits a nonzero solution on this grid");
    return red;
  }

  // Solves (I + K M_q) w = b given the reduced factorization.
  Eigen::VectorXd solve_with(const Reduced& red, const Eigen::VectorXd& rhs) const {
    const int n = grids_.interior.size();
    require(rhs.size() == n, "domain-mismatch", "right-hand side grid mismatch");
    const int m = static_cast<int>(red.support.size());
    if (m == 0) return rhs;
    Eigen::VectorXd rhs_s(m);
    for (int r = 0; r < m; ++r) rhs_s[r] = rhs[red.support[r]];
    const Eigen::VectorXd w_s = red.lu.solve(rhs_s);
    Eigen::VectorXd w = rhs;
    for (int c = 0; c < m; ++c) {
      const double qw = red.q[red.support[c]] * w_s[c];
      w -= green_.col(red.support[c]) * qw;
    }
    return w;
  }

  // Order-a trace of K[density] at prescribed boundary angles.  The density's
  // boundary closure is subtracted so the trace-kernel quadrature only sees an
  // integrand vanishing where the kernel concentrates; its own moment
  //   Int K_tr(x, omega) dx = (2r)^a / lambda
  // is restored analytically.
  Eigen::VectorXd trace_extraction(const Eigen::VectorXd& density,
                                   const std::function<double(double)>& density_boundary,
                                   const Eigen::VectorXd& angles) const {
    const InteriorGrid& gi = grids_.interior;
    require(density.size() == gi.size(), "domain-mismatch",
            "density lives on a different grid");
    const double r = gi.geom.radius;
    Eigen::VectorXd out(angles.size());
    for (int t = 0; t < angles.size(); ++t) {
      const double bnd = density_boundary ? density_boundary(angles[t]) : 0.0;
      const Eigen::RowVectorXd row = trace_row(angles[t]);
      double sum = bnd * std::pow(2.0 * r, order_.a) / kc_.torsion;
      for (int k = 0; k < gi.size(); ++k) sum += row[k] * (density[k] - bnd);
      out[t] = sum;
    }
    return out;
  }

  // Trace-kernel rows at the given angles, for callers that apply the trace
  // functional to many densities on the same angle set.
  Eigen::MatrixXd trace_rows(const Eigen::VectorXd& angles) const {
    Eigen::MatrixXd rows(angles.size(), grids_.interior.size());
    for (int t = 0; t < angles.size(); ++t) rows.row(t) = trace_row(angles[t]);
    return rows;
  }

  FieldSolution solve_exterior_dirichlet(const Potential& q, const SourceFunction& f,
                                         const ExteriorPatch& patch) const {
    const InteriorGrid& gi = grids_.interior;
    const BoundaryGrid& gb = grids_.boundary;
    const int n = gi.size();
    Eigen::VectorXd h(n);
    for (int k = 0; k < n; ++k)
      h[k] = exterior_source_field(f, gi.nodes[k], order_, patch);
    const Eigen::VectorXd rhs = green_ * h;
    const Reduced red = reduce(q);
    const Eigen::VectorXd w = solve_with(red, rhs);

    FieldSolution sol;
    sol.class_tag = SolutionClass::AClass;
    sol.interior_values = w;
    sol.rhs = h;
    sol.density = h - red.q.cwiseProduct(w);
    sol.rcond = red.rcond;
    sol.residual = system_residual(red, w, rhs);
    auto h_bnd = [&](double phi) {
      const Vec2 omega = gi.geom.center +
                         gi.geom.radius * Vec2(std::cos(phi), std::sin(phi));
      return exterior_source_field(f, omega, order_, patch);
    };
    sol.trace_a = trace_extraction(sol.density, h_bnd, gb.phi);
    sol.trace_am1 = Eigen::VectorXd::Zero(gb.size());
    attach_smooth_factor(sol);
    return sol;
  }

  FieldSolution solve_large_dirichlet(const Potential& q, const BoundaryDatum& g) const {
    const InteriorGrid& gi = grids_.interior;
    const BoundaryGrid& gb = grids_.boundary;
    const int n = gi.size();
    const double r = gi.geom.radius;
    PoissonFourierExtension ext(gb, g.values, order_);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) rhs[k] = ext.large(gi.node_rho(k), gi.node_phi(k));
    const Reduced red = reduce(q);
    const Eigen::VectorXd u = solve_with(red, rhs);

    FieldSolution sol;
    sol.class_tag = SolutionClass::LargeClass;
    sol.interior_values = u;
    sol.rhs = rhs;
    sol.density = -red.q.cwiseProduct(u);
    sol.rcond = red.rcond;
    sol.residual = system_residual(red, u, rhs);

    // d^{a-1} trace: the algebraic datum converts by ((2r-d)/r^2)^{a-1} -> (2/r)^{a-1}
    const double am1_lift = std::pow(2.0 / r, order_.a - 1.0);
    sol.trace_am1 = am1_lift * g.values;

    // order-a trace of the regular part u' = u - d^{a-1} u_0 / Gamma(a):
    // the Poisson summand contributes -(2/r)^{a-1} [(a-1) g + 2 v_rho] / (2r)
    // analytically, the compact summand K[-q u] through the trace kernel
    const Eigen::VectorXd kernel_part =
        trace_extraction(sol.density, nullptr, gb.phi);
    sol.trace_a.resize(gb.size());
    for (int j = 0; j < gb.size(); ++j) {
      const double vr = ext.harmonic_dr(gb.phi[j]);
      sol.trace_a[j] = -am1_lift / (2.0 * r) *
                           ((order_.a - 1.0) * g.values[j] + 2.0 * vr) +
                       kernel_part[j];
    }
    attach_smooth_factor(sol);
    return sol;
  }

  // Neumann trace of a large-class solution: gamma(a+1) times the order-a
  // ratio limit of u' = u - d^{a-1} u_0 / Gamma(a), extrapolated along radii.
  // The off-grid values of u' come from the closed-form Poisson extension plus
  // the kernel sum of the solved density, so no grid interpolation is needed.
  Eigen::VectorXd neumann_trace_large(const FieldSolution& sol,
                                      const BoundaryDatum& g) const {
    const InteriorGrid& gi = grids_.interior;
    const BoundaryGrid& gb = grids_.boundary;
    const double a = order_.a;
    const double gamma_a1 = std::tgamma(a + 1.0);
    if (sol.class_tag == SolutionClass::AClass) {
      // u_0 = 0: the Neumann trace reduces to the weighted Dirichlet-order trace
      return gamma_a1 * sol.trace_a;
    }
    require(sol.interior_values.size() == gi.size(), "domain-mismatch",
            "solution lives on a different grid");
    PoissonFourierExtension ext(gb, g.values, order_);
    const double r = gi.geom.radius;
    const double am1_lift = std::pow(2.0 / r, a - 1.0);
    Eigen::VectorXd out(gb.size());
    const double eps[2] = {1e-2, 1e-3};
    for (int j = 0; j < gb.size(); ++j) {
      const double u0 = std::tgamma(a) * am1_lift * g.values[j];
      const Vec2 dir(std::cos(gb.phi[j]), std::sin(gb.phi[j]));
      double ratio[2];
      for (int t = 0; t < 2; ++t) {
        const double d = eps[t] * r;
        const double rho = 1.0 - eps[t];
        const Vec2 z = gi.geom.center + (r - d) * dir;
        double val = ext.large(rho, gb.phi[j]) -
                     std::pow(d, a - 1.0) * u0 / std::tgamma(a);
        val += green_row_at(z).dot(sol.density);
        ratio[t] = val / std::pow(d, a);
      }
      const double spread = std::abs(ratio[1] - ratio[0]);
      if (spread > 0.1 * std::max(std::abs(ratio[1]), 1e-12))
        fail("nonconvergent-limit",
             "order-a ratio of the regular part does not settle; "
             "wrong weight class for this field");
      out[j] = gamma_a1 * (10.0 * ratio[1] - ratio[0]) / 9.0;
    }
    return out;
  }

 private:
  static constexpr int kMoments = 10;
  // exponent table of the cubic monomials z1^p z2^q
  static constexpr int kMonoP[kMoments] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
  static constexpr int kMonoQ[kMoments] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};

  // harmonic-friendly cubic basis: 1; z; |z|^2, Re z^2, Im z^2;
  // Re z^3, Im z^3, |z|^2 z -- each an eigen-combination of the kernel
  static Eigen::Matrix<double, 1, kMoments> cubic_basis(const Vec2& z) {
    const double z1 = z.x(), z2 = z.y(), r2 = z.squaredNorm();
    Eigen::Matrix<double, 1, kMoments> b;
    b << 1.0, z1, z2, r2, z1 * z1 - z2 * z2, 2.0 * z1 * z2,
        z1 * (z1 * z1 - 3.0 * z2 * z2), z2 * (3.0 * z1 * z1 - z2 * z2),
        r2 * z1, r2 * z2;
    return b;
  }

  // monomial coefficient rows of the cubic basis, same order as cubic_basis
  static Eigen::Matrix<double, kMoments, kMoments> basis_to_monomials() {
    Eigen::Matrix<double, kMoments, kMoments> g;
    g.setZero();
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    g(2, 2) = 1.0;
    g(3, 3) = 1.0; g(3, 5) = 1.0;
    g(4, 3) = 1.0; g(4, 5) = -1.0;
    g(5, 4) = 2.0;
    g(6, 6) = 1.0; g(6, 8) = -3.0;
    g(7, 7) = 3.0; g(7, 9) = -1.0;
    g(8, 6) = 1.0; g(8, 8) = 1.0;
    g(9, 7) = 1.0; g(9, 9) = 1.0;
    return g;
  }

  // Exact kernel moments of the cubic basis at relative position zx:
  //   K[P_k^{(a,l)}(2 rho^2-1) rho^l e^{il phi}] =
  //     (1-rho^2)^a P_k^{(a,l)}(2 rho^2-1) rho^l e^{il phi} / mu_{k,l},
  //   mu_{k,l} = 4^a G(1+a+k) G(1+a+k+l) / (k! G(1+k+l));
  // |z|^2 and |z|^2 z decompose through P_1^{(a,0)} and P_1^{(a,1)}.
  Eigen::Matrix<double, kMoments, 1> green_moments(const Vec2& zx) const {
    const double a = order_.a;
    const double ww = std::pow(grids_.interior.geom.radius, 2.0 * a) *
                      std::pow(1.0 - zx.squaredNorm(), a);
    const double x1 = zx.x(), x2 = zx.y(), r2 = zx.squaredNorm();
    const double p10 = (a + 2.0) * r2 - 1.0;  // P_1^{(a,0)}(2 rho^2 - 1)
    const double p11 = (a + 3.0) * r2 - 2.0;  // P_1^{(a,1)}(2 rho^2 - 1)
    const double cube = p11 / mu11_ + 2.0 / mu01_;
    Eigen::Matrix<double, kMoments, 1> m;
    m[0] = ww / kc_.torsion;
    m[1] = ww * x1 / mu01_;
    m[2] = ww * x2 / mu01_;
    m[3] = ww * (p10 / mu10_ + 1.0 / kc_.torsion) / (a + 2.0);
    m[4] = ww * (x1 * x1 - x2 * x2) / mu02_;
    m[5] = ww * 2.0 * x1 * x2 / mu02_;
    m[6] = ww * x1 * (x1 * x1 - 3.0 * x2 * x2) / mu03_;
    m[7] = ww * x2 * (3.0 * x1 * x1 - x2 * x2) / mu03_;
    m[8] = ww * x1 * cube / (a + 3.0);
    m[9] = ww * x2 * cube / (a + 3.0);
    return m;
  }

  // Boundary limits of the same moments against d^a, taken at the unit vector
  // w_hat: the (1-rho^2)^a factor leaves 2^a at the boundary, the radius r^a.
  Eigen::Matrix<double, kMoments, 1> trace_moments(const Vec2& w_hat) const {
    const double a = order_.a;
    const double lift = std::pow(2.0 * grids_.interior.geom.radius, a);
    const double x1 = w_hat.x(), x2 = w_hat.y();
    const double cube = (a + 1.0) / mu11_ + 2.0 / mu01_;
    Eigen::Matrix<double, kMoments, 1> m;
    m[0] = lift / kc_.torsion;
    m[1] = lift * x1 / mu01_;
    m[2] = lift * x2 / mu01_;
    m[3] = lift * ((1.0 + a) / mu10_ + 1.0 / kc_.torsion) / (a + 2.0);
    m[4] = lift * (x1 * x1 - x2 * x2) / mu02_;
    m[5] = lift * 2.0 * x1 * x2 / mu02_;
    m[6] = lift * x1 * (x1 * x1 - 3.0 * x2 * x2) / mu03_;
    m[7] = lift * x2 * (3.0 * x1 * x1 - x2 * x2) / mu03_;
    m[8] = lift * x1 * cube / (a + 3.0);
    m[9] = lift * x2 * cube / (a + 3.0);
    return m;
  }

  // Minimal-norm weight correction on the polar stencil around (ri, pj) so the
  // row meets all moment targets.  The constraints are re-expressed in the
  // basis shifted to zx and scaled by the stencil size before solving,
  // otherwise the stencil Gram matrix is hopelessly ill-conditioned; the
  // change of basis runs through monomial coefficients.
  void apply_correction(Eigen::RowVectorXd& row, const Vec2& zx,
                        const Eigen::Matrix<double, kMoments, 1>& target,
                        int ri, int pj) const {
    const InteriorGrid& gi = grids_.interior;
    const int nr = gi.radial_count;
    const int nphi = gi.angular_count;
    const Eigen::Matrix<double, kMoments, 1> defect =
        target - basis_.transpose() * row.transpose();

    std::vector<int> local;
    for (int dj = -2; dj <= 2; ++dj) {
      const int pw = (pj + dj + nphi) % nphi;
      for (int di = -2; di <= 2; ++di) {
        const int rw = ri + di;
        if (rw < 0 || rw >= nr) continue;
        local.push_back(gi.index(rw, pw));
      }
    }
    const int m = static_cast<int>(local.size());
    double h = 0.0;
    for (int idx : local) h = std::max(h, (zeta_[idx] - zx).norm());
    Eigen::MatrixXd shifted(kMoments, m);
    for (int c = 0; c < m; ++c)
      shifted.col(c) = cubic_basis((zeta_[local[c]] - zx) / h).transpose();

    // monomial substitution matrix for y = (z - zx)/h: row alpha holds the
    // z-monomial coefficients of y^alpha
    Eigen::Matrix<double, kMoments, kMoments> subst;
    subst.setZero();
    auto binom = [](int nn, int kk) {
      double b = 1.0;
      for (int t = 0; t < kk; ++t) b = b * (nn - t) / (t + 1);
      return b;
    };
    for (int al = 0; al < kMoments; ++al) {
      const int p = kMonoP[al], q = kMonoQ[al];
      const double hs = std::pow(h, -(p + q));
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= q; ++j) {
          const double coef = hs * binom(p, i) * binom(q, j) *
                              std::pow(-zx.x(), p - i) * std::pow(-zx.y(), q - j);
          for (int g = 0; g < kMoments; ++g)
            if (kMonoP[g] == i && kMonoQ[g] == j) subst(al, g) += coef;
        }
    }
    // shifted basis in terms of the global one: M = G subst G^{-1}
    const Eigen::Matrix<double, kMoments, kMoments> g2m = basis_to_monomials();
    const Eigen::Matrix<double, kMoments, kMoments> mix =
        g2m * subst * g2m.inverse();
    const Eigen::Matrix<double, kMoments, 1> sd = mix * defect;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(shifted);
    const Eigen::VectorXd corr = cod.solve(sd);
    for (int c = 0; c < m; ++c) row[local[c]] += corr[c];
  }

  // Moment-corrected quadrature row for psi -> K[psi](x) at any interior x.
  // skip_node excludes the kernel singularity when x is a grid node; the
  // correction restores that node's weight.
  Eigen::RowVectorXd green_row(const Vec2& x, int ri, int pj,
                               int skip_node = -1) const {
    const InteriorGrid& gi = grids_.interior;
    const int n = gi.size();
    const double scale = kc_.inversion_scale();
    Eigen::RowVectorXd row(n);
    for (int k = 0; k < n; ++k)
      row[k] = k == skip_node ? 0.0
                              : scale * green_disk(x, gi.nodes[k], order_, gi.geom) *
                                    gi.weights[k];
    const Vec2 zx = (x - gi.geom.center) / gi.geom.radius;
    apply_correction(row, zx, green_moments(zx), ri, pj);
    return row;
  }

  Eigen::RowVectorXd green_row_at(const Vec2& x) const {
    const InteriorGrid& gi = grids_.interior;
    const Vec2 zx = (x - gi.geom.center) / gi.geom.radius;
    const double rho = zx.norm();
    int ri = 0;
    for (int i = 1; i < gi.radial_count; ++i)
      if (std::abs(gi.rho[i] - rho) < std::abs(gi.rho[ri] - rho)) ri = i;
    const double phi = std::atan2(zx.y(), zx.x());
    const double dphi = 2.0 * pi / gi.angular_count;
    int pj = static_cast<int>(std::lround(phi / dphi));
    pj = ((pj % gi.angular_count) + gi.angular_count) % gi.angular_count;
    return green_row(x, ri, pj);
  }

  // Moment-corrected trace-kernel row for psi -> order-a trace of K[psi] at
  // the boundary angle.  The trace targets are the d^a limits of the kernel
  // moments, so the row is exact on quadratics just like the interior rows.
  Eigen::RowVectorXd trace_row(double angle) const {
    const InteriorGrid& gi = grids_.interior;
    const int n = gi.size();
    const double r = gi.geom.radius;
    const double lift = kc_.inversion_scale() * std::pow(2.0 * r, order_.a);
    const Vec2 w_hat(std::cos(angle), std::sin(angle));
    const Vec2 omega = gi.geom.center + r * w_hat;
    Eigen::RowVectorXd row(n);
    for (int k = 0; k < n; ++k)
      row[k] = lift * green_trace_kernel(gi.nodes[k], omega, order_, gi.geom) *
               gi.weights[k];
    const double dphi = 2.0 * pi / gi.angular_count;
    int pj = static_cast<int>(std::lround(angle / dphi));
    pj = ((pj % gi.angular_count) + gi.angular_count) % gi.angular_count;
    apply_correction(row, w_hat, trace_moments(w_hat), gi.radial_count - 1, pj);
    return row;
  }

  double system_residual(const Reduced& red, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& rhs) const {
    const Eigen::VectorXd res = w + green_ * red.q.cwiseProduct(w) - rhs;
    const double scale = rhs.cwiseAbs().maxCoeff();
    return scale == 0.0 ? res.cwiseAbs().maxCoeff()
                        : res.cwiseAbs().maxCoeff() / scale;
  }

  void attach_smooth_factor(FieldSolution& sol) const {
    const InteriorGrid& gi = grids_.interior;
    const BoundaryGrid& gb = grids_.boundary;
    const double a = order_.a;
    const double r = gi.geom.radius;
    const bool aclass = sol.class_tag == SolutionClass::AClass;
    const double power = aclass ? a : a - 1.0;
    sol.smooth_factor.resize(gi.size());
    for (int k = 0; k < gi.size(); ++k) {
      const double rho = gi.node_rho(k);
      sol.smooth_factor[k] = sol.interior_values[k] / std::pow(1.0 - rho * rho, power);
    }
    // boundary limits of the smooth factor via the stored traces:
    // u/(1-rho^2)^a -> trace_a (r/2)^a, u/(1-rho^2)^{a-1} -> trace_am1 (r/2)^{a-1}
    sol.smooth_boundary = aclass
                              ? Eigen::VectorXd(std::pow(r / 2.0, a) * sol.trace_a)
                              : Eigen::VectorXd(std::pow(r / 2.0, a - 1.0) *
                                                sol.trace_am1);
  }

  DiskGrids grids_;
  FractionalOrder order_;
  KernelConstants kc_;
  Eigen::MatrixXd green_;
  std::vector<Vec2> zeta_;
  Eigen::MatrixXd basis_;
  double mu01_ = 0.0, mu10_ = 0.0, mu02_ = 0.0, mu03_ = 0.0, mu11_ = 0.0;
};

}  // namespace fraclab
