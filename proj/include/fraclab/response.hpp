#pragma once

// Discrete exterior-to-boundary response map: each column is the order-a
// boundary trace of the solution driven by one compactly supported exterior
// bump, restricted to the measurement arc.  The matrix plus its meta sidecar
// is the interchange object the inverse solver consumes.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/fields.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

struct SourceBasis {
  std::vector<SourceFunction> sources;
  std::vector<Vec2> centers;
  double width = 0.0;

  int size() const { return static_cast<int>(sources.size()); }

  // count bumps at equal angles on the mid-circle of the annulus; the default
  // width of half the annulus thickness puts the 1e-14 truncation radius
  // 0.935 * width, a node spacing clear of both annulus edges
  static SourceBasis annulus_bumps(const ExteriorPatch& patch, int count,
                                   double width = 0.0) {
    require(count >= 1, "invalid-basis", "source basis needs at least one bump");
    SourceBasis basis;
    basis.width = width > 0.0
                      ? width
                      : 0.5 * (patch.outer_radius - patch.inner_radius);
    const double mid = 0.5 * (patch.inner_radius + patch.outer_radius);
    for (int b = 0; b < count; ++b) {
      const double phi = 2.0 * pi * b / count;
      const Vec2 c = patch.geom.center + mid * Vec2(std::cos(phi), std::sin(phi));
      basis.centers.push_back(c);
      const double w = basis.width;
      basis.sources.push_back(SourceFunction::from_function(
          patch,
          [c, w](const Vec2& y) { return truncated_gaussian((y - c).norm(), w); }));
    }
    return basis;
  }
};

struct ResponseMeta {
  double a = 0.0;
  int radial_count = 0;
  int angular_count = 0;
  std::uint64_t q_hash = 0;
  std::vector<double> angles;  // boundary angles of the retained rows
};

struct ResponseMatrix {
  Eigen::MatrixXd entries;  // rows = arc nodes, columns = sources
  ResponseMeta meta;
};

// FNV-1a over the bit patterns, so identical potentials on identical grids
// share a hash and the inverse pipeline can detect mismatched data
inline std::uint64_t potential_hash(const Potential& q) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (int k = 0; k < q.values.size(); ++k) {
    std::uint64_t bits;
    const double v = q.values[k];
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  std::uint64_t sb;
  const double s = q.support_radius;
  std::memcpy(&sb, &s, sizeof sb);
  mix(sb);
  return h;
}

inline ResponseMatrix assemble_response(const ForwardSolver& solver,
                                        const Potential& q,
                                        const SourceBasis& basis,
                                        const ExteriorPatch& patch) {
  const BoundaryGrid& gb = solver.grids().boundary;
  require(basis.size() >= 1, "invalid-basis", "source basis is empty");
  require(gb.sigma_count() > 0, "empty-sigma",
          "the measurement arc contains no boundary nodes");

  std::vector<int> rows;
  for (int j = 0; j < gb.size(); ++j)
    if (gb.sigma_mask[j]) rows.push_back(j);

  ResponseMatrix R;
  R.entries.resize(static_cast<int>(rows.size()), basis.size());
  R.meta.a = solver.order().a;
  R.meta.radial_count = solver.grids().interior.radial_count;
  R.meta.angular_count = solver.grids().interior.angular_count;
  R.meta.q_hash = potential_hash(q);
  for (int r : rows) R.meta.angles.push_back(gb.phi[r]);

  for (int col = 0; col < basis.size(); ++col) {
    FieldSolution sol;
    try {
      sol = solver.solve_exterior_dirichlet(q, basis.sources[col], patch);
    } catch (const Error& e) {
      fail(e.code(), "response column " + std::to_string(col) + ": " + e.what());
    }
    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
      R.entries(r, col) = sol.trace_a[rows[r]];
  }
  require(R.entries.allFinite(), "nonfinite-response",
          "response matrix contains nonfinite entries");
  return R;
}

// Convenience overload that builds the solver in place.  Prefer the prebuilt
// form when assembling several matrices on the same grids, since the solver
// construction dominates the cost.
inline ResponseMatrix assemble_response(const Potential& q,
                                        const SourceBasis& basis,
                                        const DiskGrids& grids,
                                        FractionalOrder order,
                                        const ExteriorPatch& patch) {
  ForwardSolver solver(grids, order);
  return assemble_response(solver, q, basis, patch);
}

struct ConditioningReport {
  Eigen::VectorXd singular_values;
  int rank_1e8 = 0;    // count of sigma_i >= 1e-8 * sigma_max
  int rank_1e12 = 0;   // count of sigma_i >= 1e-12 * sigma_max
  double decay_rate = 0.0;  // mean log10 drop per index over the retained part
};

inline ConditioningReport response_conditioning(const ResponseMatrix& R) {
  require(R.entries.size() > 0, "invalid-response", "empty response matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R.entries);
  ConditioningReport rep;
  rep.singular_values = svd.singularValues();
  const double top = rep.singular_values[0];
  for (int i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values[i] >= 1e-8 * top) ++rep.rank_1e8;
    if (rep.singular_values[i] >= 1e-12 * top) ++rep.rank_1e12;
  }
  if (rep.rank_1e12 > 1) {
    const double lo = rep.singular_values[rep.rank_1e12 - 1];
    rep.decay_rate = std::log10(top / lo) / (rep.rank_1e12 - 1);
  }
  return rep;
}

// Computable L^infinity bound echoing the boundedness of the response map:
// |trace| <= frac_constant * separation^{-a} * |W| * max(trace kernel) * 2^a
// times the sup of the source.  The kernel maximum runs over grid nodes and
// arc angles, so every factor is a finite number of the discretization.
inline double boundedness_echo(const ForwardSolver& solver,
                               const ExteriorPatch& patch) {
  const InteriorGrid& gi = solver.grids().interior;
  const BoundaryGrid& gb = solver.grids().boundary;
  const FractionalOrder order = solver.order();
  double max_tr = 0.0;
  for (int j = 0; j < gb.size(); ++j) {
    if (!gb.sigma_mask[j]) continue;
    for (int k = 0; k < gi.size(); ++k)
      max_tr = std::max(max_tr,
                        green_trace_kernel(gi.nodes[k], gb.nodes[j], order, gb.geom));
  }
  const double area =
      pi * (patch.outer_radius * patch.outer_radius -
            patch.inner_radius * patch.inner_radius);
  return solver.constants().frac_constant *
         std::pow(patch.separation, -order.a) * area * max_tr *
         std::pow(2.0, order.a);
}

}  // namespace fraclab
