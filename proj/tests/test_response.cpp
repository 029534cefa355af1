#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fraclab/response.hpp"

using namespace fraclab;

namespace {

DiskGrids make_grids(int nr, int nphi, double a, AngularInterval sigma) {
  return build_disk_grids(DiskGeometry{}, nr, nphi, FractionalOrder(a), sigma);
}

const AngularInterval kHalfArc{0.0, pi};
const AngularInterval kFullCircle{0.0, 2.0 * pi};

// shared solvers, one per grid resolution; construction dominates the cost
const ForwardSolver& arc_solver16() {
  static DiskGrids g = make_grids(16, 32, 0.5, kHalfArc);
  static ForwardSolver solver(g, FractionalOrder(0.5));
  return solver;
}

const ForwardSolver& arc_solver12() {
  static DiskGrids g = make_grids(12, 24, 0.5, kHalfArc);
  static ForwardSolver solver(g, FractionalOrder(0.5));
  return solver;
}

ExteriorPatch default_patch() {
  return build_exterior_patch(DiskGeometry{}, 1.5, 2.0, 8, 32);
}

Potential bump_potential(const InteriorGrid& grid) {
  return Potential::two_bumps(grid, Vec2(0.4, 0.1), 2.0, Vec2(-0.3, -0.3), -1.0,
                              0.25);
}

const ResponseMatrix& default_response() {
  static ExteriorPatch patch = default_patch();
  static SourceBasis basis = SourceBasis::annulus_bumps(patch, 8);
  static ResponseMatrix R = assemble_response(
      arc_solver16(), bump_potential(arc_solver16().grids().interior), basis,
      patch);
  return R;
}

}  // namespace

TEST_CASE("response matrix has arc rows, source columns, and meta", "[response]") {
  const ResponseMatrix& R = default_response();
  const BoundaryGrid& gb = arc_solver16().grids().boundary;
  REQUIRE(R.entries.rows() == gb.sigma_count());
  REQUIRE(R.entries.cols() == 8);
  REQUIRE(static_cast<int>(R.meta.angles.size()) == R.entries.rows());
  REQUIRE(R.entries.allFinite());
  CHECK(R.meta.a == 0.5);
  CHECK(R.meta.radial_count == 16);
  CHECK(R.meta.angular_count == 32);
  for (double phi : R.meta.angles) CHECK(gb.sigma.contains(phi));
}

TEST_CASE("potential hash separates fields and matches itself", "[response]") {
  const InteriorGrid& gi = arc_solver12().grids().interior;
  Potential q1 = bump_potential(gi);
  Potential q2 = bump_potential(gi);
  Potential q0 = Potential::zero(gi);
  CHECK(potential_hash(q1) == potential_hash(q2));
  CHECK(potential_hash(q1) != potential_hash(q0));
  CHECK(default_response().meta.q_hash ==
        potential_hash(bump_potential(arc_solver16().grids().interior)));
}

TEST_CASE("empty measurement arc is rejected", "[response]") {
  DiskGrids g = make_grids(12, 24, 0.5, kHalfArc);
  std::fill(g.boundary.sigma_mask.begin(), g.boundary.sigma_mask.end(), false);
  ForwardSolver solver(g, FractionalOrder(0.5));
  ExteriorPatch patch = default_patch();
  SourceBasis basis = SourceBasis::annulus_bumps(patch, 2);
  try {
    assemble_response(solver, Potential::zero(g.interior), basis, patch);
    FAIL("masked-out arc must not assemble");
  } catch (const Error& e) {
    CHECK(e.code() == "empty-sigma");
  }
}

TEST_CASE("zero potential gives a strictly positive column", "[response]") {
  const ForwardSolver& solver = arc_solver16();
  ExteriorPatch patch = default_patch();
  SourceBasis basis = SourceBasis::annulus_bumps(patch, 1);
  ResponseMatrix R = assemble_response(
      solver, Potential::zero(solver.grids().interior), basis, patch);
  REQUIRE(R.entries.cols() == 1);
  CHECK(R.entries.minCoeff() > 0.0);
}

TEST_CASE("doubling a source doubles its column", "[response]") {
  const ForwardSolver& solver = arc_solver16();
  ExteriorPatch patch = default_patch();
  const Vec2 c(0.0, 1.75);
  SourceBasis basis;
  basis.width = 0.25;
  basis.centers = {c, c};
  basis.sources.push_back(SourceFunction::from_function(patch, [c](const Vec2& y) {
    return truncated_gaussian((y - c).norm(), 0.25);
  }));
  basis.sources.push_back(SourceFunction::from_function(patch, [c](const Vec2& y) {
    return 2.0 * truncated_gaussian((y - c).norm(), 0.25);
  }));
  ResponseMatrix R = assemble_response(
      solver, bump_potential(solver.grids().interior), basis, patch);
  CHECK((R.entries.col(1) - 2.0 * R.entries.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("masking a full-circle assembly matches direct arc assembly",
          "[response]") {
  DiskGrids g_full = make_grids(12, 24, 0.5, kFullCircle);
  ForwardSolver full(g_full, FractionalOrder(0.5));
  ExteriorPatch patch = default_patch();
  SourceBasis basis = SourceBasis::annulus_bumps(patch, 4);
  Potential q_full = bump_potential(g_full.interior);
  ResponseMatrix R_full = assemble_response(full, q_full, basis, patch);

  const ForwardSolver& arc = arc_solver12();
  ResponseMatrix R_arc = assemble_response(
      arc, bump_potential(arc.grids().interior), basis, patch);

  const BoundaryGrid& gb_full = g_full.boundary;
  const BoundaryGrid& gb_arc = arc.grids().boundary;
  std::vector<int> keep;
  for (int j = 0; j < gb_full.size(); ++j)
    if (gb_arc.sigma_mask[j]) keep.push_back(j);
  REQUIRE(static_cast<int>(keep.size()) == R_arc.entries.rows());
  for (int r = 0; r < static_cast<int>(keep.size()); ++r)
    for (int c = 0; c < R_arc.entries.cols(); ++c)
      CHECK(R_full.entries(keep[r], c) == R_arc.entries(r, c));
}

TEST_CASE("single source has numerical rank one", "[response]") {
  const ForwardSolver& solver = arc_solver12();
  ExteriorPatch patch = default_patch();
  SourceBasis basis = SourceBasis::annulus_bumps(patch, 1);
  ResponseMatrix R = assemble_response(
      solver, Potential::zero(solver.grids().interior), basis, patch);
  ConditioningReport rep = response_conditioning(R);
  REQUIRE(rep.singular_values.size() == 1);
  CHECK(rep.singular_values[0] > 0.0);
  CHECK(rep.rank_1e12 == 1);
  CHECK(rep.rank_1e8 == 1);
}

TEST_CASE("rank is nondecreasing over nested bases", "[response]") {
  const ForwardSolver& solver = arc_solver12();
  ExteriorPatch patch = default_patch();
  Potential q = bump_potential(solver.grids().interior);
  int prev8 = 0, prev12 = 0;
  const int rows = solver.grids().boundary.sigma_count();
  for (int count : {2, 4, 8, 16}) {
    SourceBasis basis = SourceBasis::annulus_bumps(patch, count);
    ConditioningReport rep =
        response_conditioning(assemble_response(solver, q, basis, patch));
    REQUIRE(rep.singular_values.size() == std::min(count, rows));
    CHECK(rep.rank_1e8 >= prev8);
    CHECK(rep.rank_1e12 >= prev12);
    // distinct bump centers keep every singular value strictly positive
    CHECK(rep.singular_values.minCoeff() > 0.0);
    prev8 = rep.rank_1e8;
    prev12 = rep.rank_1e12;
  }
  CHECK(prev8 >= 2);
}

TEST_CASE("entries respect the computable boundedness constant", "[response]") {
  const ResponseMatrix& R = default_response();
  const double C = boundedness_echo(arc_solver16(), default_patch());
  // the annulus bumps have sup norm 1, so C itself bounds every entry
  CHECK(R.entries.cwiseAbs().maxCoeff() <= C);
  CHECK(C > 0.0);
}

TEST_CASE("basis bumps are compactly supported inside the annulus", "[response]") {
  ExteriorPatch patch = default_patch();
  SourceBasis basis = SourceBasis::annulus_bumps(patch, 8);
  const double spacing =
      (patch.outer_radius - patch.inner_radius) / patch.radial_count;
  for (int b = 0; b < basis.size(); ++b) {
    const Vec2 c = basis.centers[b];
    for (int j = 0; j < 64; ++j) {
      const double phi = 2.0 * pi * j / 64;
      const Vec2 dir(std::cos(phi), std::sin(phi));
      // dead on both edge circles of the annulus
      CHECK(truncated_gaussian((patch.inner_radius * dir - c).norm(),
                               basis.width) <= 1e-14);
      CHECK(truncated_gaussian((patch.outer_radius * dir - c).norm(),
                               basis.width) <= 1e-14);
    }
    // yet alive one node spacing inside each edge along its own ray, so the
    // support reaches to within one spacing of the annulus boundary
    const Vec2 ray = c.normalized();
    CHECK(truncated_gaussian(
              ((patch.inner_radius + spacing) * ray - c).norm(), basis.width) >
          0.0);
    CHECK(truncated_gaussian(
              ((patch.outer_radius - spacing) * ray - c).norm(), basis.width) >
          0.0);
  }
}
