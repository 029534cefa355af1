#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "fraclab/geometry.hpp"

using namespace fraclab;

namespace {

// series for \int_{unit disk} exp(x1) dA = pi * sum_m 1/(m! m! 4^m (m+1))
double exp_moment_reference() {
  double sum = 0.0, term = 1.0;
  for (int m = 0; m < 20; ++m) {
    sum += term / (m + 1.0);
    term /= 4.0 * (m + 1.0) * (m + 1.0);
  }
  return pi * sum;
}

}  // namespace

TEST_CASE("fractional order must lie strictly inside (0,1)", "[geometry]") {
  CHECK_THROWS_AS(FractionalOrder(0.0), Error);
  CHECK_THROWS_AS(FractionalOrder(1.0), Error);
  CHECK_THROWS_AS(FractionalOrder(-0.2), Error);
  CHECK_THROWS_AS(FractionalOrder(1.5), Error);
  CHECK(FractionalOrder(0.5).a == 0.5);
}

TEST_CASE("disk grid weights reproduce the disk area", "[geometry]") {
  DiskGrids grids = build_disk_grids(DiskGeometry{}, 16, 32, FractionalOrder(0.5));
  CHECK(grids.interior.weights.sum() == Catch::Approx(pi).epsilon(5e-3));
  CHECK(grids.boundary.arc_weights.sum() == Catch::Approx(2.0 * pi).epsilon(5e-3));
  for (int k = 0; k < grids.interior.size(); ++k) {
    CHECK(grids.interior.weights[k] > 0.0);
    CHECK(grids.interior.nodes[k].norm() < 1.0);
    CHECK(grids.interior.dist[k] > 0.0);
    CHECK(grids.interior.dist[k] ==
          Catch::Approx(1.0 - grids.interior.nodes[k].norm()).margin(1e-14));
  }
}

TEST_CASE("odd moment vanishes by angular symmetry", "[geometry]") {
  DiskGrids grids = build_disk_grids(DiskGeometry{}, 16, 32, FractionalOrder(0.5));
  double m1 = 0.0;
  for (int k = 0; k < grids.interior.size(); ++k)
    m1 += grids.interior.weights[k] * grids.interior.nodes[k].x();
  CHECK(std::abs(m1) < 1e-12);
}

TEST_CASE("boundary-clustered rule handles an inverse square-root weight", "[geometry]") {
  DiskGrids grids = build_disk_grids(DiskGeometry{}, 32, 64, FractionalOrder(0.5));
  double s = 0.0;
  for (int k = 0; k < grids.interior.size(); ++k) {
    const double r2 = grids.interior.nodes[k].squaredNorm();
    s += grids.interior.weights[k] / std::sqrt(1.0 - r2);
  }
  CHECK(s == Catch::Approx(2.0 * pi).epsilon(1e-2));
}

TEST_CASE("radial rule is exact for weighted polynomials", "[geometry]") {
  const int nr = 12;
  DiskGrids grids = build_disk_grids(DiskGeometry{}, nr, 32, FractionalOrder(0.7));
  const double a = 0.7;
  for (int k = 0; k <= 2 * nr - 1; ++k) {
    double s = 0.0;
    for (int i = 0; i < nr; ++i)
      s += grids.interior.radial_rule_weights[i] * std::pow(grids.interior.rho[i], k);
    const double exact =
        std::exp(std::lgamma(k + 1.0) + std::lgamma(a) - std::lgamma(k + 1.0 + a));
    CHECK(s == Catch::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("quadrature error decreases along the refinement ladder", "[geometry]") {
  const double ref = exp_moment_reference();
  double prev = -1.0;
  for (int nr : {8, 16, 32}) {
    DiskGrids grids = build_disk_grids(DiskGeometry{}, nr, 4 * nr, FractionalOrder(0.5));
    double s = 0.0;
    for (int k = 0; k < grids.interior.size(); ++k)
      s += grids.interior.weights[k] * std::exp(grids.interior.nodes[k].x());
    const double err = std::abs(s - ref);
    if (prev >= 0.0) CHECK(err <= 1.1 * prev);
    prev = err;
  }
}

TEST_CASE("weight_a column matches its definition", "[geometry]") {
  DiskGrids grids = build_disk_grids(DiskGeometry{}, 8, 16, FractionalOrder(0.3));
  for (int k = 0; k < grids.interior.size(); ++k) {
    const double expect = std::pow(1.0 - grids.interior.nodes[k].squaredNorm(), 0.3);
    CHECK(grids.interior.weight_a[k] == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("sigma mask selects the requested arc", "[geometry]") {
  DiskGrids half = build_disk_grids(DiskGeometry{}, 8, 32, FractionalOrder(0.5),
                                    AngularInterval{0.0, pi});
  CHECK(half.boundary.sigma_count() == 16);
  for (int j = 0; j < half.boundary.size(); ++j) {
    const bool in_arc = half.boundary.phi[j] < pi - 1e-12;
    CHECK(half.boundary.sigma_mask[j] == in_arc);
  }

  DiskGrids full = build_disk_grids(DiskGeometry{}, 8, 32, FractionalOrder(0.5),
                                    AngularInterval{0.0, 2.0 * pi});
  CHECK(full.boundary.sigma_count() == 32);

  double masked = 0.0;
  for (int j = 0; j < half.boundary.size(); ++j)
    if (half.boundary.sigma_mask[j]) masked += half.boundary.arc_weights[j];
  CHECK(masked <= half.boundary.arc_weights.sum());
}

TEST_CASE("grid builders reject counts below the minima", "[geometry]") {
  CHECK_THROWS_AS(build_disk_grids(DiskGeometry{}, 3, 32, FractionalOrder(0.5)), Error);
  CHECK_THROWS_AS(build_disk_grids(DiskGeometry{}, 16, 7, FractionalOrder(0.5)), Error);
}

TEST_CASE("exterior patch keeps its separation and area", "[geometry]") {
  ExteriorPatch patch = build_exterior_patch(DiskGeometry{}, 1.5, 2.0, 8, 32);
  CHECK(patch.separation == Catch::Approx(0.5));
  CHECK(patch.weights.sum() == Catch::Approx(pi * (4.0 - 2.25)).epsilon(5e-3));
  for (int k = 0; k < patch.size(); ++k) {
    CHECK(patch.weights[k] > 0.0);
    CHECK(patch.nodes[k].norm() > 1.0 + patch.separation - 1e-12);
  }
}

TEST_CASE("patch with zero separation is rejected", "[geometry]") {
  CHECK_THROWS_AS(build_exterior_patch(DiskGeometry{}, 1.0, 2.0, 8, 32), Error);
}
