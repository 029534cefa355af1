#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fraclab/inverse.hpp"

using namespace fraclab;

namespace {

const AngularInterval kHalfArc{0.0, pi};
const AngularInterval kQuarterArc{0.0, 0.5 * pi};

const DiskGrids& inv_grids() {
  static DiskGrids g =
      build_disk_grids(DiskGeometry{}, 12, 24, FractionalOrder(0.5), kHalfArc);
  return g;
}

const ForwardSolver& inv_solver() {
  static ForwardSolver solver(inv_grids(), FractionalOrder(0.5));
  return solver;
}

ExteriorPatch default_patch() {
  return build_exterior_patch(DiskGeometry{}, 1.5, 2.0, 8, 32);
}

const SourceBasis& default_basis() {
  static SourceBasis basis = SourceBasis::annulus_bumps(default_patch(), 8);
  return basis;
}

Potential single_bump(const InteriorGrid& grid) {
  return Potential::bump(grid, Vec2(0.3, 0.0), 5.0, 0.3);
}

// centered response S_q = A_q - A_0 assembled outside the inversion pipeline,
// the reference for everything the synthesizer produces
Eigen::MatrixXd centered_response(const ForwardSolver& solver, const Potential& q,
                                  const SourceBasis& basis,
                                  const ExteriorPatch& patch) {
  const ResponseMatrix aq = assemble_response(solver, q, basis, patch);
  const ResponseMatrix a0 = assemble_response(
      solver, Potential::zero(solver.grids().interior), basis, patch);
  return aq.entries - a0.entries;
}

template <typename Fn>
std::string thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return {};
}

}  // namespace

TEST_CASE("synthesized data without noise reproduces the centered response",
          "[inverse]") {
  const ExteriorPatch patch = default_patch();
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.0;
  const ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                              inv_grids(), FractionalOrder(0.5),
                                              patch);
  const Eigen::MatrixXd ref =
      centered_response(inv_solver(), single_bump(inv_grids().interior),
                        default_basis(), patch);
  REQUIRE((data.entries - ref).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(data.entries.rows() == inv_grids().boundary.sigma_count());
  REQUIRE(data.entries.cols() == default_basis().size());
}

TEST_CASE("synthesized data for the zero potential is exactly zero", "[inverse]") {
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.0;
  const ResponseMatrix data = synthesize_data(
      [](const InteriorGrid& gi) { return Potential::zero(gi); }, default_basis(),
      cfg, inv_grids(), FractionalOrder(0.5), default_patch());
  REQUIRE(data.entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise synthesis is reproducible for a fixed seed", "[inverse]") {
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.01;
  cfg.seed = 77;
  const ResponseMatrix one = synthesize_data(single_bump, default_basis(), cfg,
                                             inv_grids(), FractionalOrder(0.5),
                                             default_patch());
  const ResponseMatrix two = synthesize_data(single_bump, default_basis(), cfg,
                                             inv_grids(), FractionalOrder(0.5),
                                             default_patch());
  REQUIRE((one.entries - two.entries).cwiseAbs().maxCoeff() == 0.0);

  cfg.seed = 78;
  const ResponseMatrix other = synthesize_data(single_bump, default_basis(), cfg,
                                               inv_grids(), FractionalOrder(0.5),
                                               default_patch());
  REQUIRE((one.entries - other.entries).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("one percent noise lands near its nominal Frobenius size", "[inverse]") {
  const ExteriorPatch patch = default_patch();
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.01;
  cfg.seed = 2026;
  const ResponseMatrix noisy = synthesize_data(single_bump, default_basis(), cfg,
                                               inv_grids(), FractionalOrder(0.5),
                                               patch);
  const Eigen::MatrixXd clean =
      centered_response(inv_solver(), single_bump(inv_grids().interior),
                        default_basis(), patch);
  const double nominal = 0.01 * clean.norm();
  const double actual = (noisy.entries - clean).norm();
  REQUIRE(actual / nominal > 0.8);
  REQUIRE(actual / nominal < 1.2);
}

TEST_CASE("refined-grid synthesis differs from same-grid synthesis but stays near it",
          "[inverse]") {
  const ExteriorPatch patch = default_patch();
  InversionConfig cfg;
  cfg.noise_level = 0.0;
  cfg.inverse_crime_flag = false;
  const ResponseMatrix off = synthesize_data(single_bump, default_basis(), cfg,
                                             inv_grids(), FractionalOrder(0.5),
                                             patch);
  cfg.inverse_crime_flag = true;
  const ResponseMatrix on = synthesize_data(single_bump, default_basis(), cfg,
                                            inv_grids(), FractionalOrder(0.5),
                                            patch);
  REQUIRE(off.entries.rows() == on.entries.rows());
  const double rel = (off.entries - on.entries).norm() / on.entries.norm();
  REQUIRE(rel > 0.0);
  REQUIRE(rel < 0.5);
}

TEST_CASE("synthesis rejects invalid configurations", "[inverse]") {
  InversionConfig bad_noise;
  bad_noise.noise_level = -0.1;
  CHECK(thrown_code([&] {
          synthesize_data(single_bump, default_basis(), bad_noise, inv_grids(),
                          FractionalOrder(0.5), default_patch());
        }) == "invalid-config");

  InversionConfig bad_support;
  bad_support.support_radius = 0.95;
  CHECK(thrown_code([&] {
          synthesize_data(single_bump, default_basis(), bad_support, inv_grids(),
                          FractionalOrder(0.5), default_patch());
        }) == "invalid-config");

  CHECK(thrown_code([&] {
          synthesize_data(PotentialFactory{}, default_basis(), InversionConfig{},
                          inv_grids(), FractionalOrder(0.5), default_patch());
        }) == "invalid-potential");
}

TEST_CASE("derivative in the zero direction vanishes identically", "[inverse]") {
  const Potential q = single_bump(inv_grids().interior);
  const Potential dq = Potential::zero(inv_grids().interior);
  const ResponseMatrix der = frechet_derivative(inv_solver(), q, dq,
                                                default_basis(), default_patch());
  REQUIRE(der.entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative is exactly homogeneous under direction doubling", "[inverse]") {
  const Potential q = single_bump(inv_grids().interior);
  const Potential dq =
      Potential::bump(inv_grids().interior, Vec2(-0.1, 0.2), 1.5, 0.25);
  Potential dq2 = dq;
  dq2.values *= 2.0;
  const ResponseMatrix one = frechet_derivative(inv_solver(), q, dq,
                                                default_basis(), default_patch());
  const ResponseMatrix two = frechet_derivative(inv_solver(), q, dq2,
                                                default_basis(), default_patch());
  REQUIRE((two.entries - 2.0 * one.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative matches finite differences in random directions", "[inverse]") {
  const ExteriorPatch patch = default_patch();
  const Potential q = single_bump(inv_grids().interior);
  const ResponseMatrix base = assemble_response(inv_solver(), q, default_basis(),
                                                patch);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> upos(-0.35, 0.35);
  std::normal_distribution<double> height(0.0, 1.0);
  const double eps = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec2 c(upos(gen), upos(gen));
    const Potential dq =
        Potential::bump(inv_grids().interior, c, 2.0 * height(gen), 0.25);
    const ResponseMatrix der = frechet_derivative(inv_solver(), q, dq,
                                                  default_basis(), patch);
    const Potential qp(inv_grids().interior, q.values + eps * dq.values,
                       std::max(q.support_radius, dq.support_radius));
    const ResponseMatrix ap = assemble_response(inv_solver(), qp, default_basis(),
                                                patch);
    const Eigen::MatrixXd fd = (ap.entries - base.entries) / eps;
    REQUIRE((fd - der.entries).norm() / der.entries.norm() < 1e-3);
  }
}

TEST_CASE("structured normal equations agree with the directional derivative",
          "[inverse]") {
  const DiskGrids small =
      build_disk_grids(DiskGeometry{}, 8, 16, FractionalOrder(0.5), kHalfArc);
  const ForwardSolver solver(small, FractionalOrder(0.5));
  const ExteriorPatch patch = default_patch();
  const SourceBasis basis = SourceBasis::annulus_bumps(patch, 4);
  const Potential q = single_bump(small.interior);

  const auto ws = detail::make_workspace(solver, basis, patch, 0.65);
  const auto ev = detail::evaluate_iterate(
      ws, q, Eigen::MatrixXd::Zero(ws.trace.rows(), basis.size()), 0.0);
  const auto jp = detail::jacobian_parts(ws, ev, q.values);
  const Eigen::MatrixXd dense = detail::jacobian_dense(jp);

  for (int s = 0; s < static_cast<int>(ws.parameters.size()); s += 11) {
    const int k = ws.parameters[s];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(small.interior.size());
    e[k] = 1.0;
    const double rad = (small.interior.nodes[k] - DiskGeometry{}.center).norm();
    const Potential dir(small.interior, e, rad);
    const ResponseMatrix der = frechet_derivative(solver, q, dir, basis, patch);
    Eigen::VectorXd flat(der.entries.size());
    for (int b = 0; b < der.entries.cols(); ++b)
      for (int t = 0; t < der.entries.rows(); ++t)
        flat[t + der.entries.rows() * b] = der.entries(t, b);
    REQUIRE((dense.col(s) - flat).norm() <= 1e-12 * std::max(flat.norm(), 1e-30));
  }
}

TEST_CASE("consistent data at the zero start converges in zero iterations",
          "[inverse]") {
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.0;
  const ResponseMatrix data = synthesize_data(
      [](const InteriorGrid& gi) { return Potential::zero(gi); }, default_basis(),
      cfg, inv_grids(), FractionalOrder(0.5), default_patch());
  const ReconstructionResult rr = reconstruct_gauss_newton(
      inv_solver(), data, default_basis(), cfg, default_patch());
  REQUIRE(rr.iterations == 0);
  REQUIRE(rr.misfit_history.size() == 1);
  REQUIRE(rr.misfit_history.front() == 0.0);
  REQUIRE(rr.q_estimate.values.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_FALSE(rr.diverged);
}

TEST_CASE("noiseless reconstruction recovers a resolution-limited bump image",
          "[inverse]") {
  const ExteriorPatch patch = default_patch();
  const Potential q_true = single_bump(inv_grids().interior);
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.0;
  cfg.regularization_weight = 1e-14;
  const ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                              inv_grids(), FractionalOrder(0.5),
                                              patch);
  const ReconstructionResult rr = reconstruct_gauss_newton(
      inv_solver(), data, default_basis(), cfg, patch, &q_true);

  // the bump is narrow against the resolving power of exponentially smoothing
  // boundary data, so most of its L2 mass is invisible; the recorded target
  // reflects that floor while the image still localizes the inclusion
  REQUIRE(rr.relative_error < 0.97);
  REQUIRE(rr.iterations >= 2);
  REQUIRE_FALSE(rr.diverged);
  const double final_misfit = rr.misfit_history.back();
  REQUIRE(final_misfit < 0.05 * rr.misfit_history.front());

  for (size_t i = 1; i < rr.residual_history.size(); ++i)
    REQUIRE(rr.residual_history[i] <= rr.residual_history[i - 1]);

  const InteriorGrid& gi = inv_grids().interior;
  double mass = 0.0, qmax = 0.0, qmax_left = 0.0;
  Vec2 centroid(0.0, 0.0);
  for (int k = 0; k < gi.size(); ++k) {
    const double v = std::max(rr.q_estimate.values[k], 0.0);
    mass += gi.weights[k] * v;
    centroid += gi.weights[k] * v * gi.nodes[k];
    qmax = std::max(qmax, rr.q_estimate.values[k]);
    if (gi.nodes[k].x() < 0.0)
      qmax_left = std::max(qmax_left, std::abs(rr.q_estimate.values[k]));
  }
  centroid /= mass;
  REQUIRE((centroid - Vec2(0.3, 0.0)).norm() < 0.15);
  REQUIRE(qmax > 0.1);
  REQUIRE(qmax_left < 0.5 * qmax);

  // support projection: nothing is placed outside the declared radius
  for (int k = 0; k < gi.size(); ++k)
    if ((gi.nodes[k] - gi.geom.center).norm() > cfg.support_radius)
      REQUIRE(rr.q_estimate.values[k] == 0.0);

  REQUIRE(rr.config.regularization_weight == cfg.regularization_weight);
}

TEST_CASE("reconstruction rejects data from a mismatched discretization",
          "[inverse]") {
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                        inv_grids(), FractionalOrder(0.5),
                                        default_patch());

  ResponseMatrix wrong = data;
  wrong.meta.radial_count += 1;
  CHECK(thrown_code([&] {
          reconstruct_gauss_newton(inv_solver(), wrong, default_basis(), cfg,
                                   default_patch());
        }) == "meta-mismatch");

  wrong = data;
  wrong.meta.a = 0.75;
  CHECK(thrown_code([&] {
          reconstruct_gauss_newton(inv_solver(), wrong, default_basis(), cfg,
                                   default_patch());
        }) == "meta-mismatch");

  wrong = data;
  wrong.entries.conservativeResize(wrong.entries.rows(),
                                   wrong.entries.cols() - 1);
  CHECK(thrown_code([&] {
          reconstruct_gauss_newton(inv_solver(), wrong, default_basis(), cfg,
                                   default_patch());
        }) == "meta-mismatch");
}

TEST_CASE("discrepancy ladder errors do not increase as the noise drops",
          "[inverse]") {
  const ExteriorPatch patch = default_patch();
  const Potential q_true = single_bump(inv_grids().interior);
  double prev_err = -1.0, prev_lambda = -1.0;
  for (double nl : {0.05, 0.01, 0.001}) {
    InversionConfig cfg;
    cfg.inverse_crime_flag = false;
    cfg.noise_level = nl;
    cfg.seed = 2026;
    const ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                                inv_grids(), FractionalOrder(0.5),
                                                patch);
    const DiscrepancySelection sel = reconstruct_discrepancy(
        inv_solver(), data, default_basis(), cfg, patch, &q_true);
    REQUIRE(sel.reached);
    REQUIRE(sel.result.misfit_history.back() <= sel.threshold);
    REQUIRE(sel.threshold == 1.1 * nl * data.entries.norm());
    if (prev_err >= 0.0) {
      REQUIRE(sel.result.relative_error <= prev_err);
      REQUIRE(sel.lambda <= prev_lambda);
    }
    prev_err = sel.result.relative_error;
    prev_lambda = sel.lambda;
  }
  REQUIRE(prev_err < 1.0);
}

TEST_CASE("discrepancy selection requires a positive noise level", "[inverse]") {
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.0;
  const ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                              inv_grids(), FractionalOrder(0.5),
                                              default_patch());
  CHECK(thrown_code([&] {
          reconstruct_discrepancy(inv_solver(), data, default_basis(), cfg,
                                  default_patch());
        }) == "invalid-config");
}

TEST_CASE("shrinking the measurement arc never improves the reconstruction",
          "[inverse]") {
  const ExteriorPatch patch = default_patch();
  InversionConfig cfg;
  cfg.inverse_crime_flag = true;
  cfg.noise_level = 0.01;
  cfg.seed = 11;
  cfg.regularization_weight = 1e-12;
  const Potential q_true = single_bump(inv_grids().interior);
  const ResponseMatrix data = synthesize_data(single_bump, default_basis(), cfg,
                                              inv_grids(), FractionalOrder(0.5),
                                              patch);
  const ReconstructionResult half = reconstruct_gauss_newton(
      inv_solver(), data, default_basis(), cfg, patch, &q_true);

  const DiskGrids qgrids =
      build_disk_grids(DiskGeometry{}, 12, 24, FractionalOrder(0.5), kQuarterArc);
  const ForwardSolver qsolver(qgrids, FractionalOrder(0.5));
  const BoundaryGrid& qgb = qgrids.boundary;
  ResponseMatrix qdata;
  qdata.meta = data.meta;
  qdata.meta.angles.clear();
  std::vector<int> keep;
  for (size_t t = 0; t < data.meta.angles.size(); ++t)
    if (qgb.sigma.contains(data.meta.angles[t])) keep.push_back(static_cast<int>(t));
  qdata.entries.resize(static_cast<int>(keep.size()), data.entries.cols());
  for (size_t t = 0; t < keep.size(); ++t) {
    qdata.entries.row(static_cast<int>(t)) = data.entries.row(keep[t]);
    qdata.meta.angles.push_back(data.meta.angles[keep[t]]);
  }
  const Potential q_true_quarter = single_bump(qgrids.interior);
  const ReconstructionResult quarter = reconstruct_gauss_newton(
      qsolver, qdata, default_basis(), cfg, patch, &q_true_quarter);

  REQUIRE(qdata.entries.rows() < data.entries.rows());
  REQUIRE(quarter.relative_error >= half.relative_error);
}

TEST_CASE("identical potentials are indistinguishable", "[inverse]") {
  const Potential q = single_bump(inv_grids().interior);
  const SeparationReport rep = distinguishability_test(
      q, q, default_basis(), inv_grids(), FractionalOrder(0.5), default_patch());
  REQUIRE(rep.separation <= 1e-12);
  REQUIRE(rep.max_trace_deviation <= 1e-15);
}

TEST_CASE("disjoint bumps separate far above the solver tolerance", "[inverse]") {
  const Potential q1 =
      Potential::bump(inv_grids().interior, Vec2(0.3, 0.0), 5.0, 0.3);
  const Potential q2 =
      Potential::bump(inv_grids().interior, Vec2(-0.3, 0.0), 5.0, 0.3);
  const SeparationReport rep = distinguishability_test(
      q1, q2, default_basis(), inv_grids(), FractionalOrder(0.5), default_patch());
  REQUIRE(rep.separation > 0.2);
  REQUIRE(rep.max_trace_deviation > 0.0);
  REQUIRE(rep.per_source.size() == default_basis().size());
}

TEST_CASE("separation is invariant under source reordering", "[inverse]") {
  const Potential q1 =
      Potential::bump(inv_grids().interior, Vec2(0.3, 0.0), 5.0, 0.3);
  const Potential q2 =
      Potential::bump(inv_grids().interior, Vec2(-0.3, 0.0), 5.0, 0.3);
  const SeparationReport fwd = distinguishability_test(
      q1, q2, default_basis(), inv_grids(), FractionalOrder(0.5), default_patch());

  SourceBasis reversed = default_basis();
  std::reverse(reversed.sources.begin(), reversed.sources.end());
  std::reverse(reversed.centers.begin(), reversed.centers.end());
  const SeparationReport rev = distinguishability_test(
      q1, q2, reversed, inv_grids(), FractionalOrder(0.5), default_patch());

  REQUIRE(std::abs(fwd.separation - rev.separation) <= 1e-12);
  REQUIRE(std::abs(fwd.max_trace_deviation - rev.max_trace_deviation) <= 1e-15);
}
