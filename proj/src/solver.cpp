#include "risro/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "risro/kernels.hpp"

namespace risro {

using manifold::Frame;
using manifold::SketchBlocks;
using manifold::TangentVector;

SketchDesign build_sketch_design(const SensingOperator& op, const FactoredMatrix& X,
                                 const Frame& F) {
  require(X.p1() == op.p1() && X.p2() == op.p2(), "build_sketch_design: dimension mismatch");
  SketchDesign d;
  d.p1 = op.p1();
  d.p2 = op.p2();
  d.r = X.rank();
  switch (op.kind()) {
    case OperatorKind::DenseSensing:
      d.G = kernels::dense_sketch(op.stacked(), F.U, F.Uperp, F.V, F.Vperp);
      break;
    case OperatorKind::EntrySampling:
      d.G = kernels::entry_sketch(op.omega(), F.U, F.Uperp, F.V, F.Vperp);
      break;
    case OperatorKind::SymmetricRankOne:
      d.G = kernels::rank_one_sketch(op.vectors(), F.U, F.Uperp, F.V, F.Vperp);
      break;
  }
  return d;
}

ReducedLsSolution solve_reduced_ls(const SketchDesign& design, const Vector& y) {
  auto [v, deficient] = min_norm_least_squares(design.G, y);
  ReducedLsSolution out;
  out.rank_deficient = deficient;
  const TangentVector Z = manifold::from_intrinsic(v, design.p1, design.p2, design.r);
  out.blocks = SketchBlocks{Z.Zb, Z.Zd1, Z.Zd2};
  return out;
}

namespace {

double metric_value(TolMetric metric, const IterationRecord& rec, double grad_scale) {
  switch (metric) {
    case TolMetric::RelRmse:
      return rec.rel_rmse;
    case TolMetric::DistToFinalProxy:
      return rec.dist_to_final;
    case TolMetric::GradNorm:
      return grad_scale > 0.0 ? rec.grad_norm / grad_scale : rec.grad_norm;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::pair<FactoredMatrix, SolveTrace> risro_solve(const ProblemInstance& prob,
                                                  const FactoredMatrix& init,
                                                  const RisroOptions& opts) {
  require(init.p1() == prob.op.p1() && init.p2() == prob.op.p2(), "risro_solve: shape mismatch");
  require(init.rank() == prob.rank, "risro_solve: init rank != problem rank");
  require(init.orthonormality_defect() <= 1e-8, "risro_solve: init factors not orthonormal");
  require(opts.max_iter >= 1 && opts.tol > 0.0, "risro_solve: bad options");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  const double grad_scale =
      opts.tol_metric == TolMetric::GradNorm ? adjoint(prob.op, prob.y).norm() : 0.0;
  const double truth_norm = prob.truth ? prob.truth->norm() : 0.0;

  FactoredMatrix X = init;
  SolveTrace trace;
  trace.status = SolveStatus::MaxIter;
  Matrix prev_dense;

  for (int t = 0;; ++t) {
    Frame F(X);
    const Matrix X_dense = X.value();
    const Vector res = apply(prob.op, X_dense) - prob.y;
    const TangentVector grad = manifold::tangent_project(F, adjoint(prob.op, res));

    IterationRecord rec;
    rec.iter = t;
    rec.objective = 0.5 * res.squaredNorm();
    rec.grad_norm = grad.frob_norm();
    rec.rel_rmse = prob.truth ? (X_dense - *prob.truth).norm() / truth_norm
                              : std::numeric_limits<double>::quiet_NaN();
    rec.dist_to_final = t == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : (X_dense - prev_dense).norm() / prev_dense.norm();
    rec.wall_time_s = elapsed();
    trace.records.push_back(rec);
    if (opts.on_iterate) opts.on_iterate(t, X);

    const double metric = metric_value(opts.tol_metric, rec, grad_scale);
    if (std::isfinite(metric) && metric <= opts.tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) {
      trace.status = SolveStatus::MaxIter;
      break;
    }

    SketchBlocks blocks;
    if (opts.ls_backend == LsBackend::DenseQR) {
      const SketchDesign design = build_sketch_design(prob.op, X, F);
      ReducedLsSolution ls = solve_reduced_ls(design, prob.y);
      trace.records.back().ls_rank_deficient = ls.rank_deficient;
      blocks = std::move(ls.blocks);
    } else {
      manifold::GaussNewtonResult gn =
          manifold::gauss_newton_cg(prob, X, F, opts.cg_tol, opts.max_cg_iters);
      if (gn.degenerate) {
        trace.status = SolveStatus::Degenerate;
        break;
      }
      blocks = SketchBlocks{X.C + gn.eta.Zb, gn.eta.Zd1, gn.eta.Zd2};
    }

    if (opts.certify) {
      const TangentVector eta{blocks.B - X.C, blocks.D1, blocks.D2};
      const Vector step_image = apply(prob.op, manifold::embed(F, eta));
      auto& row = trace.records.back();
      row.descent_inner = manifold::tangent_inner(grad, eta);
      row.step_image_sq = step_image.squaredNorm();
      row.gn_residual =
          manifold::tangent_project(F, adjoint(prob.op, res + step_image)).frob_norm();
    }

    manifold::RetractResult rr =
        manifold::orthographic_retract(X, F, blocks, opts.pinv_threshold);
    if (rr.rank_deficient) {
      trace.status = SolveStatus::Degenerate;
      break;
    }
    prev_dense = X_dense;
    X = std::move(rr.X);
  }

  return {std::move(X), std::move(trace)};
}

}  // namespace risro
