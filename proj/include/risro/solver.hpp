#pragma once

#include <functional>

#include "risro/core.hpp"
#include "risro/manifold.hpp"

namespace risro {

enum class LsBackend { DenseQR, IntrinsicCG };

enum class TolMetric { RelRmse, DistToFinalProxy, GradNorm };

struct RisroOptions {
  int max_iter = 300;
  double tol = 1e-12;
  TolMetric tol_metric = TolMetric::DistToFinalProxy;
  LsBackend ls_backend = LsBackend::DenseQR;
  double pinv_threshold = -1.0;  // negative: r * machine epsilon rule
  double cg_tol = 1e-12;
  int max_cg_iters = -1;  // nonpositive: 4 * dof
  bool certify = false;   // record Gauss-Newton residual and descent identity
  std::function<void(int, const FactoredMatrix&)> on_iterate;
};

/** Sketched covariate matrix of the reduced least squares: row i holds
 * [vec(U^T A_i V), vec(Uperp^T A_i V), vec(Vperp^T A_i^T U)], matching the
 * intrinsic coefficient order. Entry sampling rows are assembled from the
 * frame rows directly, without materializing any A_i.
 */
struct SketchDesign {
  Matrix G;
  Index p1 = 0, p2 = 0, r = 0;
};

SketchDesign build_sketch_design(const SensingOperator& op, const FactoredMatrix& X,
                                 const manifold::Frame& F);

struct ReducedLsSolution {
  manifold::SketchBlocks blocks;
  bool rank_deficient = false;
};

/// Minimum-norm least squares: column-pivoted QR, SVD pseudo-inverse when
/// the design is numerically rank-deficient.
ReducedLsSolution solve_reduced_ls(const SketchDesign& design, const Vector& y);

/** Algorithm loop: sketch, reduced least squares, orthographic retraction.
 * The trace records one row per iterate (row 0 is the initialization);
 * per-step certificates land on the row of the iterate the step was
 * computed at.
 */
std::pair<FactoredMatrix, SolveTrace> risro_solve(const ProblemInstance& prob,
                                                  const FactoredMatrix& init,
                                                  const RisroOptions& opts = {});

}  // namespace risro
