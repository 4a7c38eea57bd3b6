#include "risro/diagnostics.hpp"

#include <Eigen/LU>

namespace risro::diag {

std::pair<double, double> iteration_error_decomposition(const ProblemInstance& prob,
                                                        const FactoredMatrix& Xbar,
                                                        const FactoredMatrix& X,
                                                        const manifold::Frame& F,
                                                        const manifold::SketchBlocks& blocks) {
  const Matrix Xbar_dense = Xbar.value();

  const Matrix Bt = F.U.transpose() * Xbar_dense * F.V;
  const Matrix D1t = F.Uperp.transpose() * Xbar_dense * F.V;
  const Matrix D2t = F.Vperp.transpose() * Xbar_dense.transpose() * F.U;
  const double lhs = (blocks.B - Bt).squaredNorm() + (blocks.D1 - D1t).squaredNorm() +
                     (blocks.D2 - D2t).squaredNorm();

  const Vector eps_bar = prob.y - apply(prob.op, Xbar_dense);
  const Matrix normal_part =
      F.Uperp * (F.Uperp.transpose() * Xbar_dense * F.Vperp) * F.Vperp.transpose();
  const Vector eps_t = eps_bar + apply(prob.op, normal_part);

  const SketchDesign design = build_sketch_design(prob.op, X, F);
  const Matrix M = design.G.transpose() * design.G;
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible())
    throw manifold::DegenerateError("iteration_error_decomposition: singular normal operator");
  const Vector z = lu.solve(design.G.transpose() * eps_t);
  return {lhs, z.squaredNorm()};
}

}  // namespace risro::diag
