#pragma once

#include <Eigen/QR>

#include "risro/core.hpp"

namespace risro::manifold {

/// Numerical degeneracy that ends a solve (singular core, lost signal, ...).
class DegenerateError : public std::runtime_error {
public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

/** Orthonormal frame [U U_perp], [V V_perp] attached to an iterate.
 *
 * The complements come from the Householder completion of U and V; the
 * factorization objects are kept so the structured solver can apply
 * U_perp and U_perp^T without materializing them.
 */
struct Frame {
  explicit Frame(const FactoredMatrix& X);

  Index p1() const { return U.rows(); }
  Index p2() const { return V.rows(); }
  Index rank() const { return U.cols(); }
  Index dof() const { return (p1() + p2() - rank()) * rank(); }

  Matrix U, V;
  Matrix Uperp, Vperp;
  Eigen::HouseholderQR<Matrix> qr_u, qr_v;

  // Implicit complement products, O(p r k) for a k-column argument.
  Matrix uperp_times(const Matrix& Z) const;          // U_perp * Z
  Matrix uperp_adjoint_times(const Matrix& M) const;  // U_perp^T * M
  Matrix vperp_times(const Matrix& Z) const;
  Matrix vperp_adjoint_times(const Matrix& M) const;
};

/** Element of T_X M_r in block form:
 *  value = [U U_perp] [[Zb, Zd2^T], [Zd1, 0]] [V V_perp]^T.
 */
struct TangentVector {
  Matrix Zb;   // r x r
  Matrix Zd1;  // (p1-r) x r
  Matrix Zd2;  // (p2-r) x r

  double frob_norm() const;
  TangentVector& operator+=(const TangentVector& o);
  TangentVector scaled(double s) const;
};

TangentVector zero_tangent(const Frame& F);
Matrix embed(const Frame& F, const TangentVector& Z);
TangentVector tangent_project(const Frame& F, const Matrix& Z);
double tangent_inner(const TangentVector& a, const TangentVector& b);

/// Coefficients of a tangent vector in the orthonormal block basis,
/// ordered [vec(Zb), vec(Zd1), vec(Zd2)].
struct IntrinsicVector {
  Vector coeffs;
  Index p1 = 0, p2 = 0, r = 0;
};

IntrinsicVector to_intrinsic(const TangentVector& Z);
TangentVector from_intrinsic(const Vector& coeffs, Index p1, Index p2, Index r);

TangentVector riemannian_gradient(const ProblemInstance& prob, const FactoredMatrix& X,
                                  const Frame& F);

/// Hessian action per the fixed-rank least-squares formula; X must carry a
/// diagonal (SVD) core with sigma_r > 0.
TangentVector riemannian_hessian_apply(const ProblemInstance& prob, const FactoredMatrix& X,
                                       const Frame& F, const TangentVector& Z);

/// Unknowns of the reduced least squares, expressed in the frame of the
/// current iterate.
struct SketchBlocks {
  Matrix B;   // r x r
  Matrix D1;  // (p1-r) x r
  Matrix D2;  // (p2-r) x r
};

struct RetractResult {
  FactoredMatrix X;
  double b_sigma_min = 0.0;
  bool rank_deficient = false;
};

/** Orthographic retraction: X_U = U B + U_perp D1, X_V = V B^T + V_perp D2,
 * new factors from positive-diagonal QR, value X_U B^+ X_V^T. Singular
 * values of B below pinv_threshold * sigma_max(B) are treated as zero
 * (pass a negative threshold for the default r * eps rule).
 */
RetractResult orthographic_retract(const FactoredMatrix& X, const Frame& F,
                                   const SketchBlocks& blocks, double pinv_threshold = -1.0);

/// Retraction of a scaled tangent vector; scale == 0 returns X unchanged.
FactoredMatrix retract_tangent(const FactoredMatrix& X, const Frame& F,
                               const TangentVector& eta, double scale = 1.0);

/// Rough multiply-add counter for the structured solve path.
struct OpCounter {
  std::uint64_t madds = 0;
  int cg_iterations = 0;
};

struct GaussNewtonResult {
  TangentVector eta;
  int iterations = 0;
  double rel_residual = 0.0;
  bool degenerate = false;
};

/** Conjugate-gradient solve of the Gauss-Newton normal equations on
 * intrinsic coordinates: (B_X^* A^* A B_X) v = -u with u the intrinsic
 * gradient. For EntrySampling the operator is applied in
 * O(n r + (p1+p2) r^2) per iteration; other variants go through the
 * sketched design. Stops at rel residual <= tol; flags Degenerate when the
 * residual has not decreased for 20 iterations.
 */
GaussNewtonResult gauss_newton_cg(const ProblemInstance& prob, const FactoredMatrix& X,
                                  const Frame& F, double tol, int max_cg_iters,
                                  OpCounter* counter = nullptr);

}  // namespace risro::manifold
