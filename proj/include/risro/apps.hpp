#pragma once

#include "risro/solver.hpp"

namespace risro::apps {

/// Symmetric rank-one iterate X = lambda * u u^T with unit u.
struct SymmetricFactoredMatrix {
  Vector u;
  double lambda = 0.0;
  Matrix value() const { return lambda * u * u.transpose(); }
};

struct PrSketchSolution {
  double b = 0.0;
  Vector d;  // length p-1, coefficients against the Householder complement of u
  bool rank_deficient = false;
};

/** Reduced least squares of the phase-retrieval sketch: minimizes
 * ||y - A1 b - 2 A2 d|| with (A1)_i = (a_i^T u)^2 and A2 row i equal to
 * uperp^T a_i a_i^T u. The factor 2 absorbs the duplicated covariate pair
 * that symmetry produces.
 */
PrSketchSolution pr_sketch_and_solve(const Matrix& a_columns, const Vector& y, const Vector& u);

/** Top eigenpair of [u uperp] [[b, d^T], [d, 0]] [u uperp]^T computed on
 * span{u, uperp d}, returned as lambda_1 v1 v1^T. Throws DegenerateError
 * when lambda_1 <= 0 (signal lost).
 */
SymmetricFactoredMatrix pr_rank2_eig_update(const Vector& u, double b, const Vector& d);

/// uperp * d in the same complement basis pr_sketch_and_solve reports d in.
Vector pr_complement_embed(const Vector& u, const Vector& d);

struct PrOptions {
  int max_iter = 300;
  double tol = 1e-12;
  TolMetric tol_metric = TolMetric::DistToFinalProxy;
};

std::pair<SymmetricFactoredMatrix, SolveTrace> pr_risro(
    const Matrix& a_columns, const Vector& y, const SymmetricFactoredMatrix& init,
    const PrOptions& opts = {}, const Vector* x_star = nullptr);

/// x0 = sqrt(lambda_1(Y)/3) v1 with Y = (1/n) sum y_j a_j a_j^T.
SymmetricFactoredMatrix pr_spectral_init(const Matrix& a_columns, const Vector& y);

// TODO: implement the truncation rule (drop samples with outlying y_j / ||a_j||
// before forming Y); plain spectral initialization for now.
SymmetricFactoredMatrix pr_truncated_spectral_init(const Matrix& a_columns, const Vector& y);

/// Gradient of g(x) = (1/4n) sum ((a_j^T x)^2 - y_j)^2.
Vector pr_objective_gradient(const Matrix& a_columns, const Vector& y, const Vector& x);

/// Spectral init refined by T0 gradient steps with eta = c1 / (log p * ||x0||^2).
SymmetricFactoredMatrix pr_gd_init(const Matrix& a_columns, const Vector& y, int T0, double c1);

/// Entry-sampling specialization of the main loop.
std::pair<FactoredMatrix, SolveTrace> mc_risro(const Vector& y_omega,
                                               const std::vector<std::pair<Index, Index>>& omega,
                                               Index p1, Index p2, Index r,
                                               const FactoredMatrix& init,
                                               const RisroOptions& opts = {},
                                               const std::optional<Matrix>& truth = std::nullopt);

struct RpcaConfig {
  double gamma = 0.3;  // truncation fraction in (0,1)
  std::vector<std::pair<Index, Index>> omega;  // empty: fully observed
  Index rank = 1;
};

/** Truncation screen: zeroes entry (i,j) iff |A_ij| strictly exceeds both
 * the (1-gamma) percentile of the observed absolute values in row i and in
 * column j (nearest-rank percentile). Rows or columns with no observed
 * entries pass their entries through unchanged.
 */
Matrix rpca_truncate(const Matrix& A, const RpcaConfig& cfg);

std::pair<FactoredMatrix, SolveTrace> rpca_risro(const Matrix& y_observed, const RpcaConfig& cfg,
                                                 const FactoredMatrix& init,
                                                 const RisroOptions& opts = {},
                                                 const std::optional<Matrix>& truth = std::nullopt);

}  // namespace risro::apps
