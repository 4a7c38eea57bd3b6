#pragma once

#include "risro/solver.hpp"

namespace risro::baselines {

/** Shared knobs for the comparison solvers. Step sizes apply to SVP and
 * factored GD; each grid member runs as an independent trial and the best
 * final error wins. Runs whose error exceeds 1e6 times the initial error
 * are marked diverged and excluded.
 */
struct BaselineOptions {
  std::vector<double> step_grid{5e-3, 1e-3, 5e-4};
  int max_iter = 300;
  double tol = 1e-12;
  TolMetric tol_metric = TolMetric::DistToFinalProxy;
};

/// Projected gradient: X+ = best_rank_r(X - eta * A*(A(X) - y)).
std::pair<FactoredMatrix, SolveTrace> svp_solve(const ProblemInstance& prob,
                                                const FactoredMatrix& init,
                                                const BaselineOptions& opts = {});

/// Alternating dense least squares over U and V with QR re-orthonormalization.
std::pair<FactoredMatrix, SolveTrace> altmin_solve(const ProblemInstance& prob,
                                                   const FactoredMatrix& init,
                                                   const BaselineOptions& opts = {});

/** Gradient descent on g(R, L) = ||y - A(R L^T)||^2 / (2n), started from the
 * balanced factors R = U sqrt(S), L = V sqrt(S) of the initialization.
 */
std::pair<FactoredMatrix, SolveTrace> factored_gd_solve(const ProblemInstance& prob,
                                                        const FactoredMatrix& init,
                                                        const BaselineOptions& opts = {});

/** Rank-r truncation of the rescaled back-projection A*(y). The rescaling
 * divides by the average measurement energy sum_i ||A_i||_F^2 / (p1 p2), so
 * the init lands on the scale of the signal for dense Gaussian designs and
 * reduces to the classic (p1 p2 / n) inflation for entry sampling.
 */
FactoredMatrix spectral_init_trace_regression(const SensingOperator& op, const Vector& y,
                                              Index r);

}  // namespace risro::baselines
