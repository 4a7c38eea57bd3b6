#pragma once

#include "risro/solver.hpp"

namespace risro::diag {

/** Both sides of the per-iteration error identity for the reduced least
 * squares against a rank-r target Xbar:
 *   lhs = ||B - Bt||_F^2 + ||D1 - D1t||_F^2 + ||D2 - D2t||_F^2
 *   rhs = ||(L^* A^* A L)^{-1} L^* A^*(eps)||_F^2,
 * with (Bt, D1t, D2t) the target blocks in the frame of X and
 * eps = (y - A(Xbar)) + A(P_{Uperp} Xbar P_{Vperp}).
 *
 * Test/diagnostic surface only; the production loop never calls this.
 * Throws DegenerateError when the reduced normal operator is singular.
 */
std::pair<double, double> iteration_error_decomposition(const ProblemInstance& prob,
                                                        const FactoredMatrix& Xbar,
                                                        const FactoredMatrix& X,
                                                        const manifold::Frame& F,
                                                        const manifold::SketchBlocks& blocks);

}  // namespace risro::diag
