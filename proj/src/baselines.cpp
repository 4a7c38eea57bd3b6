#include "risro/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace risro::baselines {

using manifold::Frame;

namespace {

struct Recorder {
  explicit Recorder(const ProblemInstance& prob)
      : prob_(prob),
        truth_norm_(prob.truth ? prob.truth->norm() : 0.0),
        grad_scale_(adjoint(prob.op, prob.y).norm()),
        start_(std::chrono::steady_clock::now()) {}

  // Returns the stopping metric for this iterate.
  double record(SolveTrace& trace, int t, const FactoredMatrix& X, TolMetric metric) {
    const Matrix X_dense = X.value();
    const Vector res = apply(prob_.op, X_dense) - prob_.y;
    Frame F(X);
    IterationRecord rec;
    rec.iter = t;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    rec.objective = 0.5 * res.squaredNorm();
    rec.grad_norm = manifold::tangent_project(F, adjoint(prob_.op, res)).frob_norm();
    rec.rel_rmse = prob_.truth ? (X_dense - *prob_.truth).norm() / truth_norm_
                               : std::numeric_limits<double>::quiet_NaN();
    rec.dist_to_final = t == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : (X_dense - prev_).norm() / prev_.norm();
    trace.records.push_back(rec);
    prev_ = X_dense;
    switch (metric) {
      case TolMetric::RelRmse:
        return rec.rel_rmse;
      case TolMetric::DistToFinalProxy:
        return rec.dist_to_final;
      case TolMetric::GradNorm:
        return grad_scale_ > 0.0 ? rec.grad_norm / grad_scale_ : rec.grad_norm;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Error of the last recorded iterate: rel RMSE when the truth is known,
  // residual norm otherwise.
  static double error_of(const SolveTrace& trace) {
    const auto& rec = trace.records.back();
    return std::isfinite(rec.rel_rmse) ? rec.rel_rmse : std::sqrt(2.0 * rec.objective);
  }

  const ProblemInstance& prob_;
  double truth_norm_, grad_scale_;
  std::chrono::steady_clock::time_point start_;
  Matrix prev_;
};

struct GridRun {
  FactoredMatrix X;
  SolveTrace trace;
  double final_error = std::numeric_limits<double>::infinity();
  bool diverged = false;
};

std::pair<FactoredMatrix, SolveTrace> pick_best(std::vector<GridRun>& runs) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(runs.size()); ++i) {
    if (runs[i].diverged) continue;
    if (best < 0 || runs[i].final_error < runs[best].final_error) best = i;
  }
  if (best < 0) {
    // every step size diverged; surface the least-bad run as Degenerate
    best = 0;
    for (int i = 1; i < static_cast<int>(runs.size()); ++i)
      if (runs[i].final_error < runs[best].final_error) best = i;
    runs[best].trace.status = SolveStatus::Degenerate;
  }
  return {std::move(runs[best].X), std::move(runs[best].trace)};
}

GridRun svp_single(const ProblemInstance& prob, const FactoredMatrix& init,
                   const BaselineOptions& opts, double eta) {
  GridRun run;
  Recorder rec(prob);
  FactoredMatrix X = init;
  run.trace.status = SolveStatus::MaxIter;
  double init_error = 0.0;
  for (int t = 0;; ++t) {
    const double metric = rec.record(run.trace, t, X, opts.tol_metric);
    const double err = Recorder::error_of(run.trace);
    if (t == 0) init_error = err;
    if (!std::isfinite(err) || err > 1e6 * std::max(init_error, 1e-300)) {
      run.diverged = true;
      break;
    }
    if (std::isfinite(metric) && metric <= opts.tol) {
      run.trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) break;
    const Matrix X_dense = X.value();
    const Matrix grad = adjoint(prob.op, apply(prob.op, X_dense) - prob.y);
    X = best_rank_r(X_dense - eta * grad, prob.rank);
  }
  run.final_error = Recorder::error_of(run.trace);
  run.X = std::move(X);
  return run;
}

GridRun gd_single(const ProblemInstance& prob, const FactoredMatrix& init,
                  const BaselineOptions& opts, double eta) {
  GridRun run;
  Recorder rec(prob);
  run.trace.status = SolveStatus::MaxIter;
  const double inv_n = 1.0 / static_cast<double>(prob.op.n());

  const FactoredMatrix init_svd = to_svd(init);
  const Vector sqrt_sigma = init_svd.C.diagonal().cwiseMax(0.0).cwiseSqrt();
  Matrix R = init_svd.U * sqrt_sigma.asDiagonal();
  Matrix L = init_svd.V * sqrt_sigma.asDiagonal();

  auto factored = [&]() -> FactoredMatrix {
    Eigen::HouseholderQR<Matrix> qr_r(R), qr_l(L);
    FactoredMatrix X;
    X.U = qr_r.householderQ() * Matrix::Identity(R.rows(), R.cols());
    X.V = qr_l.householderQ() * Matrix::Identity(L.rows(), L.cols());
    const Matrix RR = qr_r.matrixQR().topRows(R.cols()).triangularView<Eigen::Upper>();
    const Matrix RL = qr_l.matrixQR().topRows(L.cols()).triangularView<Eigen::Upper>();
    X.C = RR * RL.transpose();
    return X;
  };

  double init_error = 0.0;
  FactoredMatrix X = factored();
  for (int t = 0;; ++t) {
    const double metric = rec.record(run.trace, t, X, opts.tol_metric);
    const double err = Recorder::error_of(run.trace);
    if (t == 0) init_error = err;
    if (!std::isfinite(err) || err > 1e6 * std::max(init_error, 1e-300)) {
      run.diverged = true;
      break;
    }
    if (std::isfinite(metric) && metric <= opts.tol) {
      run.trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) break;
    const Matrix W = inv_n * adjoint(prob.op, apply(prob.op, Matrix(R * L.transpose())) - prob.y);
    const Matrix grad_r = W * L;
    const Matrix grad_l = W.transpose() * R;
    R -= eta * grad_r;
    L -= eta * grad_l;
    X = factored();
  }
  run.final_error = Recorder::error_of(run.trace);
  run.X = std::move(X);
  return run;
}

// Row of the alternating least squares design for the V-step (vec(U^T A_i))
// or the U-step (vec(A_i V)), without materializing A_i when avoidable.
Matrix altmin_design_v(const ProblemInstance& prob, const Matrix& U) {
  const Index n = prob.op.n(), r = U.cols(), p2 = prob.op.p2();
  Matrix G(n, r * p2);
  for (Index i = 0; i < n; ++i) {
    const Matrix row = U.transpose() * prob.op.measurement_matrix(i);
    G.row(i) = Eigen::Map<const Vector>(row.data(), row.size()).transpose();
  }
  return G;
}

Matrix altmin_design_u(const ProblemInstance& prob, const Matrix& V) {
  const Index n = prob.op.n(), r = V.cols(), p1 = prob.op.p1();
  Matrix G(n, p1 * r);
  for (Index i = 0; i < n; ++i) {
    const Matrix row = prob.op.measurement_matrix(i) * V;
    G.row(i) = Eigen::Map<const Vector>(row.data(), row.size()).transpose();
  }
  return G;
}

Matrix qr_orthonormal(const Matrix& M) {
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
  const Matrix R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace

std::pair<FactoredMatrix, SolveTrace> svp_solve(const ProblemInstance& prob,
                                                const FactoredMatrix& init,
                                                const BaselineOptions& opts) {
  require(!opts.step_grid.empty(), "svp_solve: empty step grid");
  std::vector<GridRun> runs(opts.step_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (Index g = 0; g < static_cast<Index>(opts.step_grid.size()); ++g)
    runs[g] = svp_single(prob, init, opts, opts.step_grid[g]);
  return pick_best(runs);
}

std::pair<FactoredMatrix, SolveTrace> factored_gd_solve(const ProblemInstance& prob,
                                                        const FactoredMatrix& init,
                                                        const BaselineOptions& opts) {
  require(!opts.step_grid.empty(), "factored_gd_solve: empty step grid");
  std::vector<GridRun> runs(opts.step_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (Index g = 0; g < static_cast<Index>(opts.step_grid.size()); ++g)
    runs[g] = gd_single(prob, init, opts, opts.step_grid[g]);
  return pick_best(runs);
}

std::pair<FactoredMatrix, SolveTrace> altmin_solve(const ProblemInstance& prob,
                                                   const FactoredMatrix& init,
                                                   const BaselineOptions& opts) {
  Recorder rec(prob);
  SolveTrace trace;
  trace.status = SolveStatus::MaxIter;
  Matrix U = init.U;
  FactoredMatrix X = init;
  bool flagged = false;
  for (int t = 0;; ++t) {
    const double metric = rec.record(trace, t, X, opts.tol_metric);
    trace.records.back().ls_rank_deficient = flagged;
    if (std::isfinite(metric) && metric <= opts.tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) break;

    auto [wv, flag_v] = min_norm_least_squares(altmin_design_v(prob, U), prob.y);
    const Matrix Vcheck =
        Eigen::Map<const Matrix>(wv.data(), U.cols(), prob.op.p2()).transpose();
    const Matrix V = qr_orthonormal(Vcheck);

    auto [wu, flag_u] = min_norm_least_squares(altmin_design_u(prob, V), prob.y);
    const Matrix Ucheck = Eigen::Map<const Matrix>(wu.data(), prob.op.p1(), U.cols());
    U = qr_orthonormal(Ucheck);
    flagged = flag_v || flag_u;

    X.U = U;
    X.V = V;
    X.C = U.transpose() * Ucheck;  // X = Ucheck V^T = U (U^T Ucheck) V^T
  }
  return {std::move(X), std::move(trace)};
}

FactoredMatrix spectral_init_trace_regression(const SensingOperator& op, const Vector& y,
                                              Index r) {
  double energy = 0.0;
  switch (op.kind()) {
    case OperatorKind::DenseSensing:
      energy = op.stacked().squaredNorm();
      break;
    case OperatorKind::EntrySampling:
      energy = static_cast<double>(op.n());
      break;
    case OperatorKind::SymmetricRankOne:
      for (Index i = 0; i < op.n(); ++i) {
        const double s = op.vectors().col(i).squaredNorm();
        energy += s * s;
      }
      break;
  }
  const double scale = energy / static_cast<double>(op.p1() * op.p2());
  Matrix back = adjoint(op, y);
  if (scale > 0.0) back /= scale;
  return best_rank_r(back, r);
}

}  // namespace risro::baselines
