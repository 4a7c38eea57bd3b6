#include "risro/apps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "risro/kernels.hpp"

namespace risro::apps {

using manifold::DegenerateError;

namespace {

// Householder reflection carrying the orthonormal complement of a unit
// vector u: columns 2..p of H = I - beta v v^T span u_perp.
struct UnitComplement {
  explicit UnitComplement(const Vector& u) : v(u) {
    const double s = u(0) >= 0.0 ? 1.0 : -1.0;
    v(0) += s * u.norm();
    beta = 2.0 / v.squaredNorm();
  }

  Vector reflect(const Vector& x) const { return x - (beta * v.dot(x)) * v; }

  // u_perp^T x, length p-1
  Vector adjoint_times(const Vector& x) const { return reflect(x).tail(x.size() - 1); }

  // u_perp z for z of length p-1
  Vector times(const Vector& z) const {
    Vector ext = Vector::Zero(v.size());
    ext.tail(z.size()) = z;
    return reflect(ext);
  }

  Vector v;
  double beta = 0.0;
};

double metric_of(TolMetric metric, const IterationRecord& rec, double grad_scale) {
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

PrSketchSolution pr_sketch_and_solve(const Matrix& a_columns, const Vector& y, const Vector& u) {
  const Index p = a_columns.rows(), n = a_columns.cols();
  require(p >= 2, "pr_sketch_and_solve: need p >= 2");
  require(n >= p, "pr_sketch_and_solve: need n >= p");
  require(std::abs(u.norm() - 1.0) <= 1e-8, "pr_sketch_and_solve: u must be unit");

  const UnitComplement comp(u);
  const Vector s = a_columns.transpose() * u;
  Matrix design(n, p);
  design.col(0) = s.cwiseProduct(s);
  // scaled columns a_i s_i, reflected in one pass: H (A diag(s)) = A diag(s) - beta v (v^T A diag(s))
  const Matrix scaled = a_columns * s.asDiagonal();
  const Matrix reflected = scaled - comp.beta * comp.v * (comp.v.transpose() * scaled);
  design.rightCols(p - 1) = 2.0 * reflected.bottomRows(p - 1).transpose();

  auto [sol, deficient] = min_norm_least_squares(design, y);
  PrSketchSolution out;
  out.b = sol(0);
  out.d = sol.tail(p - 1);
  out.rank_deficient = deficient;
  return out;
}

SymmetricFactoredMatrix pr_rank2_eig_update(const Vector& u, double b, const Vector& d) {
  const double dn = d.norm();
  if (dn == 0.0) {
    if (b <= 0.0) throw DegenerateError("pr_rank2_eig_update: signal lost (lambda_1 <= 0)");
    return {u, b};
  }
  // 2x2 symmetric eigenproblem [[b, dn], [dn, 0]] on span{u, u_perp d / dn};
  // lambda_1 lambda_2 = -dn^2 < 0, so a tie lambda_1 = lambda_2 cannot occur here
  const double half = 0.5 * b;
  const double lambda1 = half + std::sqrt(half * half + dn * dn);
  if (lambda1 <= 0.0) throw DegenerateError("pr_rank2_eig_update: signal lost (lambda_1 <= 0)");
  const UnitComplement comp(u);
  const Vector w = comp.times(d) / dn;
  Vector v1 = lambda1 * u + dn * w;  // (lambda1, dn) direction keeps <v1, u> > 0
  v1 /= v1.norm();
  return {v1, lambda1};
}

Vector pr_complement_embed(const Vector& u, const Vector& d) {
  require(d.size() == u.size() - 1, "pr_complement_embed: length mismatch");
  return UnitComplement(u).times(d);
}

std::pair<SymmetricFactoredMatrix, SolveTrace> pr_risro(const Matrix& a_columns, const Vector& y,
                                                        const SymmetricFactoredMatrix& init,
                                                        const PrOptions& opts,
                                                        const Vector* x_star) {
  require(std::abs(init.u.norm() - 1.0) <= 1e-8, "pr_risro: init u must be unit");
  const auto t_start = std::chrono::steady_clock::now();
  const double grad_scale =
      opts.tol_metric == TolMetric::GradNorm
          ? kernels::rank_one_adjoint(a_columns, y).norm()
          : 0.0;
  const double xs2 = x_star ? x_star->squaredNorm() : 0.0;

  SymmetricFactoredMatrix X = init;
  SolveTrace trace;
  trace.status = SolveStatus::MaxIter;
  double prev_lambda = 0.0;
  Vector prev_u;

  for (int t = 0;; ++t) {
    const Vector s = a_columns.transpose() * X.u;
    const Vector res = X.lambda * s.cwiseProduct(s) - y;
    // gradient blocks on the symmetric rank-1 tangent space
    const Vector gu = a_columns * res.cwiseProduct(s);  // A*(res) u
    const UnitComplement comp(X.u);
    const double zb = X.u.dot(gu);
    const Vector zd = comp.adjoint_times(gu);

    IterationRecord rec;
    rec.iter = t;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    rec.objective = 0.5 * res.squaredNorm();
    rec.grad_norm = std::sqrt(zb * zb + 2.0 * zd.squaredNorm());
    if (x_star) {
      const double cross = X.u.dot(*x_star);
      const double gap = X.lambda * X.lambda + xs2 * xs2 - 2.0 * X.lambda * cross * cross;
      rec.rel_rmse = std::sqrt(std::max(0.0, gap)) / xs2;
    } else {
      rec.rel_rmse = std::numeric_limits<double>::quiet_NaN();
    }
    if (t == 0) {
      rec.dist_to_final = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double cross = X.u.dot(prev_u);
      const double gap = X.lambda * X.lambda + prev_lambda * prev_lambda -
                         2.0 * X.lambda * prev_lambda * cross * cross;
      rec.dist_to_final = std::sqrt(std::max(0.0, gap)) / prev_lambda;
    }
    trace.records.push_back(rec);

    const double metric = metric_of(opts.tol_metric, rec, grad_scale);
    if (std::isfinite(metric) && metric <= opts.tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) break;

    PrSketchSolution sol = pr_sketch_and_solve(a_columns, y, X.u);
    trace.records.back().ls_rank_deficient = sol.rank_deficient;
    prev_lambda = X.lambda;
    prev_u = X.u;
    try {
      X = pr_rank2_eig_update(X.u, sol.b, sol.d);
    } catch (const DegenerateError&) {
      trace.status = SolveStatus::Degenerate;
      break;
    }
  }
  return {std::move(X), std::move(trace)};
}

SymmetricFactoredMatrix pr_spectral_init(const Matrix& a_columns, const Vector& y) {
  const Index n = a_columns.cols();
  Matrix Y = kernels::rank_one_adjoint(a_columns, y) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Y);
  const Index last = Y.rows() - 1;
  const double lambda1 = eig.eigenvalues()(last);
  if (lambda1 <= 0.0) throw DegenerateError("pr_spectral_init: top eigenvalue not positive");
  Vector v = eig.eigenvectors().col(last);
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return {v, lambda1 / 3.0};
}

SymmetricFactoredMatrix pr_truncated_spectral_init(const Matrix& a_columns, const Vector& y) {
  return pr_spectral_init(a_columns, y);
}

Vector pr_objective_gradient(const Matrix& a_columns, const Vector& y, const Vector& x) {
  const Vector s = a_columns.transpose() * x;
  const Vector coef = (s.cwiseProduct(s) - y).cwiseProduct(s) / static_cast<double>(y.size());
  return a_columns * coef;
}

SymmetricFactoredMatrix pr_gd_init(const Matrix& a_columns, const Vector& y, int T0, double c1) {
  const Index p = a_columns.rows();
  const SymmetricFactoredMatrix spec = pr_spectral_init(a_columns, y);
  Vector x = std::sqrt(spec.lambda) * spec.u;
  const double eta = c1 / (std::log(static_cast<double>(p)) * x.squaredNorm());
  for (int t = 0; t < T0; ++t) x -= eta * pr_objective_gradient(a_columns, y, x);
  const double norm = x.norm();
  if (norm == 0.0) throw DegenerateError("pr_gd_init: iterate collapsed to zero");
  return {x / norm, norm * norm};
}

std::pair<FactoredMatrix, SolveTrace> mc_risro(const Vector& y_omega,
                                               const std::vector<std::pair<Index, Index>>& omega,
                                               Index p1, Index p2, Index r,
                                               const FactoredMatrix& init,
                                               const RisroOptions& opts,
                                               const std::optional<Matrix>& truth) {
  ProblemInstance prob;
  prob.op = SensingOperator::entry_sampling(p1, p2, omega);
  prob.y = y_omega;
  prob.rank = r;
  prob.truth = truth;
  return risro_solve(prob, init, opts);
}

Matrix rpca_truncate(const Matrix& A, const RpcaConfig& cfg) {
  require(cfg.gamma > 0.0 && cfg.gamma < 1.0, "rpca_truncate: gamma outside (0,1)");
  const Index p1 = A.rows(), p2 = A.cols();

  std::vector<std::vector<double>> row_vals(p1), col_vals(p2);
  auto visit = [&](Index i, Index j) {
    const double v = std::abs(A(i, j));
    row_vals[i].push_back(v);
    col_vals[j].push_back(v);
  };
  if (cfg.omega.empty()) {
    for (Index j = 0; j < p2; ++j)
      for (Index i = 0; i < p1; ++i) visit(i, j);
  } else {
    for (const auto& [i, j] : cfg.omega) visit(i, j);
  }

  // nearest-rank threshold: k-th largest with k = ceil((1-gamma) m), so
  // gamma -> 1 degenerates to the row/column maximum and nothing is cut
  auto threshold = [&](std::vector<double>& vals) {
    if (vals.empty()) return std::numeric_limits<double>::infinity();
    const auto m = static_cast<double>(vals.size());
    auto k = static_cast<std::size_t>(std::ceil((1.0 - cfg.gamma) * m));
    k = std::clamp<std::size_t>(k, 1, vals.size());
    std::nth_element(vals.begin(), vals.begin() + (k - 1), vals.end(), std::greater<>());
    return vals[k - 1];
  };
  std::vector<double> row_thresh(p1), col_thresh(p2);
  for (Index i = 0; i < p1; ++i) row_thresh[i] = threshold(row_vals[i]);
  for (Index j = 0; j < p2; ++j) col_thresh[j] = threshold(col_vals[j]);

  Matrix out = A;
  auto screen = [&](Index i, Index j) {
    const double v = std::abs(A(i, j));
    if (v > row_thresh[i] && v > col_thresh[j]) out(i, j) = 0.0;
  };
  if (cfg.omega.empty()) {
    for (Index j = 0; j < p2; ++j)
      for (Index i = 0; i < p1; ++i) screen(i, j);
  } else {
    for (const auto& [i, j] : cfg.omega) screen(i, j);
  }
  return out;
}

std::pair<FactoredMatrix, SolveTrace> rpca_risro(const Matrix& y_observed, const RpcaConfig& cfg,
                                                 const FactoredMatrix& init,
                                                 const RisroOptions& opts,
                                                 const std::optional<Matrix>& truth) {
  const Index p1 = y_observed.rows(), p2 = y_observed.cols();
  require(init.p1() == p1 && init.p2() == p2, "rpca_risro: shape mismatch");

  std::vector<std::pair<Index, Index>> observed = cfg.omega;
  if (observed.empty()) {
    observed.reserve(static_cast<std::size_t>(p1 * p2));
    for (Index j = 0; j < p2; ++j)
      for (Index i = 0; i < p1; ++i) observed.emplace_back(i, j);
  }
  const SensingOperator op_omega = SensingOperator::entry_sampling(p1, p2, observed);
  const Vector y_all = apply(op_omega, y_observed);

  const auto t_start = std::chrono::steady_clock::now();
  const double grad_scale =
      opts.tol_metric == TolMetric::GradNorm ? adjoint(op_omega, y_all).norm() : 0.0;
  const double truth_norm = truth ? truth->norm() : 0.0;

  FactoredMatrix X = init;
  SolveTrace trace;
  trace.status = SolveStatus::MaxIter;
  Matrix prev_dense;

  for (int t = 0;; ++t) {
    manifold::Frame F(X);
    const Matrix X_dense = X.value();
    const Vector res = apply(op_omega, X_dense) - y_all;

    IterationRecord rec;
    rec.iter = t;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    rec.objective = 0.5 * res.squaredNorm();
    rec.grad_norm = manifold::tangent_project(F, adjoint(op_omega, res)).frob_norm();
    rec.rel_rmse = truth ? (X_dense - *truth).norm() / truth_norm
                         : std::numeric_limits<double>::quiet_NaN();
    rec.dist_to_final = t == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : (X_dense - prev_dense).norm() / prev_dense.norm();
    trace.records.push_back(rec);

    const double metric = metric_of(opts.tol_metric, rec, grad_scale);
    if (std::isfinite(metric) && metric <= opts.tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    if (t >= opts.max_iter) {
      trace.status = SolveStatus::MaxIter;
      break;
    }

    // Phi_t: observed entries the screen keeps in the current residual
    const Matrix screened = rpca_truncate(y_observed - X_dense, cfg);
    std::vector<std::pair<Index, Index>> phi;
    phi.reserve(observed.size());
    for (const auto& [i, j] : observed)
      if (screened(i, j) != 0.0) phi.emplace_back(i, j);
    if (phi.empty()) {
      trace.status = SolveStatus::Degenerate;
      break;
    }

    ProblemInstance sub;
    sub.op = SensingOperator::entry_sampling(p1, p2, phi);
    sub.y = apply(sub.op, y_observed);
    sub.rank = X.rank();

    manifold::SketchBlocks blocks;
    if (opts.ls_backend == LsBackend::DenseQR) {
      const SketchDesign design = build_sketch_design(sub.op, X, F);
      ReducedLsSolution ls = solve_reduced_ls(design, sub.y);
      trace.records.back().ls_rank_deficient = ls.rank_deficient;
      blocks = std::move(ls.blocks);
    } else {
      manifold::GaussNewtonResult gn =
          manifold::gauss_newton_cg(sub, X, F, opts.cg_tol, opts.max_cg_iters);
      if (gn.degenerate) {
        trace.status = SolveStatus::Degenerate;
        break;
      }
      blocks = manifold::SketchBlocks{X.C + gn.eta.Zb, gn.eta.Zd1, gn.eta.Zd2};
    }

    manifold::RetractResult rr = manifold::orthographic_retract(X, F, blocks, opts.pinv_threshold);
    if (rr.rank_deficient) {
      trace.status = SolveStatus::Degenerate;
      break;
    }
    prev_dense = X_dense;
    X = std::move(rr.X);
  }
  return {std::move(X), std::move(trace)};
}

}  // namespace risro::apps
