#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "risro/baselines.hpp"
#include "test_util.hpp"

using namespace risro;

namespace {

ProblemInstance noiseless_dense(Rng& rng, Index p, Index r, Index n, double kappa = 1.0) {
  ProblemInstance prob;
  prob.op = testutil::random_dense_op(rng, p, p, n);
  prob.rank = r;
  const Matrix target = gen::random_low_rank(rng, p, p, r, kappa);
  prob.y = apply(prob.op, target);
  prob.truth = target;
  return prob;
}

int iters_to(const SolveTrace& trace, double level) {
  for (const auto& rec : trace.records)
    if (rec.rel_rmse <= level) return rec.iter;
  return trace.records.back().iter + 1;  // censored
}

}  // namespace

TEST_CASE("svp with zero step is stationary") {
  Rng rng(71);
  ProblemInstance prob = noiseless_dense(rng, 10, 2, 120);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  baselines::BaselineOptions opts;
  opts.step_grid = {0.0};
  opts.max_iter = 4;
  auto [X, trace] = baselines::svp_solve(prob, init, opts);
  for (const auto& rec : trace.records)
    CHECK(rec.rel_rmse == doctest::Approx(trace.records[0].rel_rmse).epsilon(1e-12));
}

TEST_CASE("one svp step decreases the objective for a small step size") {
  Rng rng(72);
  ProblemInstance prob = noiseless_dense(rng, 12, 2, 160);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  baselines::BaselineOptions opts;
  opts.step_grid = {1e-4};
  opts.max_iter = 1;
  auto [X, trace] = baselines::svp_solve(prob, init, opts);
  REQUIRE(trace.records.size() >= 2);
  CHECK(trace.records[1].objective < trace.records[0].objective);
}

TEST_CASE("svp needs more iterations than risro on noiseless data") {
  Rng rng(73);
  ProblemInstance prob = noiseless_dense(rng, 30, 2, 500);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);

  RisroOptions ropts;
  ropts.tol_metric = TolMetric::RelRmse;
  const SolveTrace risro_trace = risro_solve(prob, init, ropts).second;

  baselines::BaselineOptions bopts;
  bopts.tol_metric = TolMetric::RelRmse;
  const SolveTrace svp_trace = baselines::svp_solve(prob, init, bopts).second;

  CHECK(iters_to(risro_trace, 1e-10) < iters_to(svp_trace, 1e-10));
}

TEST_CASE("altmin fits exactly when a frame is exact") {
  Rng rng(74);
  const Index p = 10, r = 2, n = 150;
  ProblemInstance prob;
  prob.op = testutil::random_dense_op(rng, p, p, n);
  prob.rank = r;
  const Matrix U = rng.haar_orthonormal(p, r);
  const Matrix M = rng.gaussian(r, p);
  const Matrix target = U * M;  // column span exactly U
  prob.y = apply(prob.op, target);
  prob.truth = target;

  FactoredMatrix init;
  init.U = U;
  init.V = rng.haar_orthonormal(p, r);
  init.C = Matrix::Identity(r, r);
  baselines::BaselineOptions opts;
  opts.max_iter = 1;  // a single sweep resolves both factors
  opts.tol_metric = TolMetric::RelRmse;
  auto [X, trace] = baselines::altmin_solve(prob, init, opts);
  CHECK((X.value() - target).norm() <= 1e-9 * target.norm());
}

TEST_CASE("altmin converges linearly but slower than risro") {
  Rng rng(75);
  ProblemInstance prob = noiseless_dense(rng, 30, 2, 500);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  baselines::BaselineOptions opts;
  opts.tol_metric = TolMetric::RelRmse;
  opts.max_iter = 120;
  auto [X, trace] = baselines::altmin_solve(prob, init, opts);
  CHECK(trace.records.back().rel_rmse <= 1e-10);

  RisroOptions ropts;
  ropts.tol_metric = TolMetric::RelRmse;
  const SolveTrace risro_trace = risro_solve(prob, init, ropts).second;
  CHECK(iters_to(risro_trace, 1e-10) < iters_to(trace, 1e-10));

  // after the warm-up sweep the error sits strictly above risro's
  for (std::size_t k = 2; k < std::min(trace.records.size(), risro_trace.records.size()); ++k)
    CHECK(trace.records[k].rel_rmse > risro_trace.records[k].rel_rmse);
}

TEST_CASE("factored gd gradients match finite differences") {
  Rng rng(76);
  const Index p = 8, r = 2, n = 80;
  ProblemInstance prob;
  prob.op = testutil::random_dense_op(rng, p, p, n);
  prob.rank = r;
  prob.y = rng.gaussian_vector(n);

  const Matrix R = rng.gaussian(p, r), L = rng.gaussian(p, r);
  const double inv_n = 1.0 / double(n);
  auto g = [&](const Matrix& Rm, const Matrix& Lm) {
    return 0.5 * inv_n * (prob.y - apply(prob.op, Matrix(Rm * Lm.transpose()))).squaredNorm();
  };
  const Matrix W = inv_n * adjoint(prob.op, apply(prob.op, Matrix(R * L.transpose())) - prob.y);
  const Matrix grad_r = W * L, grad_l = W.transpose() * R;

  const double h = 1e-6;
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix dR = rng.gaussian(p, r), dL = rng.gaussian(p, r);
    const double fd_r = (g(R + h * dR, L) - g(R - h * dR, L)) / (2 * h);
    const double fd_l = (g(R, L + h * dL) - g(R, L - h * dL)) / (2 * h);
    CHECK(std::abs(grad_r.cwiseProduct(dR).sum() - fd_r) <= 1e-5 * std::max(1.0, std::abs(fd_r)));
    CHECK(std::abs(grad_l.cwiseProduct(dL).sum() - fd_l) <= 1e-5 * std::max(1.0, std::abs(fd_l)));
  }
}

TEST_CASE("gd from a rank-deficient init stays finite") {
  Rng rng(77);
  ProblemInstance prob = noiseless_dense(rng, 8, 2, 100);
  FactoredMatrix init;
  init.U = rng.haar_orthonormal(8, 2);
  init.V = rng.haar_orthonormal(8, 2);
  init.C = Matrix::Zero(2, 2);  // saddle: both factor gradients vanish
  baselines::BaselineOptions opts;
  opts.step_grid = {1e-2};
  opts.max_iter = 10;
  auto [X, trace] = baselines::factored_gd_solve(prob, init, opts);
  for (const auto& rec : trace.records) CHECK(std::isfinite(rec.objective));
}

TEST_CASE("gd slows down on ill-conditioned signals") {
  Rng rng(78);
  baselines::BaselineOptions opts;
  opts.step_grid = {2e-1, 1e-1};
  opts.max_iter = 250;
  opts.tol_metric = TolMetric::RelRmse;

  int iters[2] = {0, 0};
  int idx = 0;
  for (double kappa : {1.0, 500.0}) {
    Rng local(79);
    ProblemInstance prob = noiseless_dense(local, 24, 2, 400, kappa);
    const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
    auto [X, trace] = baselines::factored_gd_solve(prob, init, opts);
    iters[idx++] = iters_to(trace, 1e-8);
  }
  CHECK(iters[1] >= 2 * iters[0]);
}

TEST_CASE("divergent step sizes are excluded by the best-of-grid rule") {
  Rng rng(80);
  ProblemInstance prob = noiseless_dense(rng, 10, 2, 120);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  baselines::BaselineOptions opts;
  opts.step_grid = {10.0, 5e-3};  // the huge step diverges, the sane one wins
  opts.max_iter = 80;
  opts.tol_metric = TolMetric::RelRmse;
  auto [X, trace] = baselines::svp_solve(prob, init, opts);
  CHECK(trace.status != SolveStatus::Degenerate);
  CHECK(trace.records.back().rel_rmse <= 1e-5);
}

TEST_CASE("spectral init: exact on the full basis design, basin entry on gaussian data") {
  Rng rng(81);
  // complete entry basis with unit weights: A*(y) is the signal itself
  std::vector<Matrix> basis;
  const Index p1 = 5, p2 = 4;
  for (Index j = 0; j < p2; ++j)
    for (Index i = 0; i < p1; ++i) {
      Matrix E = Matrix::Zero(p1, p2);
      E(i, j) = 1.0;
      basis.push_back(E);
    }
  ProblemInstance prob;
  prob.op = SensingOperator::dense(basis);
  prob.rank = 2;
  const Matrix target = gen::random_low_rank(rng, p1, p2, 2, 1.0);
  prob.y = apply(prob.op, target);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  CHECK((init.value() - target).norm() <= 1e-10 * target.norm());

  // gaussian design: the init lands inside the basin sigma_r-wise
  ProblemInstance gauss = noiseless_dense(rng, 40, 2, 600);
  const FactoredMatrix X0 = baselines::spectral_init_trace_regression(gauss.op, gauss.y, 2);
  const double sigma_r = 3.0;  // kappa = 1 schedule
  CHECK((X0.value() - *gauss.truth).norm() / sigma_r < 1.0);

  // zero data yields the degenerate zero core
  const FactoredMatrix zero =
      baselines::spectral_init_trace_regression(gauss.op, Vector::Zero(gauss.op.n()), 2);
  CHECK(zero.C.norm() == 0.0);
}

TEST_CASE("gd also needs more iterations than risro on the noiseless benchmark") {
  Rng rng(82);
  ProblemInstance prob = noiseless_dense(rng, 24, 2, 400);
  const FactoredMatrix init = baselines::spectral_init_trace_regression(prob.op, prob.y, 2);
  RisroOptions ropts;
  ropts.tol_metric = TolMetric::RelRmse;
  const int risro_iters = iters_to(risro_solve(prob, init, ropts).second, 1e-10);

  baselines::BaselineOptions opts;
  opts.step_grid = {2e-1, 1e-1};
  opts.max_iter = 250;
  opts.tol_metric = TolMetric::RelRmse;
  const int gd_iters = iters_to(baselines::factored_gd_solve(prob, init, opts).second, 1e-10);
  CHECK(risro_iters < gd_iters);
}
