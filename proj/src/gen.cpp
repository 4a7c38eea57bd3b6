#include "risro/gen.hpp"

#include <cmath>

namespace risro::gen {

Vector kappa_spectrum(Index r, double kappa) {
  require(r >= 1 && kappa >= 1.0, "kappa_spectrum: need r >= 1 and kappa >= 1");
  Vector s(r);
  s(0) = 3.0;
  for (Index i = 1; i < r; ++i)
    s(i) = 3.0 * std::pow(kappa, -static_cast<double>(i + 1) / static_cast<double>(r));
  return s;
}

Matrix random_low_rank(Rng& rng, Index p1, Index p2, Index r, double kappa) {
  const Matrix U = rng.haar_orthonormal(p1, r);
  const Matrix V = rng.haar_orthonormal(p2, r);
  return U * kappa_spectrum(r, kappa).asDiagonal() * V.transpose();
}

std::pair<ProblemInstance, Matrix> gen_trace_regression(const TraceRegressionConfig& cfg) {
  require(cfg.r <= std::min(cfg.p1, cfg.p2), "gen_trace_regression: rank too large");
  require(cfg.sigma >= 0.0, "gen_trace_regression: negative sigma");
  Rng rng(cfg.seed);
  const Matrix x_star = random_low_rank(rng, cfg.p1, cfg.p2, cfg.r, cfg.kappa);
  RowMatrix stacked(cfg.n, cfg.p1 * cfg.p2);
  for (Index i = 0; i < cfg.n; ++i)
    for (Index e = 0; e < stacked.cols(); ++e) stacked(i, e) = rng.normal();
  ProblemInstance prob;
  prob.op = SensingOperator::dense_stacked(std::move(stacked), cfg.p1, cfg.p2);
  prob.rank = cfg.r;
  prob.y = apply(prob.op, x_star);
  if (cfg.sigma > 0.0)
    for (Index i = 0; i < cfg.n; ++i) prob.y(i) += cfg.sigma * rng.normal();
  prob.truth = x_star;
  return {std::move(prob), x_star};
}

PhaseRetrievalData gen_phase_retrieval(const PhaseRetrievalConfig& cfg) {
  require(cfg.p >= 2 && cfg.n >= 1, "gen_phase_retrieval: bad dims");
  Rng rng(cfg.seed);
  PhaseRetrievalData out;
  out.x_star = rng.gaussian_vector(cfg.p);
  out.x_star /= out.x_star.norm();
  out.a_columns = rng.gaussian(cfg.p, cfg.n);
  out.y.resize(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) {
    const double s = out.a_columns.col(i).dot(out.x_star);
    out.y(i) = s * s;
  }
  return out;
}

CompletionData gen_completion(const McConfig& cfg) {
  require(cfg.r <= std::min(cfg.p1, cfg.p2), "gen_completion: rank too large");
  Rng rng(cfg.seed);
  CompletionData out;
  out.x_star = random_low_rank(rng, cfg.p1, cfg.p2, cfg.r, cfg.kappa);
  const Index n = cfg.n_observed > 0 ? cfg.n_observed : 8 * cfg.p1 * cfg.r;
  require(n <= cfg.p1 * cfg.p2, "gen_completion: more samples than entries");
  const auto flat = rng.sample_without_replacement(
      static_cast<std::uint64_t>(cfg.p1 * cfg.p2), static_cast<std::uint64_t>(n));
  out.omega.reserve(flat.size());
  out.y.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index i = static_cast<Index>(flat[k]) % cfg.p1;
    const Index j = static_cast<Index>(flat[k]) / cfg.p1;
    out.omega.emplace_back(i, j);
    out.y(k) = out.x_star(i, j);
  }
  return out;
}

RpcaData gen_rpca(const RpcaConfigGen& cfg) {
  require(cfg.q > 0.0 && cfg.q < 1.0, "gen_rpca: q outside (0,1)");
  Rng rng(cfg.seed);
  RpcaData out;
  out.x_star = random_low_rank(rng, cfg.p1, cfg.p2, cfg.r, cfg.kappa);
  out.s_star = Matrix::Zero(cfg.p1, cfg.p2);
  for (Index j = 0; j < cfg.p2; ++j)
    for (Index i = 0; i < cfg.p1; ++i)
      if (rng.uniform() < cfg.q) out.s_star(i, j) = cfg.spike_sigma * rng.normal();
  out.y = out.x_star + out.s_star;
  return out;
}

}  // namespace risro::gen
