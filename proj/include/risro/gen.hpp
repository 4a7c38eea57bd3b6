#pragma once

#include "risro/core.hpp"

namespace risro::gen {

struct TraceRegressionConfig {
  Index p1 = 100, p2 = 100, r = 3;
  Index n = 1500;
  double kappa = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct PhaseRetrievalConfig {
  Index p = 100;
  Index n = 1000;
  std::uint64_t seed = 0;
};

struct McConfig {
  Index p1 = 100, p2 = 100, r = 3;
  double kappa = 1.0;
  Index n_observed = 0;  // 0: default 8 * p1 * r
  std::uint64_t seed = 0;
};

struct RpcaConfigGen {
  Index p1 = 100, p2 = 100, r = 3;
  double kappa = 1.0;
  double q = 0.02;          // corruption probability per entry
  double spike_sigma = 10;  // spikes ~ N(0, spike_sigma^2)
  double gamma = 0.3;       // truncation fraction handed to the solver
  std::uint64_t seed = 0;
};

/// Signal spectrum: sigma_1 = 3, sigma_i = 3 * kappa^(-i/r) for i >= 2.
Vector kappa_spectrum(Index r, double kappa);

/// Random rank-r matrix with Haar-ish factors and the kappa spectrum.
Matrix random_low_rank(Rng& rng, Index p1, Index p2, Index r, double kappa);

/// y_i = <A_i, X*> + eps_i with standard normal A_i entries.
std::pair<ProblemInstance, Matrix> gen_trace_regression(const TraceRegressionConfig& cfg);

struct PhaseRetrievalData {
  Matrix a_columns;  // p x n
  Vector y;
  Vector x_star;  // unit norm
};
PhaseRetrievalData gen_phase_retrieval(const PhaseRetrievalConfig& cfg);

struct CompletionData {
  Vector y;  // observed entries, in omega order
  std::vector<std::pair<Index, Index>> omega;
  Matrix x_star;
};
CompletionData gen_completion(const McConfig& cfg);

struct RpcaData {
  Matrix y;       // X* + S*, fully observed
  Matrix s_star;  // sparse corruption
  Matrix x_star;
};
RpcaData gen_rpca(const RpcaConfigGen& cfg);

}  // namespace risro::gen
