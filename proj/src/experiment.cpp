#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "risro/apps.hpp"
#include "risro/baselines.hpp"
#include "risro/bench.hpp"
#include "risro/gen.hpp"
#include "risro/solver.hpp"

namespace risro::bench {

namespace {

namespace fs = std::filesystem;

TolMetric parse_metric(const std::string& s) {
  if (s == "rel-rmse") return TolMetric::RelRmse;
  if (s == "rel-change") return TolMetric::DistToFinalProxy;
  if (s == "grad-norm") return TolMetric::GradNorm;
  throw std::invalid_argument("unknown tol metric: " + s);
}

LsBackend parse_backend(const std::string& s) {
  if (s == "dense-qr") return LsBackend::DenseQR;
  if (s == "intrinsic-cg") return LsBackend::IntrinsicCG;
  throw std::invalid_argument("unknown ls backend: " + s);
}

TraceCsv trace_table(const SolveTrace& trace, const std::vector<double>* exact_dist,
                     bool no_wall_time) {
  TraceCsv t;
  t.columns = {"iter", "time_s", "objective", "rel_rmse", "dist_to_final", "grad_norm"};
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    const double dist =
        exact_dist && k < exact_dist->size() ? (*exact_dist)[k] : r.dist_to_final;
    t.rows.push_back({static_cast<double>(r.iter), no_wall_time ? 0.0 : r.wall_time_s,
                      r.objective, r.rel_rmse, dist, r.grad_norm});
  }
  return t;
}

struct AlgoRun {
  SolveTrace trace;
  std::vector<double> exact_dist;  // empty for baselines (proxy column retained)
  double final_rel_rmse = std::numeric_limits<double>::quiet_NaN();
};

AlgoRun run_algo(const std::string& algo, const ProblemInstance& prob,
                 const FactoredMatrix& init, const ExperimentSpec& spec) {
  AlgoRun out;
  if (algo == "risro") {
    RisroOptions opts;
    opts.max_iter = spec.max_iter;
    opts.tol = spec.tol;
    opts.tol_metric = parse_metric(spec.tol_metric);
    opts.ls_backend = parse_backend(spec.ls_backend);
    std::vector<Matrix> iterates;
    opts.on_iterate = [&iterates](int, const FactoredMatrix& X) {
      iterates.push_back(X.value());
    };
    auto [X, trace] = risro_solve(prob, init, opts);
    out.trace = std::move(trace);
    // the exact dist-to-final metric, recomputed from the stored iterates
    if (!iterates.empty()) {
      const Matrix& final = iterates.back();
      const double fn = final.norm();
      out.exact_dist.reserve(iterates.size());
      for (const auto& Xt : iterates) out.exact_dist.push_back((Xt - final).norm() / fn);
    }
  } else {
    baselines::BaselineOptions opts;
    if (!spec.step_grid.empty()) opts.step_grid = spec.step_grid;
    opts.max_iter = spec.max_iter;
    opts.tol = spec.tol;
    opts.tol_metric = parse_metric(spec.tol_metric);
    if (algo == "svp") {
      out.trace = baselines::svp_solve(prob, init, opts).second;
    } else if (algo == "altmin") {
      out.trace = baselines::altmin_solve(prob, init, opts).second;
    } else if (algo == "gd") {
      out.trace = baselines::factored_gd_solve(prob, init, opts).second;
    } else {
      throw std::invalid_argument("unknown algorithm: " + algo);
    }
  }
  if (!out.trace.records.empty()) out.final_rel_rmse = out.trace.records.back().rel_rmse;
  return out;
}

std::string trial_path(const ExperimentSpec& spec, const std::string& algo, int trial) {
  return (fs::path(spec.out_dir) /
          (spec.experiment + "_" + algo + "_trial" + std::to_string(trial) + ".csv"))
      .string();
}

void write_aggregate_and_plots(const ExperimentSpec& spec,
                               const std::map<std::string, std::vector<TraceCsv>>& per_algo) {
  std::vector<SvgSeries> series;
  for (const auto& [algo, tables] : per_algo) {
    const TraceCsv mean = aggregate_mean(tables);
    write_csv(
        (fs::path(spec.out_dir) / (spec.experiment + "_" + algo + "_mean.csv")).string(), mean);
    SvgSeries s;
    s.label = algo;
    for (const auto& row : mean.rows) s.points.emplace_back(row[0], row[3]);
    series.push_back(std::move(s));
  }
  if (spec.plot)
    write_svg_chart((fs::path(spec.out_dir) / (spec.experiment + "_rel_rmse.svg")).string(),
                    spec.experiment, "iteration", "relative RMSE", series, true);
}

int run_solver_experiment(const ExperimentSpec& spec) {
  const int cap = trial_thread_cap(spec.trials);
  std::vector<std::map<std::string, TraceCsv>> results(spec.trials);
  std::vector<std::string> errors(spec.trials);

#pragma omp parallel for num_threads(cap) schedule(dynamic)
  for (int trial = 0; trial < spec.trials; ++trial) {
    try {
      const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(trial);
      ProblemInstance prob;
      FactoredMatrix init;
      bool is_pr = false, is_rpca = false;
      gen::RpcaConfigGen rpca_cfg;
      gen::PhaseRetrievalData pr;

      if (spec.experiment == "trace-regression") {
        gen::TraceRegressionConfig cfg;
        cfg.p1 = spec.p1;
        cfg.p2 = spec.p2;
        cfg.r = spec.r;
        cfg.n = spec.n;
        cfg.kappa = spec.kappa;
        cfg.sigma = spec.sigma;
        cfg.seed = seed;
        prob = gen::gen_trace_regression(cfg).first;
        init = baselines::spectral_init_trace_regression(prob.op, prob.y, prob.rank);
      } else if (spec.experiment == "matrix-completion") {
        gen::McConfig cfg;
        cfg.p1 = spec.p1;
        cfg.p2 = spec.p2;
        cfg.r = spec.r;
        cfg.kappa = spec.kappa;
        cfg.n_observed = spec.n;
        cfg.seed = seed;
        gen::CompletionData data = gen::gen_completion(cfg);
        prob.op = SensingOperator::entry_sampling(spec.p1, spec.p2, data.omega);
        prob.y = data.y;
        prob.rank = spec.r;
        prob.truth = data.x_star;
        init = baselines::spectral_init_trace_regression(prob.op, prob.y, prob.rank);
      } else if (spec.experiment == "phase-retrieval") {
        is_pr = true;
        gen::PhaseRetrievalConfig cfg;
        cfg.p = spec.p1;
        cfg.n = spec.n;
        cfg.seed = seed;
        pr = gen::gen_phase_retrieval(cfg);
      } else if (spec.experiment == "rpca") {
        is_rpca = true;
        rpca_cfg.p1 = spec.p1;
        rpca_cfg.p2 = spec.p2;
        rpca_cfg.r = spec.r;
        rpca_cfg.kappa = spec.kappa;
        rpca_cfg.q = spec.q;
        rpca_cfg.gamma = spec.gamma;
        rpca_cfg.seed = seed;
      }

      for (const auto& algo : spec.algos) {
        AlgoRun run;
        if (is_pr) {
          apps::PrOptions opts;
          opts.max_iter = spec.max_iter;
          opts.tol = spec.tol;
          opts.tol_metric = parse_metric(spec.tol_metric);
          auto [X, trace] =
              apps::pr_risro(pr.a_columns, pr.y, apps::pr_spectral_init(pr.a_columns, pr.y),
                             opts, &pr.x_star);
          run.trace = std::move(trace);
        } else if (is_rpca) {
          gen::RpcaData data = gen::gen_rpca(rpca_cfg);
          apps::RpcaConfig cfg;
          cfg.gamma = spec.gamma;
          cfg.rank = spec.r;
          RisroOptions opts;
          opts.max_iter = spec.max_iter;
          opts.tol = spec.tol;
          opts.tol_metric = parse_metric(spec.tol_metric);
          opts.ls_backend = parse_backend(spec.ls_backend);
          const FactoredMatrix X0 = best_rank_r(apps::rpca_truncate(data.y, cfg), spec.r);
          auto [X, trace] = apps::rpca_risro(data.y, cfg, X0, opts, data.x_star);
          run.trace = std::move(trace);
        } else {
          run = run_algo(algo, prob, init, spec);
        }
        TraceCsv table = trace_table(
            run.trace, run.exact_dist.empty() ? nullptr : &run.exact_dist, spec.no_wall_time);
        write_csv(trial_path(spec, algo, trial), table);
        results[trial][algo] = std::move(table);
      }
    } catch (const std::exception& e) {
      errors[trial] = e.what();
    }
  }

  for (const auto& e : errors)
    if (!e.empty()) throw std::invalid_argument("trial failed: " + e);

  std::map<std::string, std::vector<TraceCsv>> per_algo;
  for (auto& trial_result : results)
    for (auto& [algo, table] : trial_result) per_algo[algo].push_back(std::move(table));
  write_aggregate_and_plots(spec, per_algo);
  return kExitOk;
}

int run_success_rate(const ExperimentSpec& spec) {
  Index start = 0, stop = 0, step = 0;
  if (std::sscanf(spec.n_grid.c_str(), "%td:%td:%td", &start, &stop, &step) != 3 || step <= 0 ||
      start <= 0 || stop < start)
    throw std::invalid_argument("success-rate needs --n-grid start:stop:step");

  std::vector<Index> grid;
  for (Index n = start; n <= stop; n += step) grid.push_back(n);

  TraceCsv out;
  out.columns = {"n"};
  for (const auto& a : spec.algos) out.columns.push_back(a);

  const int total = static_cast<int>(grid.size()) * spec.trials;
  std::vector<std::map<std::string, bool>> success(total);
  std::vector<std::string> errors(total);
  const int cap = trial_thread_cap(total);

#pragma omp parallel for num_threads(cap) schedule(dynamic)
  for (int g = 0; g < total; ++g) {
    try {
      const int point = g / spec.trials;
      gen::TraceRegressionConfig cfg;
      cfg.p1 = spec.p1;
      cfg.p2 = spec.p2;
      cfg.r = spec.r;
      cfg.n = grid[point];
      cfg.kappa = spec.kappa;
      cfg.sigma = spec.sigma;
      cfg.seed = spec.seed + static_cast<std::uint64_t>(g);
      ProblemInstance prob = gen::gen_trace_regression(cfg).first;
      const FactoredMatrix init =
          baselines::spectral_init_trace_regression(prob.op, prob.y, prob.rank);
      for (const auto& algo : spec.algos) {
        const AlgoRun run = run_algo(algo, prob, init, spec);
        success[g][algo] = run.final_rel_rmse < 1e-2;  // recovery rule
      }
    } catch (const std::exception& e) {
      errors[g] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::invalid_argument("success-rate trial failed: " + e);

  std::vector<SvgSeries> series(spec.algos.size());
  for (std::size_t a = 0; a < spec.algos.size(); ++a) series[a].label = spec.algos[a];
  for (std::size_t point = 0; point < grid.size(); ++point) {
    std::vector<double> row{static_cast<double>(grid[point])};
    for (std::size_t a = 0; a < spec.algos.size(); ++a) {
      int ok = 0;
      for (int t = 0; t < spec.trials; ++t)
        if (success[point * spec.trials + t].at(spec.algos[a])) ++ok;
      const double frac = static_cast<double>(ok) / spec.trials;
      row.push_back(frac);
      series[a].points.emplace_back(static_cast<double>(grid[point]), frac);
    }
    out.rows.push_back(std::move(row));
  }
  write_csv((fs::path(spec.out_dir) / "success_rate.csv").string(), out);
  if (spec.plot)
    write_svg_chart((fs::path(spec.out_dir) / "success_rate.svg").string(),
                    "successful recovery rate", "n", "success fraction", series, false);
  return kExitOk;
}

int run_rip_diagnostic(const ExperimentSpec& spec) {
  Rng rng(spec.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n));
  RowMatrix stacked(spec.n, spec.p1 * spec.p2);
  for (Index i = 0; i < spec.n; ++i)
    for (Index e = 0; e < stacked.cols(); ++e) stacked(i, e) = scale * rng.normal();
  const SensingOperator op = SensingOperator::dense_stacked(std::move(stacked), spec.p1, spec.p2);

  const Index kmax = std::min<Index>(3 * spec.r, std::min(spec.p1, spec.p2));
  TraceCsv out;
  out.columns = {"rank", "num_samples", "empirical_lower", "empirical_upper"};
  std::vector<SvgSeries> series(2);
  series[0].label = "lower";
  series[1].label = "upper";
  for (Index k = 1; k <= kmax; ++k) {
    const RipEstimate est =
        estimate_rip_spectrum(op, k, spec.rip_samples, spec.seed + static_cast<std::uint64_t>(k));
    out.rows.push_back({static_cast<double>(k), static_cast<double>(est.num_samples),
                        est.empirical_lower, est.empirical_upper});
    series[0].points.emplace_back(static_cast<double>(k), est.empirical_lower);
    series[1].points.emplace_back(static_cast<double>(k), est.empirical_upper);
  }
  write_csv((fs::path(spec.out_dir) / "rip_diagnostic.csv").string(), out);
  if (spec.plot)
    write_svg_chart((fs::path(spec.out_dir) / "rip_diagnostic.svg").string(),
                    "sampled restricted-isometry spectrum", "rank", "||A(Z)||^2", series, false);
  return kExitOk;
}

}  // namespace

int trial_thread_cap(int trials) {
  int cap = omp_get_max_threads();
  if (const char* env = std::getenv("RISRO_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) cap = parsed;
  }
  return std::max(1, std::min(cap, trials));
}

int run_experiment(const ExperimentSpec& spec) {
  static const std::set<std::string> kExperiments{
      "trace-regression", "phase-retrieval", "matrix-completion",
      "rpca",             "success-rate",    "rip-diagnostic"};
  static const std::set<std::string> kAlgos{"risro", "svp", "altmin", "gd"};

  try {
    if (!kExperiments.count(spec.experiment))
      throw std::invalid_argument("unknown experiment: " + spec.experiment);
    if (spec.algos.empty()) throw std::invalid_argument("need at least one algorithm");
    for (const auto& a : spec.algos)
      if (!kAlgos.count(a)) throw std::invalid_argument("unknown algorithm: " + a);
    if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (spec.r < 1 || spec.r > std::min(spec.p1, spec.p2))
      throw std::invalid_argument("invalid rank");
    const bool risro_only = spec.experiment == "phase-retrieval" ||
                            spec.experiment == "matrix-completion" || spec.experiment == "rpca";
    if (risro_only && (spec.algos.size() != 1 || spec.algos[0] != "risro"))
      throw std::invalid_argument(spec.experiment + " supports only --algos risro");
    parse_metric(spec.tol_metric);
    parse_backend(spec.ls_backend);

    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    if (ec || !fs::is_directory(spec.out_dir)) {
      std::fprintf(stderr, "error: cannot create output directory %s\n", spec.out_dir.c_str());
      return kExitIo;
    }

    if (spec.experiment == "success-rate") return run_success_rate(spec);
    if (spec.experiment == "rip-diagnostic") return run_rip_diagnostic(spec);
    return run_solver_experiment(spec);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}

}  // namespace risro::bench
