// Benchmark harness: run experiments, persist instances, replay them, plot.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risro/baselines.hpp"
#include "risro/bench.hpp"
#include "risro/gen.hpp"

namespace {

using risro::bench::ExperimentSpec;

void add_spec_flags(CLI::App* cmd, ExperimentSpec& spec) {
  cmd->set_config("--config", "", "key = value config file; flags override");
  cmd->add_option("--experiment", spec.experiment,
                  "trace-regression | phase-retrieval | matrix-completion | rpca | "
                  "success-rate | rip-diagnostic");
  cmd->add_option("--algos", spec.algos, "subset of risro,svp,altmin,gd")->delimiter(',');
  cmd->add_option("--p", spec.p1, "square dimension (sets p1 = p2)")
      ->each([&spec](const std::string& v) { spec.p2 = std::stoll(v); });
  cmd->add_option("--p1", spec.p1);
  cmd->add_option("--p2", spec.p2);
  cmd->add_option("--r", spec.r, "target rank");
  cmd->add_option("--n", spec.n, "number of measurements / observed entries");
  cmd->add_option("--kappa", spec.kappa, "condition number of the signal");
  cmd->add_option("--sigma", spec.sigma, "noise level");
  cmd->add_option("--q", spec.q, "rpca corruption probability");
  cmd->add_option("--gamma", spec.gamma, "rpca truncation fraction");
  cmd->add_option("--trials", spec.trials);
  cmd->add_option("--seed", spec.seed);
  cmd->add_option("--max-iter", spec.max_iter);
  cmd->add_option("--tol", spec.tol);
  cmd->add_option("--tol-metric", spec.tol_metric, "rel-rmse | rel-change | grad-norm");
  cmd->add_option("--ls-backend", spec.ls_backend, "dense-qr | intrinsic-cg");
  cmd->add_option("--steps", spec.step_grid, "baseline step-size grid")->delimiter(',');
  cmd->add_option("--n-grid", spec.n_grid, "success-rate grid start:stop:step");
  cmd->add_option("--rip-samples", spec.rip_samples);
  cmd->add_option("--out", spec.out_dir, "output directory");
  cmd->add_flag("--plot", spec.plot, "also emit SVG charts");
  cmd->add_flag("--no-wall-time", spec.no_wall_time,
                "write time_s as 0 for byte-reproducible CSVs");
}

int do_dump(const ExperimentSpec& spec, const std::string& path) {
  using namespace risro;
  try {
    ProblemInstance prob;
    if (spec.experiment == "trace-regression") {
      gen::TraceRegressionConfig cfg;
      cfg.p1 = spec.p1;
      cfg.p2 = spec.p2;
      cfg.r = spec.r;
      cfg.n = spec.n;
      cfg.kappa = spec.kappa;
      cfg.sigma = spec.sigma;
      cfg.seed = spec.seed;
      prob = gen::gen_trace_regression(cfg).first;
    } else if (spec.experiment == "matrix-completion") {
      gen::McConfig cfg;
      cfg.p1 = spec.p1;
      cfg.p2 = spec.p2;
      cfg.r = spec.r;
      cfg.kappa = spec.kappa;
      cfg.n_observed = spec.n;
      cfg.seed = spec.seed;
      gen::CompletionData data = gen::gen_completion(cfg);
      prob.op = SensingOperator::entry_sampling(spec.p1, spec.p2, data.omega);
      prob.y = data.y;
      prob.rank = spec.r;
      prob.truth = data.x_star;
    } else if (spec.experiment == "phase-retrieval") {
      gen::PhaseRetrievalConfig cfg;
      cfg.p = spec.p1;
      cfg.n = spec.n;
      cfg.seed = spec.seed;
      gen::PhaseRetrievalData data = gen::gen_phase_retrieval(cfg);
      prob.op = SensingOperator::rank_one(data.a_columns);
      prob.y = data.y;
      prob.rank = 1;
      prob.truth = Matrix(data.x_star * data.x_star.transpose());
    } else {
      std::fprintf(stderr, "error: dump supports trace-regression, matrix-completion, "
                           "phase-retrieval\n");
      return bench::kExitUsage;
    }
    bench::dump_instance(prob, path);
    return bench::kExitOk;
  } catch (const bench::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bench::kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bench::kExitUsage;
  }
}

int do_replay(const ExperimentSpec& spec, const std::string& path) {
  using namespace risro;
  try {
    ProblemInstance prob = bench::load_instance(path);
    ExperimentSpec run_spec = spec;
    run_spec.experiment = "trace-regression";  // schema of the output files
    std::error_code ec;
    std::filesystem::create_directories(run_spec.out_dir, ec);
    if (ec) {
      std::fprintf(stderr, "error: cannot create %s\n", run_spec.out_dir.c_str());
      return bench::kExitIo;
    }

    const FactoredMatrix init =
        baselines::spectral_init_trace_regression(prob.op, prob.y, prob.rank);
    for (const auto& algo : run_spec.algos) {
      SolveTrace trace;
      if (algo == "risro") {
        RisroOptions opts;
        opts.max_iter = run_spec.max_iter;
        opts.tol = run_spec.tol;
        opts.tol_metric = run_spec.tol_metric == "rel-change" ? TolMetric::DistToFinalProxy
                          : run_spec.tol_metric == "grad-norm"
                              ? TolMetric::GradNorm
                              : TolMetric::RelRmse;
        opts.ls_backend = run_spec.ls_backend == "intrinsic-cg" ? LsBackend::IntrinsicCG
                                                                : LsBackend::DenseQR;
        trace = risro_solve(prob, init, opts).second;
      } else {
        baselines::BaselineOptions opts;
        if (!run_spec.step_grid.empty()) opts.step_grid = run_spec.step_grid;
        opts.max_iter = run_spec.max_iter;
        opts.tol = run_spec.tol;
        if (algo == "svp")
          trace = baselines::svp_solve(prob, init, opts).second;
        else if (algo == "altmin")
          trace = baselines::altmin_solve(prob, init, opts).second;
        else if (algo == "gd")
          trace = baselines::factored_gd_solve(prob, init, opts).second;
        else {
          std::fprintf(stderr, "error: unknown algorithm %s\n", algo.c_str());
          return bench::kExitUsage;
        }
      }
      const std::string out =
          (std::filesystem::path(run_spec.out_dir) / ("replay_" + algo + ".csv")).string();
      bench::write_trace_csv(out, trace, nullptr, run_spec.no_wall_time);
    }
    return bench::kExitOk;
  } catch (const bench::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bench::kExitData;
  } catch (const bench::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bench::kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bench::kExitUsage;
  }
}

int do_plot(const std::vector<std::string>& csvs, const std::string& column,
            const std::string& out, bool linear_y) {
  using namespace risro::bench;
  try {
    std::vector<SvgSeries> series;
    for (const auto& path : csvs) {
      const TraceCsv table = read_csv(path);
      std::size_t col = table.columns.size();
      for (std::size_t c = 0; c < table.columns.size(); ++c)
        if (table.columns[c] == column) col = c;
      if (col == table.columns.size()) throw DataError("column not found: " + column);
      SvgSeries s;
      s.label = std::filesystem::path(path).stem().string();
      for (const auto& row : table.rows) s.points.emplace_back(row[0], row[col]);
      series.push_back(std::move(s));
    }
    write_svg_chart(out, column, "iteration", column, series, !linear_y);
    return kExitOk;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RISRO benchmark harness"};
  app.require_subcommand(1);

  ExperimentSpec spec;

  CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV traces");
  add_spec_flags(run, spec);

  CLI::App* dump = app.add_subcommand("dump", "generate an instance and write it to a file");
  std::string dump_path = "instance.risr";
  add_spec_flags(dump, spec);
  dump->add_option("--file", dump_path, "instance file path");

  CLI::App* replay = app.add_subcommand("replay", "re-run solvers on a dumped instance");
  std::string replay_path;
  add_spec_flags(replay, spec);
  replay->add_option("--file", replay_path, "instance file path")->required();

  CLI::App* plot = app.add_subcommand("plot", "render CSV traces to an SVG chart");
  std::vector<std::string> plot_csvs;
  std::string plot_column = "rel_rmse", plot_out = "plot.svg";
  bool plot_linear = false;
  plot->add_option("--csv", plot_csvs, "input CSV files")->delimiter(',')->required();
  plot->add_option("--column", plot_column, "column to plot against iter");
  plot->add_option("--out-file", plot_out, "output SVG path");
  plot->add_flag("--linear-y", plot_linear, "linear instead of log y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : risro::bench::kExitUsage;
  }

  if (run->parsed()) return risro::bench::run_experiment(spec);
  if (dump->parsed()) return do_dump(spec, dump_path);
  if (replay->parsed()) return do_replay(spec, replay_path);
  if (plot->parsed()) return do_plot(plot_csvs, plot_column, plot_out, plot_linear);
  return risro::bench::kExitUsage;
}
