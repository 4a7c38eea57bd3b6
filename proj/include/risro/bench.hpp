#pragma once

#include <map>
#include <string>
#include <vector>

#include "risro/core.hpp"

namespace risro::bench {

// Exit codes shared by the library surface and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

/// Malformed instance file; message carries the failing field.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentSpec {
  std::string experiment = "trace-regression";  // trace-regression, phase-retrieval,
                                                // matrix-completion, rpca, success-rate,
                                                // rip-diagnostic
  std::vector<std::string> algos{"risro"};      // subset of {risro, svp, altmin, gd}
  Index p1 = 100, p2 = 100, r = 3;
  Index n = 1500;
  double kappa = 1.0;
  double sigma = 0.0;
  double q = 0.02;
  double gamma = 0.3;
  int trials = 1;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-12;
  std::string tol_metric = "rel-rmse";   // rel-rmse, rel-change, grad-norm
  std::string ls_backend = "dense-qr";   // dense-qr, intrinsic-cg
  std::vector<double> step_grid;         // empty: baseline default
  std::string n_grid;                    // success-rate: "start:stop:step"
  int rip_samples = 200;
  std::string out_dir = ".";
  bool plot = false;
  bool no_wall_time = false;  // write time_s as 0 for byte-stable output
};

/// Runs the experiment, writes per-trial and aggregate CSVs (and SVG plots
/// when asked); returns one of the exit codes above.
int run_experiment(const ExperimentSpec& spec);

// Self-describing binary instance container ("RISR" magic, version, dims,
// variant tag, row-major float64 payloads, little-endian throughout).
void dump_instance(const ProblemInstance& prob, const std::string& path);
ProblemInstance load_instance(const std::string& path);

struct TraceCsv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_trace_csv(const std::string& path, const SolveTrace& trace,
                     const std::vector<double>* exact_dist_to_final, bool no_wall_time);
TraceCsv read_csv(const std::string& path);
void write_csv(const std::string& path, const TraceCsv& table);

/// Per-iteration arithmetic mean over trials that reached each iteration.
TraceCsv aggregate_mean(const std::vector<TraceCsv>& trials);

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Dependency-free polyline chart; log-scaled y when log_y is set.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, bool log_y);

/// Trial concurrency cap: RISRO_THREADS when set, hardware count otherwise.
int trial_thread_cap(int trials);

}  // namespace risro::bench
