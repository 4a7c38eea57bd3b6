#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "risro/bench.hpp"

namespace risro::bench {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const std::string& path, const SolveTrace& trace,
                     const std::vector<double>* exact_dist_to_final, bool no_wall_time) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "iter,time_s,objective,rel_rmse,dist_to_final,grad_norm\n";
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    const double time_s = no_wall_time ? 0.0 : r.wall_time_s;
    const double dist = exact_dist_to_final && k < exact_dist_to_final->size()
                            ? (*exact_dist_to_final)[k]
                            : r.dist_to_final;
    out << r.iter << ',' << format_double(time_s) << ',' << format_double(r.objective) << ','
        << format_double(r.rel_rmse) << ',' << format_double(dist) << ','
        << format_double(r.grad_norm) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

TraceCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  TraceCsv table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv: " + path);
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
    if (values.size() != table.columns.size())
      throw DataError("ragged csv row in " + path);
    table.rows.push_back(std::move(values));
  }
  return table;
}

void write_csv(const std::string& path, const TraceCsv& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << (c + 1 < table.columns.size() ? ',' : '\n');
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_double(row[c]) << (c + 1 < row.size() ? ',' : '\n');
  }
  if (!out) throw IoError("write failed: " + path);
}

TraceCsv aggregate_mean(const std::vector<TraceCsv>& trials) {
  require(!trials.empty(), "aggregate_mean: no trials");
  TraceCsv out;
  out.columns = trials[0].columns;
  std::size_t max_rows = 0;
  for (const auto& t : trials) max_rows = std::max(max_rows, t.rows.size());
  for (std::size_t i = 0; i < max_rows; ++i) {
    std::vector<double> mean(out.columns.size(), 0.0);
    int count = 0;
    for (const auto& t : trials) {
      if (i >= t.rows.size()) continue;  // mean over trials that reached iteration i
      ++count;
      for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += t.rows[i][c];
    }
    for (auto& v : mean) v /= count;
    out.rows.push_back(std::move(mean));
  }
  return out;
}

}  // namespace risro::bench
