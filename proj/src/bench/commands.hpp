#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srba::bench {

// Exit codes: 0 ok, 2 config/construction error, 3 verification failure,
// 4 every run of a sweep diverged.

struct RunOptions {
  std::string config_path;
  std::string out_override;  // overrides [output] dir when nonempty
  int jobs = 1;
};

int cmd_run(const RunOptions& opts);

int cmd_verify(const std::string& filter);

struct LowerBoundOptions {
  int m = 4;
  int n = 1;
  int chain = 8;
  double eps = 1e-3;
  double L1F = 1.0;
  double muG = 1.0;
  double c_override = 0.0;
  std::uint64_t seed = 0;
  // solver driving the certified run
  double rho = 0.5;
  double gamma = 1.0;
  int q = 4;
  int T = 0;  // 0: enough outer iterations to pass the m*chain/2 bound
  std::string out_path;  // certificate JSON; empty prints to stdout
};

int cmd_lowerbound(const LowerBoundOptions& opts);

struct PlotDataOptions {
  std::string glob;           // e.g. out/srba_*.csv
  std::string metric = "subopt";
  std::string x_axis = "iterations";  // iterations | oracle_calls | wall_ms
  std::string out_path;       // empty prints to stdout
};

int cmd_plotdata(const PlotDataOptions& opts);

/// Percentile with linear interpolation between order statistics; `values`
/// need not be sorted.
double percentile(std::vector<double> values, double p);

}  // namespace srba::bench
