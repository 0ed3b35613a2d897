#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toml.hpp"

namespace srba::bench {

struct ProblemSpec {
  std::string kind;  // quadratic | hyperparam | datacleaning | worstcase
  std::uint64_t seed = 0;

  // quadratic
  int p = 10, d = 10, n = 8, m = 8;
  double mu_min = 0.5, l_max = 2.0;

  // data problems: loaded from files when paths are given, else synthetic
  std::string train_path, val_path;
  int n_train = 512, n_val = 512, features = 20, classes = 3;
  double separation = 3.0;

  // datacleaning
  double p_c = 0.5;
  double regularizer = 0.2;

  // worstcase
  double eps = 1e-3, delta = 0.0, L1F = 1.0, muG = 1.0, c_override = 0.0;
  int chain = 8;
};

struct SolverSpec {
  std::string kind = "srba";  // srba | fullbatch_gd | soba
  int T = 100;
  int q = 1;
  int batch_size = 1;
  double R = 0.0;  // 0 derives from constants; inf disables projection
  bool record_states = false;
  bool timing = false;
  int fd_grad_every = 0;  // FD grad_h on data problems every N outer iters
  int h_every = 1;        // objective on data problems every N outer iters
};

struct GridSpec {
  std::vector<double> rho;
  std::vector<double> gamma;
  std::vector<double> q_scale;  // a in q = a (n + m) / batch; empty keeps q
  std::vector<double> decay_a;  // baselines only
  std::vector<double> decay_b;
};

struct ExperimentConfig {
  ProblemSpec problem;
  SolverSpec solver;
  GridSpec grid;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::string config_path;
  std::uint64_t config_hash = 0;
};

/// Parses and validates; throws std::runtime_error naming path and field.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_doc(const TomlDocument& doc,
                                            const std::string& origin);

std::uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace srba::bench
