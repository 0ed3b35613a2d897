#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "config.hpp"
#include "csv.hpp"
#include "problem_factory.hpp"
#include "srba/baselines.hpp"
#include "srba/solver.hpp"
#include "verify_checks.hpp"

namespace srba::bench {

namespace {

constexpr const char* kVersion = "srba-bench 0.1.0";

struct RunTask {
  double rho = 0.0;
  double gamma = 0.0;
  int q = 1;
  double decay_a = 0.0;
  double decay_b = 0.0;
  std::uint64_t seed = 0;
  std::string file_name;
  // outputs
  std::vector<TraceRecord> trace;
  std::string status = "ok";
};

std::string compact_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string task_file_name(const std::string& solver, const RunTask& t) {
  std::string name = solver + "_q" + std::to_string(t.q) + "_rho" +
                     compact_number(t.rho) + "_gamma" +
                     compact_number(t.gamma);
  if (t.decay_a != 0.0 || t.decay_b != 0.0) {
    name += "_a" + compact_number(t.decay_a) + "_b" +
            compact_number(t.decay_b);
  }
  name += "_seed" + std::to_string(t.seed) + ".csv";
  return name;
}

int resolve_q(const SolverSpec& solver, const BuiltProblem& built,
              double q_scale) {
  if (q_scale <= 0.0) return solver.q;
  const double nm = static_cast<double>(built.problem->num_inner() +
                                        built.problem->num_outer());
  return std::max(1, static_cast<int>(std::llround(
                         q_scale * nm / solver.batch_size)));
}

void execute_task(const BuiltProblem& built, const SolverSpec& solver,
                  const Monitor& monitor, RunTask& task) {
  SrbaConfig base;
  base.rho = task.rho;
  base.gamma = task.gamma;
  base.q = task.q;
  base.T = solver.T;
  base.R = solver.R;
  base.seed = task.seed;
  base.batch_size = solver.batch_size;
  base.record_states = solver.record_states;
  base.timing = solver.timing;

  SolverRunResult run;
  if (solver.kind == "srba") {
    run = srba_run(*built.problem, base, monitor);
  } else if (solver.kind == "fullbatch_gd") {
    run = fullbatch_gd_run(*built.problem,
                           {base, task.decay_a, task.decay_b}, monitor);
  } else {
    run = soba_run(*built.problem, {base, task.decay_a, task.decay_b},
                   monitor);
  }
  task.trace = std::move(run.trace);
  task.status = run.status == RunStatus::ok ? "ok" : "diverged";
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

int cmd_run(const RunOptions& opts) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(opts.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (!opts.out_override.empty()) cfg.output_dir = opts.out_override;
  if (const char* env = std::getenv("SRBA_BENCH_SEED")) {
    cfg.seeds = {static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10))};
  }

  BuiltProblem built;
  try {
    built = build_problem(cfg.problem);
  } catch (const std::exception& e) {
    std::cerr << "problem construction error: " << e.what() << '\n';
    return 2;
  }
  const Monitor monitor =
      make_monitor(built, cfg.solver.h_every, cfg.solver.fd_grad_every);

  // grid x seeds, in deterministic order
  std::vector<RunTask> tasks;
  const std::vector<double> q_scales =
      cfg.grid.q_scale.empty() ? std::vector<double>{0.0} : cfg.grid.q_scale;
  for (double qs : q_scales) {
    for (double rho : cfg.grid.rho) {
      for (double gamma : cfg.grid.gamma) {
        for (double da : cfg.grid.decay_a) {
          for (double db : cfg.grid.decay_b) {
            for (std::uint64_t seed : cfg.seeds) {
              RunTask t;
              t.rho = rho;
              t.gamma = gamma;
              t.q = resolve_q(cfg.solver, built, qs);
              t.decay_a = cfg.solver.kind == "srba" ? 0.0 : da;
              t.decay_b = cfg.solver.kind == "srba" ? 0.0 : db;
              t.seed = seed;
              t.file_name = task_file_name(cfg.solver.kind, t);
              tasks.push_back(std::move(t));
            }
          }
        }
      }
    }
  }
  // decay grids collapse for srba; drop duplicate file names
  {
    std::vector<RunTask> unique;
    for (auto& t : tasks) {
      const bool seen = std::any_of(
          unique.begin(), unique.end(),
          [&](const RunTask& u) { return u.file_name == t.file_name; });
      if (!seen) unique.push_back(std::move(t));
    }
    tasks = std::move(unique);
  }

  const int jobs = std::max(1, opts.jobs);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(
      static_cast<std::size_t>(jobs));
  auto worker = [&](int slot) {
    try {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= tasks.size()) return;
        execute_task(built, cfg.solver, monitor, tasks[idx]);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(slot)] = std::current_exception();
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int s = 0; s < jobs; ++s) pool.emplace_back(worker, s);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) {
      try {
        std::rethrow_exception(err);
      } catch (const std::exception& e) {
        std::cerr << "run error: " << e.what() << '\n';
        return 2;
      }
    }
  }

  // suboptimality against the sweep minimum of h
  double h_star = std::numeric_limits<double>::infinity();
  for (const RunTask& t : tasks) {
    for (const TraceRecord& r : t.trace) {
      if (r.h.has_value()) h_star = std::min(h_star, *r.h);
    }
  }
  if (std::isfinite(h_star)) {
    for (RunTask& t : tasks) {
      for (TraceRecord& r : t.trace) {
        if (r.h.has_value()) r.subopt = *r.h - h_star;
      }
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));
  manifest["config_hash"] = hash_hex;
  manifest["config_path"] = cfg.config_path;
  manifest["solver"] = cfg.solver.kind;
  manifest["problem"] = cfg.problem.kind;
  nlohmann::json entries = nlohmann::json::array();

  bool any_ok = false;
  for (const RunTask& t : tasks) {
    const std::string path =
        (std::filesystem::path(cfg.output_dir) / t.file_name).string();
    write_trace_csv(path, t.trace);
    entries.push_back({{"file", t.file_name},
                       {"rho", t.rho},
                       {"gamma", t.gamma},
                       {"q", t.q},
                       {"decay_a", t.decay_a},
                       {"decay_b", t.decay_b},
                       {"seed", t.seed},
                       {"status", t.status},
                       {"rows", t.trace.size()}});
    if (t.status == "ok") any_ok = true;
  }
  manifest["runs"] = std::move(entries);
  {
    std::ofstream mf(std::filesystem::path(cfg.output_dir) / "manifest.json");
    mf << manifest.dump(2) << '\n';
  }
  return any_ok ? 0 : 4;
}

int cmd_verify(const std::string& filter) {
  std::vector<VerifyResult> results;
  try {
    results = run_verify_suite(filter);
  } catch (const std::exception& e) {
    std::cerr << "verify error: " << e.what() << '\n';
    return 3;
  }
  if (results.empty()) {
    std::cerr << "verify: no suite matches filter '" << filter << "'\n";
    return 3;
  }
  bool all_pass = true;
  for (const VerifyResult& r : results) {
    std::printf("[%s] %-14s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 3;
}

int cmd_lowerbound(const LowerBoundOptions& opts) {
  WorstCaseInstance inst;
  try {
    const double alpha_c =
        opts.c_override > 0.0 ? opts.c_override : estimate_gamma_smoothness();
    const double alpha = std::min(1.0, static_cast<double>(opts.m) / alpha_c);
    const double delta = 1760.0 * opts.m * opts.eps * opts.chain /
                         (opts.L1F * std::sqrt(alpha));
    inst = make_worstcase(opts.m, opts.n, opts.eps, delta, opts.L1F, opts.muG,
                          opts.seed, opts.c_override);
  } catch (const std::exception& e) {
    std::cerr << "lowerbound error: " << e.what() << '\n';
    return 2;
  }

  SrbaConfig cfg;
  cfg.rho = opts.rho;
  cfg.gamma = opts.gamma;
  cfg.q = opts.q;
  const int bound_rows =
      static_cast<int>(std::ceil(0.5 * opts.m * inst.chain)) + 8;
  cfg.T = opts.T > 0 ? opts.T : (bound_rows + cfg.q - 1) / cfg.q;
  cfg.R = std::numeric_limits<double>::infinity();
  cfg.seed = opts.seed;
  cfg.record_states = true;

  const SolverRunResult run = srba_run(*inst.problem, cfg);
  std::vector<Vector> xs;
  xs.reserve(run.state_log.size());
  for (const JointState& u : run.state_log) xs.push_back(u.x);

  const Certificate cert = certify_run(inst, xs);
  const std::string json = cert.to_json();
  if (opts.out_path.empty()) {
    std::cout << json << '\n';
  } else {
    std::ofstream out(opts.out_path);
    if (!out) {
      std::cerr << "cannot open " << opts.out_path << " for writing\n";
      return 2;
    }
    out << json << '\n';
  }
  const bool early_stationary =
      cert.first_eps_stationary >= 0 &&
      cert.first_eps_stationary <= cert.iteration_bound;
  return (cert.floors_ok && cert.span_ok && !early_stationary) ? 0 : 3;
}

int cmd_plotdata(const PlotDataOptions& opts) {
  namespace fs = std::filesystem;
  // resolve the glob: directory part is literal, file part supports * and ?
  const fs::path pattern(opts.glob);
  const fs::path dir =
      pattern.has_parent_path() ? pattern.parent_path() : fs::path(".");
  const std::string file_pat = pattern.filename().string();

  const auto matches = [&](const std::string& name) {
    // iterative wildcard match
    std::size_t n = 0, p = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
      if (p < file_pat.size() &&
          (file_pat[p] == '?' || file_pat[p] == name[n])) {
        ++n;
        ++p;
      } else if (p < file_pat.size() && file_pat[p] == '*') {
        star = p++;
        mark = n;
      } else if (star != std::string::npos) {
        p = star + 1;
        n = ++mark;
      } else {
        return false;
      }
    }
    while (p < file_pat.size() && file_pat[p] == '*') ++p;
    return p == file_pat.size();
  };

  std::vector<std::string> files;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && matches(entry.path().filename().string()))
        files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "plotdata: no files match '" << opts.glob << "'\n";
    return 2;
  }

  std::vector<std::vector<TraceRecord>> traces;
  try {
    for (const std::string& f : files) traces.push_back(read_trace_csv(f));
  } catch (const std::exception& e) {
    std::cerr << "plotdata: " << e.what() << '\n';
    return 2;
  }

  const auto metric_of = [&](const TraceRecord& r) -> std::optional<double> {
    if (opts.metric == "subopt") return r.subopt;
    if (opts.metric == "h") return r.h;
    if (opts.metric == "grad_h_sq") return r.grad_h_sq;
    if (opts.metric == "oracle_total")
      return static_cast<double>(r.oracle_total);
    return std::nullopt;
  };
  const auto x_of = [&](const TraceRecord& r,
                        std::size_t row) -> std::optional<double> {
    if (opts.x_axis == "iterations") return static_cast<double>(row);
    if (opts.x_axis == "oracle_calls")
      return static_cast<double>(r.oracle_total);
    if (opts.x_axis == "wall_ms") return r.wall_ms;
    return std::nullopt;
  };
  if (opts.metric != "subopt" && opts.metric != "h" &&
      opts.metric != "grad_h_sq" && opts.metric != "oracle_total") {
    std::cerr << "plotdata: unknown metric '" << opts.metric << "'\n";
    return 2;
  }
  if (opts.x_axis != "iterations" && opts.x_axis != "oracle_calls" &&
      opts.x_axis != "wall_ms") {
    std::cerr << "plotdata: unknown x axis '" << opts.x_axis << "'\n";
    return 2;
  }

  std::size_t max_rows = 0;
  for (const auto& tr : traces) max_rows = std::max(max_rows, tr.size());

  std::ostringstream out;
  out << "x,median,p20,p80,n\n";
  for (std::size_t row = 0; row < max_rows; ++row) {
    std::vector<double> xs, ys;
    for (const auto& tr : traces) {
      if (row >= tr.size()) continue;
      const auto x = x_of(tr[row], row);
      const auto y = metric_of(tr[row]);
      if (x.has_value() && y.has_value()) {
        xs.push_back(*x);
        ys.push_back(*y);
      }
    }
    if (ys.empty()) continue;
    out << format_double(percentile(xs, 0.5)) << ','
        << format_double(percentile(ys, 0.5)) << ','
        << format_double(percentile(ys, 0.2)) << ','
        << format_double(percentile(ys, 0.8)) << ',' << ys.size() << '\n';
  }

  if (opts.out_path.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream f(opts.out_path);
    if (!f) {
      std::cerr << "cannot open " << opts.out_path << " for writing\n";
      return 2;
    }
    f << out.str();
  }
  return 0;
}

}  // namespace srba::bench
