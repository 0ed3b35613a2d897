#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace srba::bench {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& field,
                       const std::string& msg) {
  throw std::runtime_error(origin + ": field '" + field + "': " + msg);
}

double number_at(const TomlDocument& doc, const std::string& table,
                 const std::string& key, double fallback) {
  if (!doc.has(table, key)) return fallback;
  return doc.at(table, key).as_number();
}

int int_at(const TomlDocument& doc, const std::string& table,
           const std::string& key, int fallback) {
  if (!doc.has(table, key)) return fallback;
  return static_cast<int>(doc.at(table, key).as_int());
}

bool bool_at(const TomlDocument& doc, const std::string& table,
             const std::string& key, bool fallback) {
  if (!doc.has(table, key)) return fallback;
  return doc.at(table, key).as_bool();
}

std::string string_at(const TomlDocument& doc, const std::string& table,
                      const std::string& key, const std::string& fallback) {
  if (!doc.has(table, key)) return fallback;
  return doc.at(table, key).as_string();
}

std::vector<double> number_list_at(const TomlDocument& doc,
                                   const std::string& table,
                                   const std::string& key,
                                   std::vector<double> fallback,
                                   const std::string& origin) {
  if (!doc.has(table, key)) return fallback;
  const TomlValue& v = doc.at(table, key);
  if (!v.is_array()) fail(origin, table + "." + key, "expected an array");
  std::vector<double> out;
  for (const TomlValue& item : v.as_array()) out.push_back(item.as_number());
  return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig experiment_config_from_doc(const TomlDocument& doc,
                                            const std::string& origin) {
  ExperimentConfig cfg;

  // [problem]
  if (!doc.has("problem", "kind")) fail(origin, "problem.kind", "required");
  cfg.problem.kind = doc.at("problem", "kind").as_string();
  const std::set<std::string> kinds{"quadratic", "hyperparam", "datacleaning",
                                    "worstcase"};
  if (kinds.count(cfg.problem.kind) == 0) {
    fail(origin, "problem.kind", "unknown kind '" + cfg.problem.kind + "'");
  }
  cfg.problem.seed =
      static_cast<std::uint64_t>(int_at(doc, "problem", "seed", 0));
  cfg.problem.p = int_at(doc, "problem", "p", cfg.problem.p);
  cfg.problem.d = int_at(doc, "problem", "d", cfg.problem.d);
  cfg.problem.n = int_at(doc, "problem", "n", cfg.problem.n);
  cfg.problem.m = int_at(doc, "problem", "m", cfg.problem.m);
  cfg.problem.mu_min = number_at(doc, "problem", "mu_min", cfg.problem.mu_min);
  cfg.problem.l_max = number_at(doc, "problem", "l_max", cfg.problem.l_max);
  cfg.problem.train_path = string_at(doc, "problem", "train_path", "");
  cfg.problem.val_path = string_at(doc, "problem", "val_path", "");
  cfg.problem.n_train = int_at(doc, "problem", "n_train", cfg.problem.n_train);
  cfg.problem.n_val = int_at(doc, "problem", "n_val", cfg.problem.n_val);
  cfg.problem.features =
      int_at(doc, "problem", "features", cfg.problem.features);
  cfg.problem.classes = int_at(doc, "problem", "classes", cfg.problem.classes);
  cfg.problem.separation =
      number_at(doc, "problem", "separation", cfg.problem.separation);
  cfg.problem.p_c = number_at(doc, "problem", "p_c", cfg.problem.p_c);
  cfg.problem.regularizer =
      number_at(doc, "problem", "regularizer", cfg.problem.regularizer);
  cfg.problem.eps = number_at(doc, "problem", "eps", cfg.problem.eps);
  cfg.problem.delta = number_at(doc, "problem", "delta", cfg.problem.delta);
  cfg.problem.L1F = number_at(doc, "problem", "L1F", cfg.problem.L1F);
  cfg.problem.muG = number_at(doc, "problem", "muG", cfg.problem.muG);
  cfg.problem.c_override =
      number_at(doc, "problem", "c_override", cfg.problem.c_override);
  cfg.problem.chain = int_at(doc, "problem", "chain", cfg.problem.chain);

  // [solver]
  cfg.solver.kind = string_at(doc, "solver", "kind", cfg.solver.kind);
  const std::set<std::string> solvers{"srba", "fullbatch_gd", "soba"};
  if (solvers.count(cfg.solver.kind) == 0) {
    fail(origin, "solver.kind", "unknown solver '" + cfg.solver.kind + "'");
  }
  cfg.solver.T = int_at(doc, "solver", "T", cfg.solver.T);
  cfg.solver.q = int_at(doc, "solver", "q", cfg.solver.q);
  cfg.solver.batch_size =
      int_at(doc, "solver", "batch_size", cfg.solver.batch_size);
  cfg.solver.R = number_at(doc, "solver", "R", cfg.solver.R);
  cfg.solver.record_states =
      bool_at(doc, "solver", "record_states", cfg.solver.record_states);
  cfg.solver.timing = bool_at(doc, "solver", "timing", cfg.solver.timing);
  cfg.solver.fd_grad_every =
      int_at(doc, "solver", "fd_grad_every", cfg.solver.fd_grad_every);
  cfg.solver.h_every = int_at(doc, "solver", "h_every", cfg.solver.h_every);
  if (cfg.solver.T < 1) fail(origin, "solver.T", "must be >= 1");
  if (cfg.solver.q < 1) fail(origin, "solver.q", "must be >= 1");
  if (cfg.solver.batch_size < 1)
    fail(origin, "solver.batch_size", "must be >= 1");

  // [grid]
  cfg.grid.rho = number_list_at(doc, "grid", "rho", {}, origin);
  cfg.grid.gamma = number_list_at(doc, "grid", "gamma", {}, origin);
  cfg.grid.q_scale = number_list_at(doc, "grid", "q_scale", {}, origin);
  cfg.grid.decay_a = number_list_at(doc, "grid", "decay_a", {0.0}, origin);
  cfg.grid.decay_b = number_list_at(doc, "grid", "decay_b", {0.0}, origin);
  if (cfg.grid.rho.empty()) fail(origin, "grid.rho", "nonempty list required");
  if (cfg.grid.gamma.empty())
    fail(origin, "grid.gamma", "nonempty list required");
  for (double r : cfg.grid.rho)
    if (!(r > 0.0)) fail(origin, "grid.rho", "entries must be > 0");
  for (double g : cfg.grid.gamma)
    if (!(g > 0.0)) fail(origin, "grid.gamma", "entries must be > 0");
  if (cfg.grid.decay_a.empty() || cfg.grid.decay_b.empty())
    fail(origin, "grid.decay", "nonempty list required");

  // seeds (top level)
  if (!doc.has("", "seeds")) fail(origin, "seeds", "required list");
  const TomlValue& seeds = doc.at("", "seeds");
  if (!seeds.is_array() || seeds.as_array().empty()) {
    fail(origin, "seeds", "nonempty array required");
  }
  std::set<std::uint64_t> seen;
  for (const TomlValue& s : seeds.as_array()) {
    const std::uint64_t sv = static_cast<std::uint64_t>(s.as_int());
    if (!seen.insert(sv).second) fail(origin, "seeds", "duplicate seed");
    cfg.seeds.push_back(sv);
  }

  // [output]
  cfg.output_dir = string_at(doc, "output", "dir", cfg.output_dir);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ExperimentConfig cfg =
      experiment_config_from_doc(parse_toml_text(text, path), path);
  cfg.config_path = path;
  cfg.config_hash = fnv1a_hash(text);
  return cfg;
}

}  // namespace srba::bench
