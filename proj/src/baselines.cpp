#include "srba/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace srba {

namespace {

void validate(const BaselineConfig& c) {
  if (!(c.base.rho > 0.0))
    throw std::invalid_argument("baseline config: rho must be > 0");
  if (!(c.base.gamma > 0.0))
    throw std::invalid_argument("baseline config: gamma must be > 0");
  if (c.base.T < 1)
    throw std::invalid_argument("baseline config: T must be >= 1");
  if (c.base.batch_size < 1)
    throw std::invalid_argument("baseline config: batch_size must be >= 1");
  if (c.decay_a < 0.0 || c.decay_b < 0.0)
    throw std::invalid_argument("baseline config: decay exponents must be >= 0");
}

JointState initial_state(const BilevelProblem& pb, const SrbaConfig& c) {
  if (c.init.has_value()) {
    const JointState& u = *c.init;
    if (u.z.size() != pb.inner_dim() || u.v.size() != pb.inner_dim() ||
        u.x.size() != pb.outer_dim()) {
      throw std::invalid_argument(
          "baseline config: init state dimension mismatch");
    }
    return u;
  }
  return {Vector::Zero(pb.inner_dim()), Vector::Zero(pb.inner_dim()),
          Vector::Zero(pb.outer_dim())};
}

struct StepSchedule {
  double rho, gamma, a, b;
  double rho_at(int t) const {
    return rho * std::pow(static_cast<double>(t + 1), -a);
  }
  double gamma_at(int t) const {
    return gamma * std::pow(static_cast<double>(t + 1), -b);
  }
};

// Shared single-direction-per-iteration loop; `directions` supplies either
// the full batch or a fresh sample at the current iterate.
template <typename DirectionsFn>
SolverRunResult baseline_loop(const BilevelProblem& pb,
                              const BaselineConfig& config,
                              const Monitor& monitor,
                              DirectionsFn&& directions) {
  validate(config);
  const double R = resolve_radius(pb, config.base.R);
  const StepSchedule steps{config.base.rho, config.base.gamma, config.decay_a,
                           config.decay_b};

  SolverRunResult res;
  res.trace.reserve(static_cast<std::size_t>(config.base.T) + 1);
  const auto start = std::chrono::steady_clock::now();

  auto emit = [&](int t, const JointState& u) {
    TraceRecord row;
    row.t = t;
    row.k = 0;
    row.oracle_total = res.ledger.total();
    row.oracle_grad_F = res.ledger.grad_F;
    row.oracle_grad1_G = res.ledger.grad1_G;
    row.oracle_hvp = res.ledger.hvp11_G;
    row.oracle_jvp = res.ledger.jvp21_G;
    if (config.base.timing) {
      const auto now = std::chrono::steady_clock::now();
      row.wall_ms =
          std::chrono::duration<double, std::milli>(now - start).count();
    }
    if (monitor) monitor(t, 0, u, row);
    res.trace.push_back(std::move(row));
    if (config.base.record_states) res.state_log.push_back(u);
  };

  JointState u = initial_state(pb, config.base);
  emit(0, u);

  for (int t = 0; t < config.base.T; ++t) {
    const DirectionTriple dir = directions(t, u, res);
    const DirectionTriple scaled =
        scale_triple(dir, steps.rho_at(t), steps.gamma_at(t));
    if (config.base.record_states) res.estimate_log.push_back(scaled);
    JointState next = apply_step(u, scaled, R);
    if (!state_within_bounds(next)) {
      res.status = RunStatus::diverged;
      res.final_state = std::move(u);
      return res;
    }
    u = std::move(next);
    emit(t + 1, u);
  }

  res.final_state = std::move(u);
  return res;
}

}  // namespace

SolverRunResult fullbatch_gd_run(const BilevelProblem& pb,
                                 const BaselineConfig& config,
                                 const Monitor& monitor) {
  return baseline_loop(pb, config, monitor,
                       [&](int, const JointState& u, SolverRunResult& res) {
                         return full_directions(pb, u, res.ledger);
                       });
}

SolverRunResult soba_run(const BilevelProblem& pb, const BaselineConfig& config,
                         const Monitor& monitor,
                         const IndexProvider& provider) {
  const IndexStream stream(config.base.seed);
  const int n = pb.num_inner();
  const int m = pb.num_outer();
  return baseline_loop(
      pb, config, monitor,
      [&](int t, const JointState& u, SolverRunResult& res) {
        DrawnIndices drawn = provider
                                 ? provider(t, 0)
                                 : stream.draw(t, 0, n, m,
                                               config.base.batch_size);
        const DirectionTriple d =
            batch_directions(pb, u, drawn.is, drawn.js, res.ledger);
        res.index_log.push_back(std::move(drawn));
        return d;
      });
}

}  // namespace srba
