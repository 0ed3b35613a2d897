#include "srba/solver.hpp"

#include <chrono>
#include <stdexcept>

namespace srba {

DirectionTriple sarah_step(const DirectionTriple& prev,
                           const DirectionTriple& new_sample,
                           const DirectionTriple& old_sample, double rho,
                           double gamma) {
  DirectionTriple out;
  out.dz = rho * (new_sample.dz - old_sample.dz) + prev.dz;
  out.dv = rho * (new_sample.dv - old_sample.dv) + prev.dv;
  out.dx = gamma * (new_sample.dx - old_sample.dx) + prev.dx;
  return out;
}

DirectionTriple scale_triple(const DirectionTriple& d, double rho,
                             double gamma) {
  return {rho * d.dz, rho * d.dv, gamma * d.dx};
}

JointState apply_step(const JointState& u, const DirectionTriple& scaled,
                      double R) {
  JointState next;
  next.z = u.z - scaled.dz;
  next.v = project_v(u.v - scaled.dv, R);
  next.x = u.x - scaled.dx;
  return next;
}

double resolve_radius(const BilevelProblem& pb, double requested) {
  if (requested > 0.0) return requested;
  const RegularityConstants& c = pb.constants();
  if (c.L0_F.has_value() && c.mu_G > 0.0) return *c.L0_F / c.mu_G;
  throw std::invalid_argument(
      "projection radius: not set and the problem declares no L0_F; pass an "
      "explicit R (or +inf to disable the projection)");
}

bool state_within_bounds(const JointState& u) {
  const auto ok = [](const Vector& w) {
    return w.allFinite() && w.norm() <= 1e12;
  };
  return ok(u.z) && ok(u.v) && ok(u.x);
}

namespace {

void validate(const SrbaConfig& c) {
  if (!(c.rho > 0.0)) throw std::invalid_argument("srba config: rho must be > 0");
  if (!(c.gamma > 0.0))
    throw std::invalid_argument("srba config: gamma must be > 0");
  if (c.q < 1) throw std::invalid_argument("srba config: q must be >= 1");
  if (c.T < 1) throw std::invalid_argument("srba config: T must be >= 1");
  if (c.batch_size < 1)
    throw std::invalid_argument("srba config: batch_size must be >= 1");
}

JointState initial_state(const BilevelProblem& pb, const SrbaConfig& c) {
  if (c.init.has_value()) {
    const JointState& u = *c.init;
    if (u.z.size() != pb.inner_dim() || u.v.size() != pb.inner_dim() ||
        u.x.size() != pb.outer_dim()) {
      throw std::invalid_argument("srba config: init state dimension mismatch");
    }
    return u;
  }
  return {Vector::Zero(pb.inner_dim()), Vector::Zero(pb.inner_dim()),
          Vector::Zero(pb.outer_dim())};
}

class RowEmitter {
 public:
  RowEmitter(SolverRunResult& out, const Monitor& monitor, bool record_states,
             bool timing)
      : out_(out),
        monitor_(monitor),
        record_states_(record_states),
        timing_(timing),
        start_(std::chrono::steady_clock::now()) {}

  void emit(int t, int k, const JointState& u, const OracleLedger& ledger) {
    TraceRecord row;
    row.t = t;
    row.k = k;
    row.oracle_total = ledger.total();
    row.oracle_grad_F = ledger.grad_F;
    row.oracle_grad1_G = ledger.grad1_G;
    row.oracle_hvp = ledger.hvp11_G;
    row.oracle_jvp = ledger.jvp21_G;
    if (timing_) {
      const auto now = std::chrono::steady_clock::now();
      row.wall_ms =
          std::chrono::duration<double, std::milli>(now - start_).count();
    }
    if (monitor_) monitor_(t, k, u, row);
    out_.trace.push_back(std::move(row));
    if (record_states_) out_.state_log.push_back(u);
  }

 private:
  SolverRunResult& out_;
  const Monitor& monitor_;
  bool record_states_;
  bool timing_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolverRunResult srba_run(const BilevelProblem& pb, const SrbaConfig& config,
                         const Monitor& monitor,
                         const IndexProvider& provider) {
  validate(config);
  const double R = resolve_radius(pb, config.R);
  const int n = pb.num_inner();
  const int m = pb.num_outer();
  const IndexStream stream(config.seed);

  SolverRunResult res;
  res.trace.reserve(static_cast<std::size_t>(config.T) * config.q + 1);

  RowEmitter rows(res, monitor, config.record_states, config.timing);

  JointState u = initial_state(pb, config);
  rows.emit(0, 0, u, res.ledger);

  for (int t = 0; t < config.T; ++t) {
    // Reset the estimate from full-batch directions at the current iterate.
    const DirectionTriple full = full_directions(pb, u, res.ledger);
    DirectionTriple delta = scale_triple(full, config.rho, config.gamma);
    if (config.record_states) res.estimate_log.push_back(delta);

    JointState u_prev = u;
    u = apply_step(u, delta, R);
    if (!state_within_bounds(u)) {
      res.status = RunStatus::diverged;
      res.final_state = std::move(u_prev);
      return res;
    }
    rows.emit(config.q == 1 ? t + 1 : t, config.q == 1 ? 0 : 1, u, res.ledger);

    for (int k = 1; k < config.q; ++k) {
      DrawnIndices drawn = provider ? provider(t, k)
                                    : stream.draw(t, k, n, m, config.batch_size);
      const DirectionTriple new_sample =
          batch_directions(pb, u, drawn.is, drawn.js, res.ledger);
      const DirectionTriple old_sample =
          batch_directions(pb, u_prev, drawn.is, drawn.js, res.ledger);
      res.index_log.push_back(std::move(drawn));

      delta = sarah_step(delta, new_sample, old_sample, config.rho,
                         config.gamma);
      if (config.record_states) res.estimate_log.push_back(delta);

      u_prev = u;
      u = apply_step(u, delta, R);
      if (!state_within_bounds(u)) {
        res.status = RunStatus::diverged;
        res.final_state = std::move(u_prev);
        return res;
      }
      const bool closes_outer = (k + 1 == config.q);
      rows.emit(closes_outer ? t + 1 : t, closes_outer ? 0 : k + 1, u,
                res.ledger);
    }
  }

  res.final_state = std::move(u);
  return res;
}

}  // namespace srba
