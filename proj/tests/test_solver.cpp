#include <doctest.h>

#include <limits>

#include "srba/baselines.hpp"
#include "srba/problems/quadratic.hpp"
#include "srba/solver.hpp"
#include "support.hpp"

using namespace srba;
using testing::TrivialProblem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_state(const JointState& a, const JointState& b) {
  return (a.z - b.z).norm() == 0.0 && (a.v - b.v).norm() == 0.0 &&
         (a.x - b.x).norm() == 0.0;
}

bool same_trace(const std::vector<TraceRecord>& a,
                const std::vector<TraceRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const TraceRecord& lhs = a[r];
    const TraceRecord& rhs = b[r];
    if (lhs.t != rhs.t || lhs.k != rhs.k) return false;
    if (lhs.oracle_total != rhs.oracle_total) return false;
    if (lhs.oracle_grad_F != rhs.oracle_grad_F) return false;
    if (lhs.oracle_grad1_G != rhs.oracle_grad1_G) return false;
    if (lhs.oracle_hvp != rhs.oracle_hvp) return false;
    if (lhs.oracle_jvp != rhs.oracle_jvp) return false;
    if (lhs.h != rhs.h || lhs.grad_h_sq != rhs.grad_h_sq) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sarah_step basics") {
  Xoshiro256 gen(1);
  DirectionTriple prev{testing::random_vector(gen, 3),
                       testing::random_vector(gen, 3),
                       testing::random_vector(gen, 2)};
  DirectionTriple sample{testing::random_vector(gen, 3),
                         testing::random_vector(gen, 3),
                         testing::random_vector(gen, 2)};

  SUBCASE("identical samples leave the estimate unchanged") {
    const DirectionTriple out = sarah_step(prev, sample, sample, 0.3, 0.7);
    CHECK((out.dz - prev.dz).norm() == 0.0);
    CHECK((out.dv - prev.dv).norm() == 0.0);
    CHECK((out.dx - prev.dx).norm() == 0.0);
  }

  SUBCASE("zero previous estimate and zero old sample scale the new one") {
    DirectionTriple zero{Vector::Zero(3), Vector::Zero(3), Vector::Zero(2)};
    const DirectionTriple out = sarah_step(zero, sample, zero, 0.3, 0.7);
    CHECK((out.dz - 0.3 * sample.dz).norm() == 0.0);
    CHECK((out.dv - 0.3 * sample.dv).norm() == 0.0);
    CHECK((out.dx - 0.7 * sample.dx).norm() == 0.0);
  }
}

TEST_CASE("three recursive steps reproduce the hand-unrolled recursion") {
  // Trivial instance in 2 dims, all summands identical, fixed indices; the
  // recursion is unrolled by hand with the same update ordering.
  TrivialProblem pb(2, 2, 2);
  const double rho = 0.25, gamma = 0.5;
  JointState u0;
  u0.z = Vector(2);
  u0.z << 1.0, -1.0;
  u0.v = Vector(2);
  u0.v << 0.5, 0.0;
  u0.x = Vector(2);
  u0.x << 0.0, 2.0;

  SrbaConfig cfg;
  cfg.rho = rho;
  cfg.gamma = gamma;
  cfg.q = 4;
  cfg.T = 1;
  cfg.R = kInf;
  cfg.record_states = true;
  cfg.init = u0;
  const IndexProvider fixed = [](int, int) {
    return DrawnIndices{{0}, {0}};
  };
  const SolverRunResult run = srba_run(pb, cfg, {}, fixed);

  // hand recursion, directions: dz = z - x, dv = v + z, dx = -v
  auto dirs = [](const JointState& u) {
    return DirectionTriple{u.z - u.x, u.v + u.z, -u.v};
  };
  JointState u = u0;
  DirectionTriple est = dirs(u);  // full batch equals sample here
  DirectionTriple delta{rho * est.dz, rho * est.dv, gamma * est.dx};
  JointState prev = u;
  u = {u.z - delta.dz, u.v - delta.dv, u.x - delta.dx};
  for (int k = 1; k < 4; ++k) {
    const DirectionTriple dn = dirs(u);
    const DirectionTriple dp = dirs(prev);
    delta = {rho * (dn.dz - dp.dz) + delta.dz,
             rho * (dn.dv - dp.dv) + delta.dv,
             gamma * (dn.dx - dp.dx) + delta.dx};
    prev = u;
    u = {u.z - delta.dz, u.v - delta.dv, u.x - delta.dx};
  }
  CHECK((run.final_state.z - u.z).norm() <= 1e-12);
  CHECK((run.final_state.v - u.v).norm() <= 1e-12);
  CHECK((run.final_state.x - u.x).norm() <= 1e-12);
}

TEST_CASE("q = 1 reproduces full-batch gradient descent exactly") {
  const QuadraticBilevel qp = make_quadratic(101, 6, 5, 4, 3, 0.5, 2.0);
  const Monitor monitor = [&](int, int, const JointState& u, TraceRecord& r) {
    r.h = qp.h(u.x);
    r.grad_h_sq = qp.grad_h(u.x).squaredNorm();
  };
  for (std::uint64_t seed : {0, 7, 12345}) {
    SrbaConfig cfg;
    cfg.rho = 0.3;
    cfg.gamma = 0.2;
    cfg.q = 1;
    cfg.T = 100;
    cfg.R = kInf;
    cfg.seed = seed;
    cfg.record_states = true;
    const SolverRunResult a = srba_run(qp, cfg, monitor);
    const SolverRunResult b = fullbatch_gd_run(qp, {cfg, 0.0, 0.0}, monitor);
    REQUIRE(a.trace.size() == 101);
    CHECK(same_trace(a.trace, b.trace));
    CHECK(same_state(a.final_state, b.final_state));
    for (std::size_t r = 0; r < a.state_log.size(); ++r) {
      CHECK(same_state(a.state_log[r], b.state_log[r]));
    }
  }
}

TEST_CASE("stationary start stays at zero on the trivial instance") {
  TrivialProblem pb(2, 2, 3);
  SrbaConfig cfg;
  cfg.rho = 0.4;
  cfg.gamma = 0.4;
  cfg.q = 3;
  cfg.T = 5;
  cfg.R = 1.0;
  const SolverRunResult run = srba_run(pb, cfg);
  CHECK(run.final_state.z.norm() == 0.0);
  CHECK(run.final_state.v.norm() == 0.0);
  CHECK(run.final_state.x.norm() == 0.0);
}

TEST_CASE("tuned run drives the squared hypergradient below 1e-8") {
  const QuadraticBilevel qp = make_quadratic(103, 6, 6, 8, 8, 0.8, 2.0);
  SrbaConfig cfg;
  cfg.rho = 0.35;
  cfg.gamma = 0.25;
  cfg.q = 8;
  cfg.T = 400;
  cfg.R = kInf;
  cfg.seed = 3;
  const Monitor monitor = [&](int, int, const JointState& u, TraceRecord& r) {
    r.grad_h_sq = qp.grad_h(u.x).squaredNorm();
  };
  const SolverRunResult run = srba_run(qp, cfg, monitor);
  REQUIRE(run.status == RunStatus::ok);
  double best = kInf;
  for (const TraceRecord& r : run.trace) {
    if (r.grad_h_sq.has_value()) best = std::min(best, *r.grad_h_sq);
  }
  CHECK(best <= 1e-8);
}

TEST_CASE("the projection keeps every recorded v inside the ball") {
  const QuadraticBilevel qp = make_quadratic(107, 5, 4, 3, 3, 0.5, 2.0);
  SrbaConfig cfg;
  cfg.rho = 0.3;
  cfg.gamma = 0.2;
  cfg.q = 4;
  cfg.T = 30;
  cfg.R = 0.25;
  cfg.seed = 5;
  cfg.record_states = true;
  const SolverRunResult run = srba_run(qp, cfg);
  REQUIRE(run.status == RunStatus::ok);
  for (const JointState& u : run.state_log) {
    CHECK(u.v.norm() <= 0.25 + 1e-15);
  }
}

TEST_CASE("telescoping replay of the recursive estimates") {
  const QuadraticBilevel qp = make_quadratic(109, 5, 4, 3, 3, 0.5, 2.0);
  SrbaConfig cfg;
  cfg.rho = 0.2;
  cfg.gamma = 0.15;
  cfg.q = 5;
  cfg.T = 2;
  cfg.R = kInf;
  cfg.seed = 8;
  cfg.record_states = true;
  const SolverRunResult run = srba_run(qp, cfg);
  REQUIRE(run.status == RunStatus::ok);
  REQUIRE(run.estimate_log.size() == 10);
  REQUIRE(run.index_log.size() == 8);

  OracleLedger scratch;
  std::size_t draw = 0;
  for (int t = 0; t < 2; ++t) {
    const std::size_t base = static_cast<std::size_t>(t) * 5;
    // reset exactness: the k = 0 estimate is the full-batch direction
    const DirectionTriple full =
        full_directions(qp, run.state_log[base], scratch);
    CHECK((run.estimate_log[base].dz - cfg.rho * full.dz).norm() == 0.0);
    CHECK((run.estimate_log[base].dv - cfg.rho * full.dv).norm() == 0.0);
    CHECK((run.estimate_log[base].dx - cfg.gamma * full.dx).norm() == 0.0);

    DirectionTriple acc = full;
    for (int k = 1; k < 5; ++k, ++draw) {
      const DrawnIndices& idx = run.index_log[draw];
      const DirectionTriple dn = batch_directions(
          qp, run.state_log[base + static_cast<std::size_t>(k)], idx.is,
          idx.js, scratch);
      const DirectionTriple dp = batch_directions(
          qp, run.state_log[base + static_cast<std::size_t>(k) - 1], idx.is,
          idx.js, scratch);
      acc.dz += dn.dz - dp.dz;
      acc.dv += dn.dv - dp.dv;
      acc.dx += dn.dx - dp.dx;
      const DirectionTriple& est =
          run.estimate_log[base + static_cast<std::size_t>(k)];
      CHECK((est.dz / cfg.rho - acc.dz).norm() <= 1e-12);
      CHECK((est.dv / cfg.rho - acc.dv).norm() <= 1e-12);
      CHECK((est.dx / cfg.gamma - acc.dx).norm() <= 1e-12);
    }
  }
}

TEST_CASE("identical seeds give identical traces, different seeds differ") {
  const QuadraticBilevel qp = make_quadratic(113, 5, 4, 4, 4, 0.5, 2.0);
  SrbaConfig cfg;
  cfg.rho = 0.25;
  cfg.gamma = 0.2;
  cfg.q = 6;
  cfg.T = 10;
  cfg.R = kInf;
  cfg.seed = 99;
  cfg.record_states = true;
  const SolverRunResult a = srba_run(qp, cfg);
  const SolverRunResult b = srba_run(qp, cfg);
  CHECK(same_trace(a.trace, b.trace));
  REQUIRE(a.state_log.size() == b.state_log.size());
  for (std::size_t r = 0; r < a.state_log.size(); ++r) {
    CHECK(same_state(a.state_log[r], b.state_log[r]));
  }

  cfg.seed = 100;
  const SolverRunResult c = srba_run(qp, cfg);
  CHECK(!same_state(a.final_state, c.final_state));
}

TEST_CASE("divergence is detected and the trace stays finite") {
  const QuadraticBilevel qp = make_quadratic(127, 4, 4, 2, 2, 0.5, 2.0);
  SrbaConfig cfg;
  cfg.rho = 50.0;  // far above the stable range
  cfg.gamma = 50.0;
  cfg.q = 2;
  cfg.T = 500;
  cfg.R = kInf;
  const SolverRunResult run = srba_run(qp, cfg);
  CHECK(run.status == RunStatus::diverged);
  CHECK(run.trace.size() < 1001);
  CHECK(state_within_bounds(run.final_state));
}

TEST_CASE("ledger matches the accounting predicted from (T, q, n, m)") {
  const QuadraticBilevel qp = make_quadratic(131, 4, 3, 3, 2, 0.5, 2.0);
  const std::uint64_t n = 3, m = 2, T = 4;
  for (int q : {1, 4, 16}) {
    SrbaConfig cfg;
    cfg.rho = 0.05;
    cfg.gamma = 0.05;
    cfg.q = q;
    cfg.T = static_cast<int>(T);
    cfg.R = kInf;
    cfg.seed = 77;
    const SolverRunResult run = srba_run(qp, cfg);
    REQUIRE(run.status == RunStatus::ok);
    CHECK(run.trace.size() == T * static_cast<std::uint64_t>(q) + 1);
    for (std::size_t r = 1; r < run.trace.size(); ++r) {
      CHECK(run.trace[r].oracle_total >= run.trace[r - 1].oracle_total);
      const bool lex_increasing =
          run.trace[r].t > run.trace[r - 1].t ||
          (run.trace[r].t == run.trace[r - 1].t &&
           run.trace[r].k > run.trace[r - 1].k);
      CHECK(lex_increasing);
    }
    const std::uint64_t qq = static_cast<std::uint64_t>(q);
    CHECK(run.ledger.grad_F == T * (m + 2 * (qq - 1)));
    CHECK(run.ledger.grad1_G == T * (n + 2 * (qq - 1)));
    CHECK(run.ledger.hvp11_G == T * (n + 2 * (qq - 1)));
    CHECK(run.ledger.jvp21_G == T * (n + 2 * (qq - 1)));
  }

  // minibatches count every element of the batch
  SrbaConfig cfg;
  cfg.rho = 0.05;
  cfg.gamma = 0.05;
  cfg.q = 3;
  cfg.T = 2;
  cfg.R = kInf;
  cfg.batch_size = 2;
  const SolverRunResult run = srba_run(qp, cfg);
  CHECK(run.ledger.grad_F == 2 * (m + 2 * 2 * 2));
  CHECK(run.ledger.grad1_G == 2 * (n + 2 * 2 * 2));
}

TEST_CASE("invalid configurations are rejected") {
  const QuadraticBilevel qp = make_quadratic(137, 3, 3, 2, 2, 0.5, 2.0);
  SrbaConfig cfg;
  cfg.rho = 0.0;
  cfg.gamma = 0.1;
  CHECK_THROWS_AS(srba_run(qp, cfg), std::invalid_argument);
  cfg.rho = 0.1;
  cfg.q = 0;
  CHECK_THROWS_AS(srba_run(qp, cfg), std::invalid_argument);
  cfg.q = 1;
  // no L0_F on the quadratic instance: R must be explicit
  CHECK_THROWS_AS(srba_run(qp, cfg), std::invalid_argument);
}
