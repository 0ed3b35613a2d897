#include "verify_checks.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "srba/directions.hpp"
#include "srba/lowerbound.hpp"
#include "srba/rng.hpp"
#include "srba/solver.hpp"
#include "srba/verifier.hpp"

namespace srba::bench {

namespace {

Vector random_vector(Xoshiro256& gen, int dim) {
  Vector w(dim);
  for (int k = 0; k < dim; ++k) w[k] = gen.normal();
  return w;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

VerifyResult check_hypergradient_exactness(const QuadraticBilevel& qp,
                                           std::uint64_t seed) {
  VerifyResult res{"hypergradient", true, ""};
  Xoshiro256 gen(seed);
  double worst_exact = 0.0, worst_fd = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Vector x = random_vector(gen, qp.outer_dim());
    const Vector zs = qp.z_star(x);
    const Vector vs = qp.v_star(x);
    const Vector gh = qp.grad_h(x);
    OracleLedger scratch;
    const DirectionTriple full = full_directions(qp, {zs, vs, x}, scratch);
    worst_exact = std::max(
        worst_exact, (full.dx - gh).norm() / (1.0 + gh.norm()));
    const Vector fd = fd_hypergradient(qp, x, 1e-4, 1e-12);
    worst_fd = std::max(worst_fd, (fd - gh).norm() / (1.0 + gh.norm()));
  }
  res.pass = worst_exact <= 1e-10 && worst_fd <= 1e-5;
  res.detail = "exact " + fmt(worst_exact) + ", fd " + fmt(worst_fd);
  return res;
}

VerifyResult check_hypergradient_consistency(const BilevelProblem& pb,
                                             std::uint64_t seed) {
  VerifyResult res{"consistency", true, ""};
  Xoshiro256 gen(seed);
  const Vector x = random_vector(gen, pb.outer_dim());
  try {
    const Vector z = solve_inner(pb, x, 1e-10);
    const Vector v = solve_linear_system(pb, x, z, 1e-10);
    OracleLedger scratch;
    const DirectionTriple d = full_directions(pb, {z, v, x}, scratch);
    const Vector fd = fd_hypergradient(pb, x, 1e-4, 1e-12);
    const double gap = (d.dx - fd).norm() / (1.0 + fd.norm());
    res.pass = gap <= 1e-4;
    res.detail = "normalized assembled-vs-fd gap " + fmt(gap);
  } catch (const std::exception& e) {
    res.pass = false;
    res.detail = std::string("solver failure: ") + e.what();
  }
  return res;
}

VerifyResult check_mse_identity(const BilevelProblem& pb, std::uint64_t seed) {
  VerifyResult res{"mse", true, ""};
  Xoshiro256 gen(seed);
  JointState u0{random_vector(gen, pb.inner_dim()),
                random_vector(gen, pb.inner_dim()),
                random_vector(gen, pb.outer_dim())};
  const MseReport report = mse_enumerate(pb, u0, 3, 0.1, 0.08);
  res.pass = report.max_abs_gap <= 1e-10;
  res.detail = "max |lhs - rhs| " + fmt(report.max_abs_gap);
  return res;
}

VerifyResult check_projection_properties(std::uint64_t seed) {
  VerifyResult res{"projection", true, ""};
  Xoshiro256 gen(seed);
  double worst_gap = 0.0;
  for (double R : {0.5, 1.0, 2.0}) {
    for (int trial = 0; trial < 300; ++trial) {
      const Vector v1 = 2.0 * random_vector(gen, 6);
      const Vector v2 = 2.0 * random_vector(gen, 6);
      const Vector p1 = project_v(v1, R);
      const Vector p2 = project_v(v2, R);
      if (!(project_v(p1, R).array() == p1.array()).all()) {
        res.pass = false;
        res.detail = "idempotence violated";
        return res;
      }
      worst_gap =
          std::max(worst_gap, (p1 - p2).norm() - (v1 - v2).norm());
      if (p1.norm() > R) {
        res.pass = false;
        res.detail = "norm above radius";
        return res;
      }
    }
  }
  res.pass = worst_gap <= 1e-12;
  res.detail = "nonexpansiveness slack " + fmt(worst_gap);
  return res;
}

VerifyResult check_zero_chain() {
  VerifyResult res{"zero_chain", true, ""};
  const int d = 32;
  Xoshiro256 gen(99);
  for (int k : {0, 1, d / 2, d - 1}) {
    Vector x = Vector::Zero(d + 1);
    for (int c = 0; c < k; ++c) x[c] = gen.normal();
    const Vector grad = f_nc_value_grad(x, 0.5, d).second;
    for (int c = k + 1; c < d + 1; ++c) {
      if (grad[c] != 0.0) {
        res.pass = false;
        res.detail = "nonzero past the chain front at k=" + std::to_string(k);
        return res;
      }
    }
  }
  res.detail = "exact zeros past the front";
  return res;
}

VerifyResult check_unbiasedness(const BilevelProblem& pb, std::uint64_t seed) {
  VerifyResult res{"unbiasedness", true, ""};
  Xoshiro256 gen(seed);
  const JointState u{random_vector(gen, pb.inner_dim()),
                     random_vector(gen, pb.inner_dim()),
                     random_vector(gen, pb.outer_dim())};
  OracleLedger scratch;
  const DirectionTriple full = full_directions(pb, u, scratch);
  DirectionTriple acc{Vector::Zero(pb.inner_dim()),
                      Vector::Zero(pb.inner_dim()),
                      Vector::Zero(pb.outer_dim())};
  for (int i = 0; i < pb.num_inner(); ++i) {
    for (int j = 0; j < pb.num_outer(); ++j) {
      const DirectionTriple s = sampled_directions(pb, u, i, j, scratch);
      acc.dz += s.dz;
      acc.dv += s.dv;
      acc.dx += s.dx;
    }
  }
  const double count =
      static_cast<double>(pb.num_inner()) * pb.num_outer();
  const double gap = std::max({(acc.dz / count - full.dz).norm(),
                               (acc.dv / count - full.dv).norm(),
                               (acc.dx / count - full.dx).norm()});
  res.pass = gap <= 1e-12;
  res.detail = "max component gap " + fmt(gap);
  return res;
}

VerifyResult check_ledger_accounting(const BilevelProblem& pb) {
  VerifyResult res{"ledger", true, ""};
  SrbaConfig cfg;
  cfg.rho = 1e-3;
  cfg.gamma = 1e-3;
  cfg.q = 4;
  cfg.T = 3;
  cfg.seed = 11;
  cfg.R = std::numeric_limits<double>::infinity();
  const SolverRunResult run = srba_run(pb, cfg);
  const std::uint64_t n = static_cast<std::uint64_t>(pb.num_inner());
  const std::uint64_t m = static_cast<std::uint64_t>(pb.num_outer());
  const std::uint64_t T = 3, q = 4;
  const bool ok = run.ledger.grad_F == T * (m + 2 * (q - 1)) &&
                  run.ledger.grad1_G == T * (n + 2 * (q - 1)) &&
                  run.ledger.hvp11_G == T * (n + 2 * (q - 1)) &&
                  run.ledger.jvp21_G == T * (n + 2 * (q - 1));
  res.pass = ok;
  res.detail = ok ? "counts match (T, q, n, m) prediction" : "count mismatch";
  return res;
}

std::vector<VerifyResult> run_verify_suite(const std::string& filter) {
  const QuadraticBilevel qp = make_quadratic(1234, 6, 5, 2, 2, 0.8, 2.0);
  const QuadraticBilevel qp_big = make_quadratic(77, 5, 4, 4, 4, 0.8, 2.0);

  std::vector<VerifyResult> all;
  const auto wanted = [&](const char* name) {
    return filter.empty() || std::string(name).find(filter) != std::string::npos;
  };
  if (wanted("hypergradient"))
    all.push_back(check_hypergradient_exactness(qp, 5));
  if (wanted("consistency"))
    all.push_back(check_hypergradient_consistency(qp, 15));
  if (wanted("mse")) all.push_back(check_mse_identity(qp, 6));
  if (wanted("projection")) all.push_back(check_projection_properties(7));
  if (wanted("zero_chain")) all.push_back(check_zero_chain());
  if (wanted("unbiasedness")) all.push_back(check_unbiasedness(qp_big, 8));
  if (wanted("ledger")) all.push_back(check_ledger_accounting(qp_big));
  return all;
}

}  // namespace srba::bench
