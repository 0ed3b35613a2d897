#include "srba/verifier.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "srba/directions.hpp"
#include "srba/problems/quadratic.hpp"
#include "srba/solver.hpp"

namespace srba {

namespace {

Vector full_grad1_G(const BilevelProblem& pb, const Vector& z,
                    const Vector& x) {
  Vector acc = Vector::Zero(pb.inner_dim());
  Vector g(pb.inner_dim());
  for (int i = 0; i < pb.num_inner(); ++i) {
    pb.grad1_G(i, z, x, g);
    acc += g;
  }
  return acc / static_cast<double>(pb.num_inner());
}

Vector full_grad1_F(const BilevelProblem& pb, const Vector& z,
                    const Vector& x) {
  Vector acc = Vector::Zero(pb.inner_dim());
  Vector g1(pb.inner_dim()), g2(pb.outer_dim());
  for (int j = 0; j < pb.num_outer(); ++j) {
    pb.grad_F(j, z, x, g1, g2);
    acc += g1;
  }
  return acc / static_cast<double>(pb.num_outer());
}

Vector full_hvp(const BilevelProblem& pb, const Vector& z, const Vector& x,
                const Vector& v) {
  Vector acc = Vector::Zero(pb.inner_dim());
  Vector h(pb.inner_dim());
  for (int i = 0; i < pb.num_inner(); ++i) {
    pb.hvp11_G(i, z, x, v, h);
    acc += h;
  }
  return acc / static_cast<double>(pb.num_inner());
}

}  // namespace

Vector solve_inner(const BilevelProblem& pb, const Vector& x, double tol,
                   const Vector* warm_start) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_inner: tol must be > 0");

  if (const auto* qp = dynamic_cast<const QuadraticBilevel*>(&pb)) {
    return qp->z_star(x);
  }

  const RegularityConstants& c = pb.constants();
  const double mu = c.mu_G;
  const double L = c.L1_G.value_or(mu * 1e4);
  if (!(mu > 0.0)) {
    throw std::invalid_argument("solve_inner: problem declares no mu_G > 0");
  }
  // Nesterov's accelerated scheme for strongly convex objectives with
  // constant momentum (sqrt(kappa)-1)/(sqrt(kappa)+1).
  const double kappa = L / mu;
  const double momentum =
      (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);

  Vector z = (warm_start != nullptr && warm_start->size() == pb.inner_dim())
                 ? *warm_start
                 : Vector::Zero(pb.inner_dim());
  Vector z_prev = z;
  const int max_iter = 200000;
  double res = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector y = z + momentum * (z - z_prev);
    const Vector gy = full_grad1_G(pb, y, x);
    z_prev = z;
    z = y - gy / L;
    res = full_grad1_G(pb, z, x).norm();
    if (res <= tol) return z;
  }
  std::ostringstream msg;
  msg << "solve_inner: no convergence after " << max_iter
      << " iterations, residual " << res << " > tol " << tol;
  throw std::runtime_error(msg.str());
}

Vector solve_linear_system(const BilevelProblem& pb, const Vector& x,
                           const Vector& z, double tol) {
  if (!(tol > 0.0))
    throw std::invalid_argument("solve_linear_system: tol must be > 0");
  const int p = pb.inner_dim();
  const Vector b = -full_grad1_F(pb, z, x);

  Vector v = Vector::Zero(p);
  Vector r = b;  // b - A*0
  Vector dir = r;
  double rs = r.squaredNorm();
  if (std::sqrt(rs) <= tol) return v;

  const int max_iter = std::max(10 * p, 200);
  for (int it = 0; it < max_iter; ++it) {
    const Vector Ad = full_hvp(pb, z, x, dir);
    const double alpha = rs / dir.dot(Ad);
    v += alpha * dir;
    r -= alpha * Ad;
    const double rs_next = r.squaredNorm();
    if (std::sqrt(rs_next) <= tol) {
      // re-check against the defining residual to guard drift
      const double true_res = (full_hvp(pb, z, x, v) - b).norm();
      if (true_res <= tol) return v;
      r = b - full_hvp(pb, z, x, v);
      rs = r.squaredNorm();
      dir = r;
      continue;
    }
    dir = r + (rs_next / rs) * dir;
    rs = rs_next;
  }
  std::ostringstream msg;
  msg << "solve_linear_system: no convergence, residual " << std::sqrt(rs)
      << " > tol " << tol;
  throw std::runtime_error(msg.str());
}

double objective_h(const BilevelProblem& pb, const Vector& x, double inner_tol,
                   const Vector* warm_start) {
  const Vector z = solve_inner(pb, x, inner_tol, warm_start);
  return full_value_F(pb, z, x);
}

Vector fd_hypergradient(const BilevelProblem& pb, const Vector& x,
                        double h_step, double inner_tol) {
  if (!(h_step > 0.0))
    throw std::invalid_argument("fd_hypergradient: h_step must be > 0");
  const int d = pb.outer_dim();
  Vector g(d);
  Vector xp = x, xm = x;
  for (int k = 0; k < d; ++k) {
    xp[k] = x[k] + h_step;
    xm[k] = x[k] - h_step;
    const double hp = objective_h(pb, xp, inner_tol);
    const double hm = objective_h(pb, xm, inner_tol);
    g[k] = (hp - hm) / (2.0 * h_step);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return g;
}

MseReport mse_enumerate(const BilevelProblem& pb, const JointState& u0, int q,
                        double rho, double gamma) {
  if (q < 2) throw std::invalid_argument("mse_enumerate: q must be >= 2");
  const int n = pb.num_inner();
  const int m = pb.num_outer();
  const double pairs = static_cast<double>(n) * m;
  const double path_count_f = std::pow(pairs, q - 1);
  if (path_count_f > 1e4) {
    throw std::runtime_error(
        "mse_enumerate: (n m)^(q-1) exceeds the enumeration budget of 1e4");
  }
  const long path_count = static_cast<long>(std::llround(path_count_f));
  const long pair_count = static_cast<long>(n) * m;
  const double weight = 1.0 / path_count_f;

  // Accumulators per component, indexed by k (0..q-1): lhs terms and the
  // per-step expectations that build the two residual sums.
  std::vector<std::array<double, 3>> lhs(q, {0.0, 0.0, 0.0});
  std::vector<std::array<double, 3>> step_full(q, {0.0, 0.0, 0.0});
  std::vector<std::array<double, 3>> step_est(q, {0.0, 0.0, 0.0});

  SrbaConfig cfg;
  cfg.rho = rho;
  cfg.gamma = gamma;
  cfg.q = q;
  cfg.T = 1;
  cfg.R = std::numeric_limits<double>::infinity();  // identity is stated
                                                    // without the projection
  cfg.record_states = true;
  cfg.init = u0;

  std::vector<int> path(static_cast<std::size_t>(q - 1), 0);
  for (long code = 0; code < path_count; ++code) {
    long rem = code;
    for (int k = 0; k < q - 1; ++k) {
      path[static_cast<std::size_t>(k)] = static_cast<int>(rem % pair_count);
      rem /= pair_count;
    }
    const IndexProvider provider = [&](int, int k) {
      const int c = path[static_cast<std::size_t>(k - 1)];
      return DrawnIndices{{c % n}, {c / n}};
    };
    // replay through the solver's own update code
    const SolverRunResult run = srba_run(pb, cfg, {}, provider);

    OracleLedger scratch;
    std::vector<DirectionTriple> full(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) {
      full[static_cast<std::size_t>(k)] =
          full_directions(pb, run.state_log[static_cast<std::size_t>(k)],
                          scratch);
    }
    std::vector<DirectionTriple> est(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) {
      const DirectionTriple& scaled =
          run.estimate_log[static_cast<std::size_t>(k)];
      est[static_cast<std::size_t>(k)] = {scaled.dz / rho, scaled.dv / rho,
                                          scaled.dx / gamma};
    }

    for (int k = 1; k < q; ++k) {
      const auto& ek = est[static_cast<std::size_t>(k)];
      const auto& fk = full[static_cast<std::size_t>(k)];
      const auto& ep = est[static_cast<std::size_t>(k - 1)];
      const auto& fp = full[static_cast<std::size_t>(k - 1)];
      lhs[static_cast<std::size_t>(k)][0] +=
          weight * (ek.dz - fk.dz).squaredNorm();
      lhs[static_cast<std::size_t>(k)][1] +=
          weight * (ek.dv - fk.dv).squaredNorm();
      lhs[static_cast<std::size_t>(k)][2] +=
          weight * (ek.dx - fk.dx).squaredNorm();
      step_full[static_cast<std::size_t>(k)][0] +=
          weight * (fk.dz - fp.dz).squaredNorm();
      step_full[static_cast<std::size_t>(k)][1] +=
          weight * (fk.dv - fp.dv).squaredNorm();
      step_full[static_cast<std::size_t>(k)][2] +=
          weight * (fk.dx - fp.dx).squaredNorm();
      step_est[static_cast<std::size_t>(k)][0] +=
          weight * (ek.dz - ep.dz).squaredNorm();
      step_est[static_cast<std::size_t>(k)][1] +=
          weight * (ek.dv - ep.dv).squaredNorm();
      step_est[static_cast<std::size_t>(k)][2] +=
          weight * (ek.dx - ep.dx).squaredNorm();
    }
  }

  MseReport report;
  std::array<double, 3> sum_full{0.0, 0.0, 0.0};
  std::array<double, 3> sum_est{0.0, 0.0, 0.0};
  for (int k = 1; k < q; ++k) {
    for (int cmp = 0; cmp < 3; ++cmp) {
      sum_full[static_cast<std::size_t>(cmp)] +=
          step_full[static_cast<std::size_t>(k)][static_cast<std::size_t>(cmp)];
      sum_est[static_cast<std::size_t>(cmp)] +=
          step_est[static_cast<std::size_t>(k)][static_cast<std::size_t>(cmp)];
    }
    const auto rhs = [&](int cmp) {
      return sum_est[static_cast<std::size_t>(cmp)] -
             sum_full[static_cast<std::size_t>(cmp)];
    };
    report.z.push_back({k, lhs[static_cast<std::size_t>(k)][0], rhs(0)});
    report.v.push_back({k, lhs[static_cast<std::size_t>(k)][1], rhs(1)});
    report.x.push_back({k, lhs[static_cast<std::size_t>(k)][2], rhs(2)});
  }
  for (const auto* comp : {&report.z, &report.v, &report.x}) {
    for (const auto& entry : *comp) {
      report.max_abs_gap =
          std::max(report.max_abs_gap, std::abs(entry.lhs - entry.rhs));
    }
  }
  return report;
}

std::string MseReport::to_json() const {
  nlohmann::json j;
  const auto dump = [](const std::vector<Entry>& entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Entry& e : entries) {
      arr.push_back({{"k", e.k}, {"lhs", e.lhs}, {"rhs", e.rhs}});
    }
    return arr;
  };
  j["z"] = dump(z);
  j["v"] = dump(v);
  j["x"] = dump(x);
  j["max_abs_gap"] = max_abs_gap;
  return j.dump(2);
}

}  // namespace srba
