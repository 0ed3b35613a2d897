#pragma once

#include <string>
#include <vector>

#include "srba/problem.hpp"
#include "srba/types.hpp"

namespace srba {

/// Solves the inner problem min_z G(z, x) to ||grad1_G(z, x)|| <= tol.
/// Quadratic instances take a direct linear solve; otherwise an accelerated
/// first-order iteration on the strongly convex inner objective is used.
/// Raises std::runtime_error with the residual if the iteration cap is hit.
/// `warm_start` (when given and well-sized) seeds the iteration.
Vector solve_inner(const BilevelProblem& pb, const Vector& x, double tol,
                   const Vector* warm_start = nullptr);

/// Solves nabla^2_{11} G(z, x) v = -grad1_F(z, x) by conjugate directions
/// against the Hessian-vector oracle (the matrix is never formed), to
/// ||nabla^2_{11} G v + grad1_F|| <= tol.
Vector solve_linear_system(const BilevelProblem& pb, const Vector& x,
                           const Vector& z, double tol);

/// Value function h(x) = F(z*(x), x) with z*(x) from solve_inner.
double objective_h(const BilevelProblem& pb, const Vector& x, double inner_tol,
                   const Vector* warm_start = nullptr);

/// Central-difference hypergradient: per coordinate, h is evaluated at
/// x ± h_step e_k with the inner problem solved to inner_tol.
Vector fd_hypergradient(const BilevelProblem& pb, const Vector& x,
                        double h_step, double inner_tol);

/// Exhaustive-path check of the mean-squared-error identity of the recursive
/// direction estimates: over all (n m)^{q-1} index paths of one outer
/// iteration started at u0 (projection disabled), compares
///   lhs(k) = E ||D^k - D(u^k)||^2   against
///   rhs(k) = sum_{r<=k} E ||D^r - D^{r-1}||^2
///          - sum_{r<=k} E ||D(u^r) - D(u^{r-1})||^2
/// for each direction component.
struct MseReport {
  struct Entry {
    int k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
  };
  std::vector<Entry> z, v, x;
  double max_abs_gap = 0.0;
  std::string to_json() const;
};

MseReport mse_enumerate(const BilevelProblem& pb, const JointState& u0, int q,
                        double rho, double gamma);

}  // namespace srba
