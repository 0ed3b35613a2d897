#pragma once

#include <cstdint>

#include "srba/types.hpp"

namespace srba {

/// A bilevel finite-sum problem
///
///   min_x h(x) = F(z*(x), x),  z*(x) = argmin_z G(z, x),
///   F = (1/m) sum_j F_j,       G = (1/n) sum_i G_i,
///
/// with each G_i(., x) mu_G-strongly convex. Implementations expose the five
/// per-index oracle components. All methods are pure functions of their
/// arguments: problem data is immutable after construction and evaluation is
/// safe to call concurrently.
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;

  virtual int inner_dim() const = 0;  // p
  virtual int outer_dim() const = 0;  // d
  virtual int num_inner() const = 0;  // n, count of G_i
  virtual int num_outer() const = 0;  // m, count of F_j

  virtual const RegularityConstants& constants() const = 0;

  /// Gradient of F_j; both blocks come from one evaluation.
  virtual void grad_F(int j, const Vector& z, const Vector& x, Vector& g1,
                      Vector& g2) const = 0;

  virtual void grad1_G(int i, const Vector& z, const Vector& x,
                       Vector& g) const = 0;

  /// Hessian-vector product (nabla^2_{11} G_i) v; the matrix is never formed.
  virtual void hvp11_G(int i, const Vector& z, const Vector& x,
                       const Vector& v, Vector& out) const = 0;

  /// Jacobian-vector product (nabla^2_{21} G_i) v, output in R^d.
  virtual void jvp21_G(int i, const Vector& z, const Vector& x,
                       const Vector& v, Vector& out) const = 0;

  /// Objective values, for monitoring and verification only; value queries
  /// are not part of the oracle tuple and are not ledger-counted.
  virtual double value_F(int j, const Vector& z, const Vector& x) const = 0;
  virtual double value_G(int i, const Vector& z, const Vector& x) const = 0;
};

struct OracleTuple {
  Vector grad1_F;
  Vector grad2_F;
  Vector grad1_G;
  Vector hvp;
  Vector jvp;
};

// Individually counted queries. Callers may evaluate any subset; the ledger
// records only the kinds actually evaluated. Index out of range raises
// std::out_of_range, non-finite input std::domain_error.
void eval_grad_F(const BilevelProblem& pb, int j, const Vector& z,
                 const Vector& x, Vector& g1, Vector& g2, OracleLedger& ledger);
void eval_grad1_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, Vector& g, OracleLedger& ledger);
void eval_hvp11_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, const Vector& v, Vector& out,
                  OracleLedger& ledger);
void eval_jvp21_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, const Vector& v, Vector& out,
                  OracleLedger& ledger);

/// The five oracle components at (z, v, x) for indices (i, j). Increments the
/// ledger by one query of each kind.
OracleTuple query_oracle(const BilevelProblem& pb, int i, int j,
                         const Vector& z, const Vector& v, const Vector& x,
                         OracleLedger& ledger);

/// Arithmetic means over j of the F components and over i of the G
/// components. Ledger: m grad_F, n grad1_G, n hvp11_G, n jvp21_G.
OracleTuple full_batch(const BilevelProblem& pb, const Vector& z,
                       const Vector& v, const Vector& x, OracleLedger& ledger);

/// Mean outer value F(z, x) = (1/m) sum_j F_j(z, x). Not ledger-counted.
double full_value_F(const BilevelProblem& pb, const Vector& z,
                    const Vector& x);

/// Mean inner value G(z, x). Not ledger-counted.
double full_value_G(const BilevelProblem& pb, const Vector& z,
                    const Vector& x);

// Diagnostics. Both draw their probe points from a seeded generator and are
// deterministic.

/// Monotonicity-gap probe of mu-strong convexity of each G_i in z:
/// <grad1_G_i(z1) - grad1_G_i(z2), z1 - z2> >= mu ||z1 - z2||^2.
bool probe_strong_convexity(const BilevelProblem& pb, double mu, int trials,
                            std::uint64_t seed, double rel_tol = 1e-9);

/// Linearity of the Hessian-vector query in v, to 1e-10 relative.
bool probe_hvp_linearity(const BilevelProblem& pb, int trials,
                         std::uint64_t seed, double rel_tol = 1e-10);

}  // namespace srba
