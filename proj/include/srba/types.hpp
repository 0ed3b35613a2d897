#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace srba {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Joint variable u = (z, v, x): inner variable, linear-system variable and
/// outer variable.
struct JointState {
  Vector z;
  Vector v;
  Vector x;
};

/// A direction triple (dz, dv, dx), sampled or full batch.
struct DirectionTriple {
  Vector dz;
  Vector dv;
  Vector dx;
};

/// Oracle-query counts by kind. One grad_F query returns both gradient blocks
/// and counts once; Hessian-vector and Jacobian-vector queries count
/// separately. A solver run owns its ledger exclusively.
struct OracleLedger {
  std::uint64_t grad_F = 0;
  std::uint64_t grad1_G = 0;
  std::uint64_t hvp11_G = 0;
  std::uint64_t jvp21_G = 0;

  std::uint64_t total() const { return grad_F + grad1_G + hvp11_G + jvp21_G; }

  /// Element count under the five-component tuple convention, where a grad_F
  /// query contributes its two blocks.
  std::uint64_t elements() const {
    return 2 * grad_F + grad1_G + hvp11_G + jvp21_G;
  }
};

/// Regularity constants of a problem instance. Exact for closed-form
/// problems, declared estimates for data problems; only the projection
/// radius and diagnostics consume them.
struct RegularityConstants {
  std::optional<double> L0_F;
  std::optional<double> L1_F;
  std::optional<double> L2_F;
  std::optional<double> L1_G;
  std::optional<double> L2_G;
  std::optional<double> L3_G;
  double mu_G = 0.0;  // strong-convexity modulus of each G_i, > 0
};

/// One metrics row per iterate. Oracle counts are cumulative at the moment
/// the recorded state was reached.
struct TraceRecord {
  int t = 0;
  int k = 0;
  std::uint64_t oracle_total = 0;
  std::uint64_t oracle_grad_F = 0;
  std::uint64_t oracle_grad1_G = 0;
  std::uint64_t oracle_hvp = 0;
  std::uint64_t oracle_jvp = 0;
  std::optional<double> h;          // objective value, when computable
  std::optional<double> grad_h_sq;  // squared hypergradient norm
  std::optional<double> subopt;     // h - h*, filled once h* is known
  std::optional<double> wall_ms;    // wall clock, when timing is enabled
};

}  // namespace srba
