#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "srba/directions.hpp"
#include "srba/problem.hpp"
#include "srba/rng.hpp"
#include "srba/types.hpp"

namespace srba {

struct SrbaConfig {
  double rho = 0.0;    // step size for z and v, > 0
  double gamma = 0.0;  // step size for x, > 0
  int q = 1;           // inner-loop length, >= 1
  int T = 1;           // outer iterations, >= 1
  // Projection radius for v. <= 0 derives L0_F / mu_G from the problem
  // constants; +infinity disables the projection.
  double R = 0.0;
  std::uint64_t seed = 0;
  int batch_size = 1;
  bool record_states = false;  // keep per-row states and direction estimates
  bool timing = false;         // capture wall_ms per row
  std::optional<JointState> init;  // default: zeros
};

enum class RunStatus { ok, diverged };

struct SolverRunResult {
  JointState final_state;
  std::vector<TraceRecord> trace;
  OracleLedger ledger;
  RunStatus status = RunStatus::ok;
  // Inner-step draws in execution order, one entry per (t, k), k in [1, q-1].
  std::vector<DrawnIndices> index_log;
  // Filled when record_states is set: states aligned with trace rows, and the
  // scaled estimate triple in effect when leaving each row's state (one entry
  // per row except the last).
  std::vector<JointState> state_log;
  std::vector<DirectionTriple> estimate_log;
};

/// Row callback for metrics; evaluated at the recorded state. Implementations
/// must not touch the run ledger (use a scratch one for any oracle queries).
using Monitor =
    std::function<void(int t, int k, const JointState&, TraceRecord&)>;

/// Index source for the inner loop, k in [1, q-1]. Defaults to the seeded
/// stream; verification code injects fixed sequences to replay runs.
using IndexProvider = std::function<DrawnIndices(int t, int k)>;

/// One recursive update of the scaled estimate triple:
///   delta_z <- rho  (dz_new - dz_old) + delta_z
///   delta_v <- rho  (dv_new - dv_old) + delta_v
///   delta_x <- gamma(dx_new - dx_old) + delta_x
DirectionTriple sarah_step(const DirectionTriple& prev,
                           const DirectionTriple& new_sample,
                           const DirectionTriple& old_sample, double rho,
                           double gamma);

/// (rho dz, rho dv, gamma dx)
DirectionTriple scale_triple(const DirectionTriple& d, double rho,
                             double gamma);

/// u - delta, with the projection applied to v only.
JointState apply_step(const JointState& u, const DirectionTriple& scaled,
                      double R);

/// Resolves the projection radius: an explicit positive value wins, otherwise
/// L0_F / mu_G from the problem constants.
double resolve_radius(const BilevelProblem& pb, double requested);

/// Divergence guard: finite entries and every block norm <= 1e12.
bool state_within_bounds(const JointState& u);

/// Runs the recursive solver: per outer iteration, a full-batch reset of the
/// estimate triple followed by q-1 recursive inner updates at freshly sampled
/// index pairs, updating (z, v, x) simultaneously with the projection on v.
/// The trace has one row per reached iterate (T q + 1 rows when the run
/// completes); deterministic given (seed, config).
SolverRunResult srba_run(const BilevelProblem& pb, const SrbaConfig& config,
                         const Monitor& monitor = {},
                         const IndexProvider& provider = {});

}  // namespace srba
