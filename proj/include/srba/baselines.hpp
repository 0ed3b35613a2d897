#pragma once

#include "srba/solver.hpp"

namespace srba {

/// Baseline configuration: SrbaConfig with q ignored, plus per-variable step
/// decay. Steps at iteration t (0-based) are rho (t+1)^{-a} and
/// gamma (t+1)^{-b}; a = b = 0 gives constant steps.
struct BaselineConfig {
  SrbaConfig base;
  double decay_a = 0.0;
  double decay_b = 0.0;
};

/// Full-batch bilevel gradient descent: at each iteration the full-batch
/// directions are computed and all three variables step simultaneously, with
/// the projection on v. With constant steps the iterates coincide exactly
/// with srba_run at q = 1.
SolverRunResult fullbatch_gd_run(const BilevelProblem& pb,
                                 const BaselineConfig& config,
                                 const Monitor& monitor = {});

/// Unbiased single-sample (or minibatch) stochastic scheme: each iteration
/// draws fresh index batches, computes the sampled directions and steps with
/// the decayed step sizes.
SolverRunResult soba_run(const BilevelProblem& pb, const BaselineConfig& config,
                         const Monitor& monitor = {},
                         const IndexProvider& provider = {});

}  // namespace srba
