#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "config.hpp"
#include "srba/lowerbound.hpp"
#include "srba/problem.hpp"
#include "srba/problems/datacleaning.hpp"
#include "srba/problems/quadratic.hpp"
#include "srba/solver.hpp"

namespace srba::bench {

/// A constructed problem plus whatever closed-form handles the kind offers;
/// monitors and checks use them when present.
struct BuiltProblem {
  std::shared_ptr<const BilevelProblem> problem;
  std::shared_ptr<const QuadraticBilevel> quadratic;  // kind == quadratic
  std::optional<WorstCaseInstance> worstcase;         // kind == worstcase
  std::vector<bool> corruption_mask;                  // kind == datacleaning
};

BuiltProblem build_problem(const ProblemSpec& spec);

/// Monitor for trace metrics: exact h and ||grad h||^2 on closed-form kinds;
/// on data kinds, h every `h_every` outer resets (warm-started inner solves)
/// and an optional finite-difference gradient every `fd_grad_every` resets.
Monitor make_monitor(const BuiltProblem& built, int h_every,
                     int fd_grad_every);

}  // namespace srba::bench
