#pragma once

#include <span>

#include "srba/problem.hpp"
#include "srba/types.hpp"

namespace srba {

/// Sampled directions at u = (z, v, x) for one index pair:
///   dz = grad1_G_i(z, x)
///   dv = hvp11_G_i(z, x) v + grad1_F_j(z, x)
///   dx = jvp21_G_i(z, x) v + grad2_F_j(z, x)
/// Queries exactly one oracle of each kind.
DirectionTriple sampled_directions(const BilevelProblem& pb,
                                   const JointState& u, int i, int j,
                                   OracleLedger& ledger);

/// Minibatch directions: componentwise average of sampled_directions over
/// the index pairs (is[b], js[b]). Queries is.size() oracles of each kind.
DirectionTriple batch_directions(const BilevelProblem& pb, const JointState& u,
                                 std::span<const int> is,
                                 std::span<const int> js,
                                 OracleLedger& ledger);

/// Full-batch directions, i.e. the average of the sampled directions over
/// all (i, j) pairs, computed from one full_batch sweep.
DirectionTriple full_directions(const BilevelProblem& pb, const JointState& u,
                                OracleLedger& ledger);

/// Euclidean projection onto the ball of radius R (> 0, may be +infinity).
/// Returns v unchanged when ||v|| <= R, else rescales; the result is an exact
/// fixed point, so re-projection returns it bit-for-bit.
Vector project_v(const Vector& v, double R);

/// Projects the v component only; z and x pass through.
JointState project_state(JointState u, double R);

}  // namespace srba
