#pragma once

#include <string>
#include <vector>

#include "srba/problems/quadratic.hpp"

namespace srba::bench {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Individual suites; each is usable against an arbitrary instance so tests
// can aim them at deliberately broken oracles.
VerifyResult check_hypergradient_exactness(const QuadraticBilevel& qp,
                                           std::uint64_t seed);
/// Cross-oracle consistency: the assembled D_x at a solved (z, v) must agree
/// with the finite-difference hypergradient, which never touches the
/// second-order oracles. A corrupted Hessian-vector or Jacobian-vector
/// oracle breaks the agreement.
VerifyResult check_hypergradient_consistency(const BilevelProblem& pb,
                                             std::uint64_t seed);
VerifyResult check_mse_identity(const BilevelProblem& pb, std::uint64_t seed);
VerifyResult check_projection_properties(std::uint64_t seed);
VerifyResult check_zero_chain();
VerifyResult check_unbiasedness(const BilevelProblem& pb, std::uint64_t seed);
VerifyResult check_ledger_accounting(const BilevelProblem& pb);

/// All suites on freshly built reference instances, filtered by substring
/// (empty matches everything).
std::vector<VerifyResult> run_verify_suite(const std::string& filter);

}  // namespace srba::bench
