#include "srba/directions.hpp"

#include <stdexcept>

namespace srba {

DirectionTriple sampled_directions(const BilevelProblem& pb,
                                   const JointState& u, int i, int j,
                                   OracleLedger& ledger) {
  const OracleTuple q = query_oracle(pb, i, j, u.z, u.v, u.x, ledger);
  DirectionTriple d;
  d.dz = q.grad1_G;
  d.dv = q.hvp + q.grad1_F;
  d.dx = q.jvp + q.grad2_F;
  return d;
}

DirectionTriple batch_directions(const BilevelProblem& pb, const JointState& u,
                                 std::span<const int> is,
                                 std::span<const int> js,
                                 OracleLedger& ledger) {
  if (is.empty() || js.empty()) {
    throw std::invalid_argument("batch_directions: empty index batch");
  }
  Vector grad1_F = Vector::Zero(pb.inner_dim());
  Vector grad2_F = Vector::Zero(pb.outer_dim());
  Vector grad1_G = Vector::Zero(pb.inner_dim());
  Vector hvp = Vector::Zero(pb.inner_dim());
  Vector jvp = Vector::Zero(pb.outer_dim());

  const std::size_t b = std::min(is.size(), js.size());
  for (std::size_t s = 0; s < b; ++s) {
    const OracleTuple q =
        query_oracle(pb, is[s], js[s], u.z, u.v, u.x, ledger);
    grad1_F += q.grad1_F;
    grad2_F += q.grad2_F;
    grad1_G += q.grad1_G;
    hvp += q.hvp;
    jvp += q.jvp;
  }
  const double inv = 1.0 / static_cast<double>(b);
  DirectionTriple d;
  d.dz = grad1_G * inv;
  d.dv = hvp * inv + grad1_F * inv;
  d.dx = jvp * inv + grad2_F * inv;
  return d;
}

DirectionTriple full_directions(const BilevelProblem& pb, const JointState& u,
                                OracleLedger& ledger) {
  const OracleTuple q = full_batch(pb, u.z, u.v, u.x, ledger);
  DirectionTriple d;
  d.dz = q.grad1_G;
  d.dv = q.hvp + q.grad1_F;
  d.dx = q.jvp + q.grad2_F;
  return d;
}

Vector project_v(const Vector& v, double R) {
  if (!(R > 0.0)) {
    throw std::invalid_argument("project_v: radius must be positive");
  }
  if (!v.allFinite()) {
    throw std::domain_error("project_v: non-finite input");
  }
  Vector w = v;
  double nrm = w.norm();
  // A single rescale can land a hair outside R after rounding; iterate to a
  // fixed point so projecting twice is an exact no-op.
  while (nrm > R) {
    w *= R / nrm;
    nrm = w.norm();
  }
  return w;
}

JointState project_state(JointState u, double R) {
  u.v = project_v(u.v, R);
  return u;
}

}  // namespace srba
