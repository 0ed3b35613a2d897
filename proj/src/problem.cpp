#include "srba/problem.hpp"

#include <stdexcept>
#include <string>

#include "srba/rng.hpp"

namespace srba {

namespace {

void check_index(int idx, int count, const char* what) {
  if (idx < 0 || idx >= count) {
    throw std::out_of_range(std::string(what) + " index " +
                            std::to_string(idx) + " out of range [0, " +
                            std::to_string(count) + ")");
  }
}

void check_finite(const Vector& w, const char* what) {
  if (!w.allFinite()) {
    throw std::domain_error(std::string("non-finite entries in ") + what);
  }
}

Vector random_vector(Xoshiro256& gen, int dim, double scale = 1.0) {
  Vector w(dim);
  for (int k = 0; k < dim; ++k) w[k] = scale * gen.normal();
  return w;
}

}  // namespace

void eval_grad_F(const BilevelProblem& pb, int j, const Vector& z,
                 const Vector& x, Vector& g1, Vector& g2,
                 OracleLedger& ledger) {
  check_index(j, pb.num_outer(), "outer");
  check_finite(z, "z");
  check_finite(x, "x");
  pb.grad_F(j, z, x, g1, g2);
  ++ledger.grad_F;
}

void eval_grad1_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, Vector& g, OracleLedger& ledger) {
  check_index(i, pb.num_inner(), "inner");
  check_finite(z, "z");
  check_finite(x, "x");
  pb.grad1_G(i, z, x, g);
  ++ledger.grad1_G;
}

void eval_hvp11_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, const Vector& v, Vector& out,
                  OracleLedger& ledger) {
  check_index(i, pb.num_inner(), "inner");
  check_finite(z, "z");
  check_finite(x, "x");
  check_finite(v, "v");
  pb.hvp11_G(i, z, x, v, out);
  ++ledger.hvp11_G;
}

void eval_jvp21_G(const BilevelProblem& pb, int i, const Vector& z,
                  const Vector& x, const Vector& v, Vector& out,
                  OracleLedger& ledger) {
  check_index(i, pb.num_inner(), "inner");
  check_finite(z, "z");
  check_finite(x, "x");
  check_finite(v, "v");
  pb.jvp21_G(i, z, x, v, out);
  ++ledger.jvp21_G;
}

OracleTuple query_oracle(const BilevelProblem& pb, int i, int j,
                         const Vector& z, const Vector& v, const Vector& x,
                         OracleLedger& ledger) {
  OracleTuple out;
  eval_grad_F(pb, j, z, x, out.grad1_F, out.grad2_F, ledger);
  eval_grad1_G(pb, i, z, x, out.grad1_G, ledger);
  eval_hvp11_G(pb, i, z, x, v, out.hvp, ledger);
  eval_jvp21_G(pb, i, z, x, v, out.jvp, ledger);
  return out;
}

OracleTuple full_batch(const BilevelProblem& pb, const Vector& z,
                       const Vector& v, const Vector& x,
                       OracleLedger& ledger) {
  const int n = pb.num_inner();
  const int m = pb.num_outer();
  check_finite(z, "z");
  check_finite(v, "v");
  check_finite(x, "x");

  OracleTuple acc;
  acc.grad1_F = Vector::Zero(pb.inner_dim());
  acc.grad2_F = Vector::Zero(pb.outer_dim());
  acc.grad1_G = Vector::Zero(pb.inner_dim());
  acc.hvp = Vector::Zero(pb.inner_dim());
  acc.jvp = Vector::Zero(pb.outer_dim());

  Vector g1(pb.inner_dim()), g2(pb.outer_dim());
  for (int j = 0; j < m; ++j) {
    pb.grad_F(j, z, x, g1, g2);
    acc.grad1_F += g1;
    acc.grad2_F += g2;
  }
  Vector gz(pb.inner_dim()), hv(pb.inner_dim()), jv(pb.outer_dim());
  for (int i = 0; i < n; ++i) {
    pb.grad1_G(i, z, x, gz);
    acc.grad1_G += gz;
    pb.hvp11_G(i, z, x, v, hv);
    acc.hvp += hv;
    pb.jvp21_G(i, z, x, v, jv);
    acc.jvp += jv;
  }
  acc.grad1_F /= static_cast<double>(m);
  acc.grad2_F /= static_cast<double>(m);
  acc.grad1_G /= static_cast<double>(n);
  acc.hvp /= static_cast<double>(n);
  acc.jvp /= static_cast<double>(n);

  ledger.grad_F += static_cast<std::uint64_t>(m);
  ledger.grad1_G += static_cast<std::uint64_t>(n);
  ledger.hvp11_G += static_cast<std::uint64_t>(n);
  ledger.jvp21_G += static_cast<std::uint64_t>(n);
  return acc;
}

double full_value_F(const BilevelProblem& pb, const Vector& z,
                    const Vector& x) {
  double s = 0.0;
  for (int j = 0; j < pb.num_outer(); ++j) s += pb.value_F(j, z, x);
  return s / static_cast<double>(pb.num_outer());
}

double full_value_G(const BilevelProblem& pb, const Vector& z,
                    const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < pb.num_inner(); ++i) s += pb.value_G(i, z, x);
  return s / static_cast<double>(pb.num_inner());
}

bool probe_strong_convexity(const BilevelProblem& pb, double mu, int trials,
                            std::uint64_t seed, double rel_tol) {
  Xoshiro256 gen(seed);
  const int p = pb.inner_dim();
  const int d = pb.outer_dim();
  Vector g1(p), g2(p);
  for (int trial = 0; trial < trials; ++trial) {
    const Vector z1 = random_vector(gen, p);
    const Vector z2 = random_vector(gen, p);
    const Vector x = random_vector(gen, d);
    const int i = static_cast<int>(gen.bounded(pb.num_inner()));
    pb.grad1_G(i, z1, x, g1);
    pb.grad1_G(i, z2, x, g2);
    const double gap = (g1 - g2).dot(z1 - z2);
    const double dist_sq = (z1 - z2).squaredNorm();
    if (gap < mu * dist_sq * (1.0 - rel_tol)) return false;
  }
  return true;
}

bool probe_hvp_linearity(const BilevelProblem& pb, int trials,
                         std::uint64_t seed, double rel_tol) {
  Xoshiro256 gen(seed);
  const int p = pb.inner_dim();
  const int d = pb.outer_dim();
  Vector h1(p), h2(p), hc(p);
  for (int trial = 0; trial < trials; ++trial) {
    const Vector z = random_vector(gen, p);
    const Vector x = random_vector(gen, d);
    const Vector v1 = random_vector(gen, p);
    const Vector v2 = random_vector(gen, p);
    const double a = 2.0 * gen.normal();
    const int i = static_cast<int>(gen.bounded(pb.num_inner()));
    pb.hvp11_G(i, z, x, v1, h1);
    pb.hvp11_G(i, z, x, v2, h2);
    pb.hvp11_G(i, z, x, a * v1 + v2, hc);
    const double err = (hc - (a * h1 + h2)).norm();
    const double scale = 1.0 + hc.norm();
    if (err > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace srba
