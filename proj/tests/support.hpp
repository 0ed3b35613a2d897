#pragma once

#include <cmath>
#include <functional>

#include "srba/problem.hpp"
#include "srba/rng.hpp"

namespace srba::testing {

/// Minimal coupled instance with identical summands:
///   G_i(z, x) = 1/2 ||z - x||^2,  F_j(z, x) = 1/2 ||z||^2
/// so grad1_F = z, grad2_F = 0, grad1_G = z - x, hvp = v, jvp = -v.
class TrivialProblem : public BilevelProblem {
 public:
  TrivialProblem(int dim, int n, int m) : dim_(dim), n_(n), m_(m) {
    constants_.mu_G = 1.0;
    constants_.L1_G = 1.0;
    constants_.L1_F = 1.0;
    constants_.L0_F = 10.0;  // gradient bound on the region tests touch
  }

  int inner_dim() const override { return dim_; }
  int outer_dim() const override { return dim_; }
  int num_inner() const override { return n_; }
  int num_outer() const override { return m_; }
  const RegularityConstants& constants() const override { return constants_; }

  void grad_F(int, const Vector& z, const Vector&, Vector& g1,
              Vector& g2) const override {
    g1 = z;
    g2 = Vector::Zero(dim_);
  }
  void grad1_G(int, const Vector& z, const Vector& x,
               Vector& g) const override {
    g = z - x;
  }
  void hvp11_G(int, const Vector&, const Vector&, const Vector& v,
               Vector& out) const override {
    out = v;
  }
  void jvp21_G(int, const Vector&, const Vector&, const Vector& v,
               Vector& out) const override {
    out = -v;
  }
  double value_F(int, const Vector& z, const Vector&) const override {
    return 0.5 * z.squaredNorm();
  }
  double value_G(int, const Vector& z, const Vector& x) const override {
    return 0.5 * (z - x).squaredNorm();
  }

 private:
  int dim_, n_, m_;
  RegularityConstants constants_;
};

/// Wrapper that corrupts the Hessian-vector oracle (linearly in v, so the
/// corruption is self-consistent between sampled and full-batch paths); used
/// to confirm that the verification suites detect a broken implementation.
class PerturbedHvp : public BilevelProblem {
 public:
  explicit PerturbedHvp(const BilevelProblem& inner, double bias = 1e-2)
      : inner_(inner), bias_(bias) {}

  int inner_dim() const override { return inner_.inner_dim(); }
  int outer_dim() const override { return inner_.outer_dim(); }
  int num_inner() const override { return inner_.num_inner(); }
  int num_outer() const override { return inner_.num_outer(); }
  const RegularityConstants& constants() const override {
    return inner_.constants();
  }
  void grad_F(int j, const Vector& z, const Vector& x, Vector& g1,
              Vector& g2) const override {
    inner_.grad_F(j, z, x, g1, g2);
  }
  void grad1_G(int i, const Vector& z, const Vector& x,
               Vector& g) const override {
    inner_.grad1_G(i, z, x, g);
  }
  void hvp11_G(int i, const Vector& z, const Vector& x, const Vector& v,
               Vector& out) const override {
    inner_.hvp11_G(i, z, x, v, out);
    if (out.size() > 1) out[0] += bias_ * (v[0] + v[1]);
  }
  void jvp21_G(int i, const Vector& z, const Vector& x, const Vector& v,
               Vector& out) const override {
    inner_.jvp21_G(i, z, x, v, out);
  }
  double value_F(int j, const Vector& z, const Vector& x) const override {
    return inner_.value_F(j, z, x);
  }
  double value_G(int i, const Vector& z, const Vector& x) const override {
    return inner_.value_G(i, z, x);
  }

 private:
  const BilevelProblem& inner_;
  double bias_;
};

inline Vector random_vector(Xoshiro256& gen, int dim, double scale = 1.0) {
  Vector w(dim);
  for (int k = 0; k < dim; ++k) w[k] = scale * gen.normal();
  return w;
}

/// Dense Hessian of the averaged inner objective assembled column by column
/// from unit-vector Hessian-vector queries; independent oracle for hvp tests.
inline Matrix assemble_hessian_by_columns(const BilevelProblem& pb, int i,
                                          const Vector& z, const Vector& x) {
  const int p = pb.inner_dim();
  Matrix H(p, p);
  Vector e = Vector::Zero(p);
  Vector col(p);
  for (int c = 0; c < p; ++c) {
    e[c] = 1.0;
    pb.hvp11_G(i, z, x, e, col);
    H.col(c) = col;
    e[c] = 0.0;
  }
  return H;
}

/// Adaptive Simpson quadrature, an independent oracle for integral values.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol, int depth = 30) {
  const auto simpson = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  };
  std::function<double(double, double, double, double, int)> rec =
      [&](double lo, double hi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double left = simpson(lo, mid);
        const double right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, left, eps / 2.0, d - 1) +
               rec(mid, hi, right, eps / 2.0, d - 1);
      };
  return rec(a, b, simpson(a, b), tol, depth);
}

}  // namespace srba::testing
