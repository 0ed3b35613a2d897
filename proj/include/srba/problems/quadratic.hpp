#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>

#include "srba/problem.hpp"

namespace srba {

/// Closed-form verification instance:
///   G_i(z, x) = 1/2 z^T A_i z - z^T B_i x
///   F_j(z, x) = 1/2 ||z - c_j||^2 + 1/2 x^T M_j x + e_j^T z
/// with each A_i symmetric positive definite. The averaged inner problem has
/// the explicit solution z*(x) = Abar^{-1} Bbar x, and the linear-system and
/// hypergradient follow by direct solves.
class QuadraticBilevel : public BilevelProblem {
 public:
  QuadraticBilevel(std::vector<Matrix> A, std::vector<Matrix> B,
                   std::vector<Vector> c, std::vector<Matrix> M,
                   std::vector<Vector> e);

  int inner_dim() const override { return p_; }
  int outer_dim() const override { return d_; }
  int num_inner() const override { return static_cast<int>(A_.size()); }
  int num_outer() const override { return static_cast<int>(c_.size()); }
  const RegularityConstants& constants() const override { return constants_; }

  void grad_F(int j, const Vector& z, const Vector& x, Vector& g1,
              Vector& g2) const override;
  void grad1_G(int i, const Vector& z, const Vector& x,
               Vector& g) const override;
  void hvp11_G(int i, const Vector& z, const Vector& x, const Vector& v,
               Vector& out) const override;
  void jvp21_G(int i, const Vector& z, const Vector& x, const Vector& v,
               Vector& out) const override;
  double value_F(int j, const Vector& z, const Vector& x) const override;
  double value_G(int i, const Vector& z, const Vector& x) const override;

  // Closed-form accessors (direct linear solves).
  Vector z_star(const Vector& x) const;
  Vector v_star(const Vector& x) const;
  Vector grad_h(const Vector& x) const;
  double h(const Vector& x) const;
  /// Minimizer of the (convex quadratic) value function h.
  Vector argmin_h() const;

  const Matrix& A(int i) const { return A_[i]; }
  const Matrix& B(int i) const { return B_[i]; }
  const Matrix& M(int j) const { return M_[j]; }
  const Vector& c(int j) const { return c_[j]; }
  const Vector& e(int j) const { return e_[j]; }

 private:
  int p_ = 0;
  int d_ = 0;
  std::vector<Matrix> A_, B_, M_;
  std::vector<Vector> c_, e_;
  Matrix A_bar_, B_bar_, M_bar_;
  Vector c_bar_, e_bar_;
  Eigen::LLT<Matrix> A_bar_llt_;
  RegularityConstants constants_;
};

/// Random instance with the eigenvalues of each A_i in [mu_min, L_max]; the
/// outer quadratics M_j are positive definite so all five oracle components
/// are exercised and h has a unique minimizer.
QuadraticBilevel make_quadratic(std::uint64_t seed, int p, int d, int n, int m,
                                double mu_min, double L_max);

}  // namespace srba
