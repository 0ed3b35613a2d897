#include "srba/problems/quadratic.hpp"

#include <stdexcept>

#include <Eigen/Dense>

#include "srba/rng.hpp"

namespace srba {

QuadraticBilevel::QuadraticBilevel(std::vector<Matrix> A, std::vector<Matrix> B,
                                   std::vector<Vector> c, std::vector<Matrix> M,
                                   std::vector<Vector> e)
    : A_(std::move(A)),
      B_(std::move(B)),
      M_(std::move(M)),
      c_(std::move(c)),
      e_(std::move(e)) {
  if (A_.empty() || c_.empty() || A_.size() != B_.size() ||
      c_.size() != M_.size() || c_.size() != e_.size()) {
    throw std::invalid_argument("quadratic: inconsistent summand counts");
  }
  p_ = static_cast<int>(A_[0].rows());
  d_ = static_cast<int>(B_[0].cols());

  A_bar_ = Matrix::Zero(p_, p_);
  B_bar_ = Matrix::Zero(p_, d_);
  for (std::size_t i = 0; i < A_.size(); ++i) {
    A_bar_ += A_[i];
    B_bar_ += B_[i];
  }
  A_bar_ /= static_cast<double>(A_.size());
  B_bar_ /= static_cast<double>(A_.size());

  M_bar_ = Matrix::Zero(d_, d_);
  c_bar_ = Vector::Zero(p_);
  e_bar_ = Vector::Zero(p_);
  for (std::size_t j = 0; j < c_.size(); ++j) {
    M_bar_ += M_[j];
    c_bar_ += c_[j];
    e_bar_ += e_[j];
  }
  M_bar_ /= static_cast<double>(c_.size());
  c_bar_ /= static_cast<double>(c_.size());
  e_bar_ /= static_cast<double>(c_.size());

  A_bar_llt_.compute(A_bar_);
  if (A_bar_llt_.info() != Eigen::Success) {
    throw std::invalid_argument("quadratic: averaged A is not positive definite");
  }

  double mu = std::numeric_limits<double>::infinity();
  double lg = 0.0;
  for (std::size_t i = 0; i < A_.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A_[i]);
    mu = std::min(mu, es.eigenvalues().minCoeff());
    lg = std::max(lg, es.eigenvalues().maxCoeff() + B_[i].norm());
  }
  double mf = 1.0;
  for (const Matrix& M : M_) mf = std::max(mf, M.operatorNorm());
  constants_.mu_G = mu;
  constants_.L1_G = lg;
  constants_.L1_F = mf;
  constants_.L2_F = 0.0;
  constants_.L2_G = 0.0;
  constants_.L3_G = 0.0;
  // F_j has an affine-growing gradient, so no finite L0_F is declared;
  // solvers on this instance take an explicit projection radius.
}

void QuadraticBilevel::grad_F(int j, const Vector& z, const Vector& x,
                              Vector& g1, Vector& g2) const {
  g1 = z - c_[j] + e_[j];
  g2 = M_[j] * x;
}

void QuadraticBilevel::grad1_G(int i, const Vector& z, const Vector& x,
                               Vector& g) const {
  g = A_[i] * z - B_[i] * x;
}

void QuadraticBilevel::hvp11_G(int i, const Vector&, const Vector&,
                               const Vector& v, Vector& out) const {
  out = A_[i] * v;
}

void QuadraticBilevel::jvp21_G(int i, const Vector&, const Vector&,
                               const Vector& v, Vector& out) const {
  out = -B_[i].transpose() * v;
}

double QuadraticBilevel::value_F(int j, const Vector& z,
                                 const Vector& x) const {
  return 0.5 * (z - c_[j]).squaredNorm() + 0.5 * x.dot(M_[j] * x) +
         e_[j].dot(z);
}

double QuadraticBilevel::value_G(int i, const Vector& z,
                                 const Vector& x) const {
  return 0.5 * z.dot(A_[i] * z) - z.dot(B_[i] * x);
}

Vector QuadraticBilevel::z_star(const Vector& x) const {
  return A_bar_llt_.solve(B_bar_ * x);
}

Vector QuadraticBilevel::v_star(const Vector& x) const {
  const Vector zs = z_star(x);
  return -A_bar_llt_.solve(zs - c_bar_ + e_bar_);
}

Vector QuadraticBilevel::grad_h(const Vector& x) const {
  return M_bar_ * x - B_bar_.transpose() * v_star(x);
}

double QuadraticBilevel::h(const Vector& x) const {
  const Vector zs = z_star(x);
  double s = 0.0;
  for (std::size_t j = 0; j < c_.size(); ++j) s += value_F(static_cast<int>(j), zs, x);
  return s / static_cast<double>(c_.size());
}

Vector QuadraticBilevel::argmin_h() const {
  // h(x) = 1/2 x^T (S^T S + Mbar) x - x^T S^T (cbar - ebar) + const,
  // with S = Abar^{-1} Bbar.
  const Matrix S = A_bar_llt_.solve(B_bar_);
  const Matrix H = S.transpose() * S + M_bar_;
  const Vector b = S.transpose() * (c_bar_ - e_bar_);
  return H.ldlt().solve(b);
}

QuadraticBilevel make_quadratic(std::uint64_t seed, int p, int d, int n, int m,
                                double mu_min, double L_max) {
  if (!(mu_min > 0.0) || mu_min > L_max) {
    throw std::invalid_argument(
        "make_quadratic: need 0 < mu_min <= L_max for the A spectra");
  }
  if (p < 1 || d < 1 || n < 1 || m < 1) {
    throw std::invalid_argument("make_quadratic: dimensions must be positive");
  }
  Xoshiro256 gen(seed);

  const auto random_orthogonal = [&](int dim) {
    Matrix Raw(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) Raw(r, c) = gen.normal();
    Eigen::HouseholderQR<Matrix> qr(Raw);
    Matrix Q = qr.householderQ();
    const Matrix Rm = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < dim; ++c)
      if (Rm(c, c) < 0.0) Q.col(c) = -Q.col(c);
    return Q;
  };

  const auto spd_with_spectrum = [&](int dim, double lo, double hi) {
    const Matrix Q = random_orthogonal(dim);
    Vector eigs(dim);
    for (int k = 0; k < dim; ++k) eigs[k] = lo + (hi - lo) * gen.uniform01();
    return Matrix(Q * eigs.asDiagonal() * Q.transpose());
  };

  std::vector<Matrix> A(n), B(n), M(m);
  std::vector<Vector> c(m), e(m);
  const double bscale = 1.0 / std::sqrt(static_cast<double>(std::max(p, d)));
  for (int i = 0; i < n; ++i) {
    A[i] = spd_with_spectrum(p, mu_min, L_max);
    B[i] = Matrix(p, d);
    for (int r = 0; r < p; ++r)
      for (int s = 0; s < d; ++s) B[i](r, s) = bscale * gen.normal();
  }
  for (int j = 0; j < m; ++j) {
    M[j] = spd_with_spectrum(d, 0.1, 1.0);
    c[j] = Vector(p);
    e[j] = Vector(p);
    for (int r = 0; r < p; ++r) c[j][r] = gen.normal();
    for (int r = 0; r < p; ++r) e[j][r] = 0.3 * gen.normal();
  }
  return QuadraticBilevel(std::move(A), std::move(B), std::move(c),
                          std::move(M), std::move(e));
}

}  // namespace srba
