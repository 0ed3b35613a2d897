#include "srba/lowerbound.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "srba/rng.hpp"

namespace srba {

std::pair<double, Vector> q_value_grad(const Vector& x, double xi) {
  const int dim = static_cast<int>(x.size());
  if (dim < 2) throw std::invalid_argument("q_value_grad: dimension must be >= 2");

  double value = 0.5 * xi * (x[0] - 1.0) * (x[0] - 1.0);
  for (int k = 0; k + 1 < dim; ++k) {
    const double diff = x[k + 1] - x[k];
    value += 0.5 * diff * diff;
  }

  // Tridiagonal stencil, coordinate by coordinate: differences of exact
  // zeros stay exact zeros, which the zero-chain property relies on.
  Vector grad(dim);
  grad[0] = xi * (x[0] - 1.0) - (x[1] - x[0]);
  for (int k = 1; k + 1 < dim; ++k) {
    grad[k] = (x[k] - x[k - 1]) - (x[k + 1] - x[k]);
  }
  grad[dim - 1] = x[dim - 1] - x[dim - 2];
  return {value, std::move(grad)};
}

double gamma_antiderivative(double t) {
  return 0.5 * t * t - 0.5 * std::log1p(t * t) - t + std::atan(t);
}

std::pair<double, Vector> gamma_value_grad(const Vector& x, int d) {
  if (d < 1 || d > x.size()) {
    throw std::invalid_argument("gamma_value_grad: bad coordinate count");
  }
  const double at_one = gamma_antiderivative(1.0);
  double value = 0.0;
  Vector grad = Vector::Zero(x.size());
  for (int k = 0; k < d; ++k) {
    const double t = x[k];
    value += 120.0 * (gamma_antiderivative(t) - at_one);
    grad[k] = 120.0 * t * t * (t - 1.0) / (1.0 + t * t);
  }
  return {value, std::move(grad)};
}

std::pair<double, Vector> f_nc_value_grad(const Vector& x, double alpha,
                                          int d) {
  if (x.size() != d + 1) {
    throw std::invalid_argument(
        "f_nc_value_grad: x must have length d + 1");
  }
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("f_nc_value_grad: alpha must be in (0, 1]");
  }
  auto [qv, qg] = q_value_grad(x, std::sqrt(alpha));
  auto [gv, gg] = gamma_value_grad(x, d);
  qg += alpha * gg;
  return {qv + alpha * gv, std::move(qg)};
}

double estimate_gamma_smoothness() {
  // second derivative of the separable piece:
  // d/dt [120 t^2 (t-1) / (1+t^2)] = 120 (t^4 + 3 t^2 - 2 t) / (1+t^2)^2
  const auto second = [](double t) {
    const double s = 1.0 + t * t;
    return 120.0 * (t * t * t * t + 3.0 * t * t - 2.0 * t) / (s * s);
  };
  double best = 120.0;  // |t| -> inf asymptote
  const double lo = -10.0, hi = 10.0;
  const int steps = 400000;
  for (int k = 0; k <= steps; ++k) {
    const double t = lo + (hi - lo) * static_cast<double>(k) / steps;
    best = std::max(best, std::abs(second(t)));
  }
  return best;
}

namespace {

/// The scaled hard problem: F_j(z, x) = lambda_F f_nc(U^{(j)} z / beta) and
/// G_i(z, x) = lambda_G/2 ||z/beta - x/beta||^2, identical over i.
class WorstCaseProblem : public BilevelProblem {
 public:
  WorstCaseProblem(Matrix U, int m, int n, int chain, double alpha,
                   double lambda_F, double beta, double lambda_G, double mu_G,
                   double L1_F)
      : U_(std::move(U)),
        m_(m),
        n_(n),
        chain_(chain),
        alpha_(alpha),
        lambda_F_(lambda_F),
        beta_(beta),
        g_scale_(lambda_G / (beta * beta)) {
    constants_.mu_G = mu_G;
    constants_.L1_F = L1_F;
    constants_.L1_G = g_scale_;
  }

  int inner_dim() const override { return static_cast<int>(U_.rows()); }
  int outer_dim() const override { return static_cast<int>(U_.rows()); }
  int num_inner() const override { return n_; }
  int num_outer() const override { return m_; }
  const RegularityConstants& constants() const override { return constants_; }

  void grad_F(int j, const Vector& z, const Vector& x, Vector& g1,
              Vector& g2) const override {
    const auto Uj = block(j);
    const Vector y = Uj * z / beta_;
    const Vector gf = f_nc_value_grad(y, alpha_, chain_).second;
    g1 = (lambda_F_ / beta_) * (Uj.transpose() * gf);
    g2 = Vector::Zero(x.size());
  }

  void grad1_G(int, const Vector& z, const Vector& x, Vector& g) const override {
    g = g_scale_ * (z - x);
  }

  void hvp11_G(int, const Vector&, const Vector&, const Vector& v,
               Vector& out) const override {
    out = g_scale_ * v;
  }

  void jvp21_G(int, const Vector&, const Vector&, const Vector& v,
               Vector& out) const override {
    out = -g_scale_ * v;
  }

  double value_F(int j, const Vector& z, const Vector&) const override {
    const Vector y = block(j) * z / beta_;
    return lambda_F_ * f_nc_value_grad(y, alpha_, chain_).first;
  }

  double value_G(int, const Vector& z, const Vector& x) const override {
    return 0.5 * g_scale_ * (z - x).squaredNorm();
  }

 private:
  Eigen::Block<const Matrix> block(int j) const {
    return U_.middleRows(j * (chain_ + 1), chain_ + 1);
  }

  Matrix U_;
  int m_, n_, chain_;
  double alpha_, lambda_F_, beta_, g_scale_;
  RegularityConstants constants_;
};

}  // namespace

Matrix WorstCaseInstance::block(int j) const {
  if (j < 0 || j >= m) throw std::out_of_range("worstcase: block index");
  return U.middleRows(j * (chain + 1), chain + 1);
}

double WorstCaseInstance::h(const Vector& x) const {
  double s = 0.0;
  for (int j = 0; j < m; ++j) {
    const Vector y = U.middleRows(j * (chain + 1), chain + 1) * x / beta;
    s += f_nc_value_grad(y, alpha, chain).first;
  }
  return lambda_F * s / static_cast<double>(m);
}

Vector WorstCaseInstance::grad_h(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (int j = 0; j < m; ++j) {
    const auto Uj = U.middleRows(j * (chain + 1), chain + 1);
    const Vector y = Uj * x / beta;
    g += Uj.transpose() * f_nc_value_grad(y, alpha, chain).second;
  }
  return (lambda_F / beta) * g / static_cast<double>(m);
}

double WorstCaseInstance::grad_floor(int count) const {
  const double scale = (lambda_F / beta) * (lambda_F / beta);
  return scale * std::pow(alpha, 1.5) * static_cast<double>(count) /
         (16.0 * static_cast<double>(m) * static_cast<double>(m));
}

std::vector<int> WorstCaseInstance::zero_tail_blocks(const Vector& x,
                                                     double ztol) const {
  std::vector<int> blocks;
  for (int j = 0; j < m; ++j) {
    const Vector y = U.middleRows(j * (chain + 1), chain + 1) * x / beta;
    if (std::abs(y[chain - 1]) <= ztol && std::abs(y[chain]) <= ztol) {
      blocks.push_back(j);
    }
  }
  return blocks;
}

WorstCaseInstance make_worstcase(int m, int n, double epsilon, double Delta,
                                 double L1_F, double mu_G, std::uint64_t seed,
                                 double c_override) {
  if (m < 1 || n < 1) throw std::invalid_argument("make_worstcase: m, n >= 1");
  if (!(epsilon > 0.0) || !(Delta > 0.0) || !(L1_F > 0.0) || !(mu_G > 0.0)) {
    throw std::invalid_argument("make_worstcase: inputs must be positive");
  }

  WorstCaseInstance inst;
  inst.m = m;
  inst.n = n;
  inst.epsilon = epsilon;
  inst.Delta = Delta;
  inst.L1_F = L1_F;
  inst.mu_G = mu_G;
  inst.c_gamma = c_override > 0.0 ? c_override : estimate_gamma_smoothness();
  inst.alpha = std::min(1.0, static_cast<double>(m) / inst.c_gamma);
  inst.lambda_F = 160.0 * m * epsilon / (L1_F * std::pow(inst.alpha, 1.5));
  inst.beta = std::sqrt(5.0 * inst.lambda_F / L1_F);
  inst.lambda_G = inst.beta * inst.beta * mu_G;

  const double T_real =
      Delta * L1_F * std::sqrt(inst.alpha) / (1760.0 * m * epsilon);
  inst.chain = std::max(1, static_cast<int>(std::ceil(T_real)));
  // Admissibility eps <= Delta L1_F alpha / (1760 m) is equivalent to
  // T sqrt(alpha) >= 1; checked with the rounded T.
  if (inst.chain * std::sqrt(inst.alpha) < 1.0) {
    std::ostringstream msg;
    msg << "make_worstcase: inadmissible epsilon " << epsilon
        << "; the construction requires eps <= Delta L1_F alpha / (1760 m) = "
        << Delta * L1_F * inst.alpha / (1760.0 * m);
    throw std::invalid_argument(msg.str());
  }

  const int dim = (inst.chain + 1) * m;
  Xoshiro256 gen(seed);
  Matrix raw(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) raw(r, c) = gen.normal();
  Eigen::HouseholderQR<Matrix> qr(raw);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c)
    if (R(c, c) < 0.0) Q.col(c) = -Q.col(c);
  inst.U = Q.transpose();

  inst.problem = std::make_shared<WorstCaseProblem>(
      inst.U, m, n, inst.chain, inst.alpha, inst.lambda_F, inst.beta,
      inst.lambda_G, mu_G, L1_F);
  return inst;
}

Certificate certify_run(const WorstCaseInstance& instance,
                        const std::vector<Vector>& x_iterates, double span_tol,
                        double ztol) {
  const int dim = instance.dim();
  const int block_rows = instance.chain + 1;
  Certificate cert;
  cert.epsilon = instance.epsilon;
  cert.iteration_bound =
      0.5 * static_cast<double>(instance.m) * instance.chain;
  cert.floors_ok = true;
  cert.span_ok = true;

  for (std::size_t t = 0; t < x_iterates.size(); ++t) {
    const Vector& x = x_iterates[t];
    if (x.size() != dim) {
      throw std::invalid_argument("certify_run: iterate dimension mismatch");
    }
    CertificateRow row;
    row.t = static_cast<int>(t);
    row.grad_h_sq = instance.grad_h(x).squaredNorm();
    row.blocks_in_I =
        static_cast<int>(instance.zero_tail_blocks(x, ztol).size());
    row.floor = instance.grad_floor(row.blocks_in_I);

    // Span of the first min(t, chain+1) chain vectors of every block: one
    // oracle round can reveal at most one new vector per block.
    const int depth = std::min<int>(static_cast<int>(t), block_rows);
    Vector projected = Vector::Zero(dim);
    for (int j = 0; j < instance.m; ++j) {
      const auto Uj = instance.U.middleRows(j * block_rows, block_rows);
      Vector coeff = Uj * x;
      for (int r = depth; r < block_rows; ++r) coeff[r] = 0.0;
      projected += Uj.transpose() * coeff;
    }
    row.span_residual = (x - projected).norm();

    if (row.grad_h_sq < row.floor - 1e-9) cert.floors_ok = false;
    if (row.span_residual > span_tol) cert.span_ok = false;
    if (cert.first_eps_stationary < 0 && row.grad_h_sq <= instance.epsilon) {
      cert.first_eps_stationary = row.t;
    }
    cert.rows.push_back(row);
  }
  return cert;
}

std::string Certificate::to_json() const {
  nlohmann::json j;
  j["epsilon"] = epsilon;
  j["iteration_bound"] = iteration_bound;
  j["first_eps_stationary"] = first_eps_stationary;
  j["floors_ok"] = floors_ok;
  j["span_ok"] = span_ok;
  nlohmann::json arr = nlohmann::json::array();
  for (const CertificateRow& r : rows) {
    arr.push_back({{"t", r.t},
                   {"grad_h_sq", r.grad_h_sq},
                   {"floor", r.floor},
                   {"span_residual", r.span_residual},
                   {"I", r.blocks_in_I}});
  }
  j["rows"] = std::move(arr);
  return j.dump(2);
}

}  // namespace srba
