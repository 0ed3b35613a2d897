#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "srba/problem.hpp"
#include "srba/types.hpp"

namespace srba {

/// Chain quadratic on R^dim (dim >= 2):
///   Q(x; xi) = xi/2 (x_1 - 1)^2 + 1/2 sum_{k<dim} (x_{k+1} - x_k)^2.
/// Its gradient is computed coordinatewise so that a zero tail of x yields
/// exact zeros past the first unrevealed coordinate.
std::pair<double, Vector> q_value_grad(const Vector& x, double xi);

/// Separable nonconvex term over the first d coordinates of x:
///   Gamma(x; d) = 120 sum_{k<=d} integral_1^{x_k} t^2 (t-1) / (1 + t^2) dt,
/// evaluated through the analytic antiderivative. grad_k vanishes at x_k = 0.
std::pair<double, Vector> gamma_value_grad(const Vector& x, int d);

/// Antiderivative of 120 t^2 (t-1) / (1 + t^2) divided by 120:
/// t^2/2 - log(1+t^2)/2 - t + atan(t).
double gamma_antiderivative(double t);

/// f_nc(x; alpha, d) = Q(x; sqrt(alpha)) + alpha Gamma(x; d) on R^{d+1}.
std::pair<double, Vector> f_nc_value_grad(const Vector& x, double alpha,
                                          int d);

/// Smoothness constant of Gamma: max |d/dt [120 t^2(t-1)/(1+t^2)]| by fine
/// grid search on [-10, 10] (the asymptote is 120, below the interior max).
double estimate_gamma_smoothness();

struct WorstCaseInstance {
  int m = 0;        // outer summands / orthogonal blocks
  int n = 0;        // inner summands (all identical)
  int chain = 0;    // chain length T; block dimension is chain + 1
  double alpha = 0.0;
  double lambda_F = 0.0;
  double beta = 0.0;
  double lambda_G = 0.0;
  double c_gamma = 0.0;  // smoothness estimate of Gamma used for alpha
  double mu_G = 0.0;
  double L1_F = 0.0;
  double epsilon = 0.0;
  double Delta = 0.0;
  Matrix U;  // ((chain+1) m)^2 orthogonal; row blocks U^{(j)}
  std::shared_ptr<const BilevelProblem> problem;

  int dim() const { return (chain + 1) * m; }
  /// Row block U^{(j)}, shape (chain+1) x dim.
  Matrix block(int j) const;

  // Closed forms; under the chosen inner function z*(x) = x, so
  // h(x) = lambda_F (1/m) sum_j f_nc(U^{(j)} x / beta; alpha, chain).
  double h(const Vector& x) const;
  Vector grad_h(const Vector& x) const;

  /// Lower bound on ||grad h(x)||^2 when `count` blocks still have their two
  /// last chain coordinates at zero: (lambda_F/beta)^2 alpha^{3/2} count /
  /// (16 m^2). By construction this equals 2 epsilon count / m.
  double grad_floor(int count) const;

  /// Blocks j with |(U^{(j)} x / beta)_T| and |..._{T+1}| <= ztol.
  std::vector<int> zero_tail_blocks(const Vector& x, double ztol = 1e-9) const;
};

/// Builds the hard instance for the given accuracy and initial gap. The
/// constants follow the chain construction: alpha = min(1, m / c),
/// lambda_F = 160 m eps / (L1_F alpha^{3/2}), beta = sqrt(5 lambda_F / L1_F),
/// lambda_G = beta^2 mu_G and T = Delta L1_F sqrt(alpha) / (1760 m eps),
/// ceil-rounded. Requires eps <= Delta L1_F alpha / (1760 m) (checked with
/// the rounded T); violations raise std::invalid_argument naming the bound.
/// c_override > 0 replaces the estimated Gamma-smoothness constant.
WorstCaseInstance make_worstcase(int m, int n, double epsilon, double Delta,
                                 double L1_F, double mu_G, std::uint64_t seed,
                                 double c_override = 0.0);

struct CertificateRow {
  int t = 0;
  double grad_h_sq = 0.0;
  double floor = 0.0;
  double span_residual = 0.0;
  int blocks_in_I = 0;
};

struct Certificate {
  std::vector<CertificateRow> rows;
  double epsilon = 0.0;
  double iteration_bound = 0.0;   // m T / 2
  int first_eps_stationary = -1;  // first t with grad_h_sq <= eps, -1 if none
  bool floors_ok = false;         // grad_h_sq >= floor - 1e-9 at every t
  bool span_ok = false;           // residual <= span_tol at every t
  std::string to_json() const;
};

/// Certifies a recorded iterate sequence (started at x = 0) against the
/// instance: per iterate, the measured squared gradient versus the block
/// floor, and the residual of x^t outside the span of the first t chain
/// vectors of every block (the span can grow by at most m vectors per
/// iteration).
Certificate certify_run(const WorstCaseInstance& instance,
                        const std::vector<Vector>& x_iterates,
                        double span_tol = 1e-8, double ztol = 1e-9);

}  // namespace srba
