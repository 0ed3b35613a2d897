#pragma once

#include <memory>

#include "srba/problem.hpp"
#include "srba/problems/dataset.hpp"

namespace srba {

/// Hyperparameter selection for l2-regularized logistic regression with one
/// regularization parameter per feature: the inner variable is the classifier
/// theta, the outer variable is the log-regularization vector lambda.
///
///   F_j(theta, lambda) = phi(y_j <d_j, theta>)                (validation)
///   G_i(theta, lambda) = phi(y_i <d_i, theta>)
///                        + 1/2 sum_k e^{lambda_k} theta_k^2   (training)
///
/// with phi(u) = log(1 + e^{-u}), labels ±1.
class HyperparamLogReg : public BilevelProblem {
 public:
  HyperparamLogReg(Dataset train, Dataset val);

  int inner_dim() const override { return p_; }
  int outer_dim() const override { return p_; }
  int num_inner() const override { return train_.num_samples(); }
  int num_outer() const override { return val_.num_samples(); }
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

  const Dataset& train() const { return train_; }
  const Dataset& val() const { return val_; }

 private:
  Dataset train_, val_;
  int p_ = 0;
  RegularityConstants constants_;
};

std::shared_ptr<HyperparamLogReg> make_hyperparam_problem(Dataset train,
                                                          Dataset val);

// Numerically stable logistic pieces, shared with the datacleaning task.
double logistic_loss(double u);        // log(1 + e^{-u})
double logistic_loss_d1(double u);     // -sigmoid(-u)
double logistic_loss_d2(double u);     // sigmoid(u) sigmoid(-u)
double sigmoid(double u);

}  // namespace srba
