#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "srba/problem.hpp"
#include "srba/problems/dataset.hpp"

namespace srba {

/// Datacleaning task: learn a multiclass classifier together with per-sample
/// weights on a training set whose labels may be corrupted. The inner
/// variable is the classifier theta in R^{C x p} (flattened column-major),
/// the outer variable is lambda in R^{n_train}; sample i enters the
/// training loss with weight sigmoid(lambda_i).
///
///   F_j(theta, lambda) = ce(theta d_j^val, y_j^val)
///   G_i(theta, lambda) = sigmoid(lambda_i) ce(theta d_i, y_i)
///                        + C_r ||theta||^2
///
/// with ce the softmax cross entropy.
class DataCleaning : public BilevelProblem {
 public:
  DataCleaning(Dataset train, Dataset val, double regularizer);

  int inner_dim() const override { return n_classes_ * p_; }
  int outer_dim() const override { return train_.num_samples(); }
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

  int num_classes() const { return n_classes_; }
  int num_features() const { return p_; }
  double regularizer() const { return C_r_; }
  const Dataset& train() const { return train_; }
  const Dataset& val() const { return val_; }

  /// Cross-entropy loss of the flattened classifier on one sample.
  double sample_loss(const Vector& theta_flat, const Vector& d, int y) const;

 private:
  Dataset train_, val_;
  int p_ = 0;
  int n_classes_ = 0;
  double C_r_ = 0.0;
  RegularityConstants constants_;
};

struct DataCleaningInstance {
  std::shared_ptr<DataCleaning> problem;
  std::vector<bool> corruption_mask;  // true where the train label was replaced
};

/// Corrupts each training label independently with probability p_c (replaced
/// by a uniformly random different class) and builds the weighted problem.
DataCleaningInstance make_datacleaning(Dataset train, Dataset val, double p_c,
                                       double regularizer, std::uint64_t seed);

}  // namespace srba
