#include "srba/problems/datacleaning.hpp"

#include <cmath>
#include <stdexcept>

#include "srba/problems/hyperparam.hpp"  // sigmoid
#include "srba/rng.hpp"

namespace srba {

namespace {

int infer_classes(const Dataset& train, const Dataset& val) {
  int top = 0;
  for (int y : train.labels) top = std::max(top, y);
  for (int y : val.labels) top = std::max(top, y);
  for (int y : train.labels)
    if (y < 0) throw std::invalid_argument("datacleaning: labels must be >= 0");
  for (int y : val.labels)
    if (y < 0) throw std::invalid_argument("datacleaning: labels must be >= 0");
  return top + 1;
}

// softmax probabilities of logits s, stable under large margins
Vector softmax(const Vector& s) {
  const double mx = s.maxCoeff();
  Vector p = (s.array() - mx).exp();
  p /= p.sum();
  return p;
}

double log_sum_exp(const Vector& s) {
  const double mx = s.maxCoeff();
  return mx + std::log((s.array() - mx).exp().sum());
}

}  // namespace

DataCleaning::DataCleaning(Dataset train, Dataset val, double regularizer)
    : train_(std::move(train)), val_(std::move(val)), C_r_(regularizer) {
  if (train_.num_features() != val_.num_features()) {
    throw std::invalid_argument(
        "datacleaning: train/validation feature dimensions differ");
  }
  if (!(C_r_ > 0.0)) {
    throw std::invalid_argument("datacleaning: regularizer must be > 0");
  }
  p_ = train_.num_features();
  n_classes_ = infer_classes(train_, val_);

  double max_train_sq = 0.0, max_val_sq = 0.0;
  for (int i = 0; i < train_.num_samples(); ++i)
    max_train_sq = std::max(max_train_sq, train_.features.row(i).squaredNorm());
  for (int j = 0; j < val_.num_samples(); ++j)
    max_val_sq = std::max(max_val_sq, val_.features.row(j).squaredNorm());

  // The l2 term gives exact 2 C_r strong convexity; the data curvature adds a
  // PSD part bounded by ||d||^2 / 2.
  constants_.mu_G = 2.0 * C_r_;
  constants_.L1_G = 0.5 * max_train_sq + 2.0 * C_r_;
  constants_.L0_F = std::sqrt(2.0 * max_val_sq);
  constants_.L1_F = 0.5 * max_val_sq;
}

double DataCleaning::sample_loss(const Vector& theta_flat, const Vector& d,
                                 int y) const {
  Eigen::Map<const Matrix> theta(theta_flat.data(), n_classes_, p_);
  const Vector s = theta * d;
  return log_sum_exp(s) - s[y];
}

void DataCleaning::grad_F(int j, const Vector& z, const Vector& x, Vector& g1,
                          Vector& g2) const {
  Eigen::Map<const Matrix> theta(z.data(), n_classes_, p_);
  const Vector d = val_.features.row(j).transpose();
  const int y = val_.labels[static_cast<std::size_t>(j)];
  Vector r = softmax(theta * d);
  r[y] -= 1.0;
  g1.resize(z.size());
  Eigen::Map<Matrix> g1m(g1.data(), n_classes_, p_);
  g1m = r * d.transpose();
  g2 = Vector::Zero(x.size());
}

void DataCleaning::grad1_G(int i, const Vector& z, const Vector& x,
                           Vector& g) const {
  Eigen::Map<const Matrix> theta(z.data(), n_classes_, p_);
  const Vector d = train_.features.row(i).transpose();
  const int y = train_.labels[static_cast<std::size_t>(i)];
  const double w = sigmoid(x[i]);
  Vector r = softmax(theta * d);
  r[y] -= 1.0;
  g.resize(z.size());
  Eigen::Map<Matrix> gm(g.data(), n_classes_, p_);
  gm = (w * r) * d.transpose();
  g += 2.0 * C_r_ * z;
}

void DataCleaning::hvp11_G(int i, const Vector& z, const Vector& x,
                           const Vector& v, Vector& out) const {
  Eigen::Map<const Matrix> theta(z.data(), n_classes_, p_);
  Eigen::Map<const Matrix> V(v.data(), n_classes_, p_);
  const Vector d = train_.features.row(i).transpose();
  const double w = sigmoid(x[i]);
  const Vector pi = softmax(theta * d);
  const Vector a = V * d;
  // Hessian of the cross entropy in the logits: diag(pi) - pi pi^T
  const Vector ha = (pi.array() * a.array()).matrix() - pi * pi.dot(a);
  out.resize(z.size());
  Eigen::Map<Matrix> om(out.data(), n_classes_, p_);
  om = (w * ha) * d.transpose();
  out += 2.0 * C_r_ * v;
}

void DataCleaning::jvp21_G(int i, const Vector& z, const Vector& x,
                           const Vector& v, Vector& out) const {
  Eigen::Map<const Matrix> theta(z.data(), n_classes_, p_);
  Eigen::Map<const Matrix> V(v.data(), n_classes_, p_);
  const Vector d = train_.features.row(i).transpose();
  const int y = train_.labels[static_cast<std::size_t>(i)];
  const double s = sigmoid(x[i]);
  Vector r = softmax(theta * d);
  r[y] -= 1.0;
  // Only lambda_i couples to theta: d^2 G_i / d lambda_i d theta = s'(lambda_i)
  // grad_theta ce, so the product has a single nonzero coordinate.
  out = Vector::Zero(x.size());
  out[i] = s * (1.0 - s) * r.dot(V * d);
}

double DataCleaning::value_F(int j, const Vector& z, const Vector&) const {
  return sample_loss(z, val_.features.row(j).transpose(),
                     val_.labels[static_cast<std::size_t>(j)]);
}

double DataCleaning::value_G(int i, const Vector& z, const Vector& x) const {
  const double loss = sample_loss(z, train_.features.row(i).transpose(),
                                  train_.labels[static_cast<std::size_t>(i)]);
  return sigmoid(x[i]) * loss + C_r_ * z.squaredNorm();
}

DataCleaningInstance make_datacleaning(Dataset train, Dataset val, double p_c,
                                       double regularizer,
                                       std::uint64_t seed) {
  if (!(p_c >= 0.0) || p_c >= 1.0) {
    throw std::invalid_argument(
        "make_datacleaning: corruption probability must be in [0, 1)");
  }
  const int n_classes = infer_classes(train, val);
  Xoshiro256 gen(seed);
  std::vector<bool> mask(static_cast<std::size_t>(train.num_samples()), false);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (gen.uniform01() < p_c) {
      mask[i] = true;
      // uniformly random wrong class
      const int offset = 1 + static_cast<int>(gen.bounded(n_classes - 1));
      train.labels[i] = (train.labels[i] + offset) % n_classes;
    }
  }
  DataCleaningInstance inst;
  inst.problem = std::make_shared<DataCleaning>(std::move(train),
                                                std::move(val), regularizer);
  inst.corruption_mask = std::move(mask);
  return inst;
}

}  // namespace srba
