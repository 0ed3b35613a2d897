#include "srba/problems/hyperparam.hpp"

#include <cmath>
#include <stdexcept>

namespace srba {

double logistic_loss(double u) {
  // log(1 + e^{-u}) = max(0, -u) + log1p(e^{-|u|})
  return std::max(0.0, -u) + std::log1p(std::exp(-std::abs(u)));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_loss_d1(double u) { return -sigmoid(-u); }

double logistic_loss_d2(double u) {
  const double s = sigmoid(u);
  return s * (1.0 - s);
}

namespace {

void check_binary_labels(const Dataset& ds, const char* which) {
  for (int y : ds.labels) {
    if (y != 1 && y != -1) {
      throw std::invalid_argument(std::string("hyperparam: ") + which +
                                  " labels must be ±1");
    }
  }
}

}  // namespace

HyperparamLogReg::HyperparamLogReg(Dataset train, Dataset val)
    : train_(std::move(train)), val_(std::move(val)) {
  if (train_.num_features() != val_.num_features()) {
    throw std::invalid_argument(
        "hyperparam: train/validation feature dimensions differ");
  }
  check_binary_labels(train_, "train");
  check_binary_labels(val_, "validation");
  p_ = train_.num_features();

  double max_train_sq = 0.0, max_val = 0.0;
  for (int i = 0; i < train_.num_samples(); ++i) {
    max_train_sq = std::max(max_train_sq, train_.features.row(i).squaredNorm());
  }
  for (int j = 0; j < val_.num_samples(); ++j) {
    max_val = std::max(max_val, val_.features.row(j).norm());
  }
  // Estimates at the initial lambda = 0 (e^{lambda_k} = 1); the regularizer
  // keeps every G_i strongly convex with modulus min_k e^{lambda_k}.
  constants_.mu_G = 1.0;
  constants_.L1_G = 0.25 * max_train_sq + 1.0;
  constants_.L0_F = max_val;
  constants_.L1_F = 0.25 * max_val * max_val;
}

void HyperparamLogReg::grad_F(int j, const Vector& z, const Vector& x,
                              Vector& g1, Vector& g2) const {
  const double y = static_cast<double>(val_.labels[static_cast<std::size_t>(j)]);
  const double margin = y * val_.features.row(j).dot(z);
  g1 = logistic_loss_d1(margin) * y * val_.features.row(j).transpose();
  g2 = Vector::Zero(x.size());
}

void HyperparamLogReg::grad1_G(int i, const Vector& z, const Vector& x,
                               Vector& g) const {
  const double y =
      static_cast<double>(train_.labels[static_cast<std::size_t>(i)]);
  const double margin = y * train_.features.row(i).dot(z);
  g = logistic_loss_d1(margin) * y * train_.features.row(i).transpose();
  g.array() += x.array().exp() * z.array();
}

void HyperparamLogReg::hvp11_G(int i, const Vector& z, const Vector& x,
                               const Vector& v, Vector& out) const {
  const double y =
      static_cast<double>(train_.labels[static_cast<std::size_t>(i)]);
  const double margin = y * train_.features.row(i).dot(z);
  const double curvature = logistic_loss_d2(margin);  // y^2 = 1
  out = curvature * train_.features.row(i).dot(v) *
        train_.features.row(i).transpose();
  out.array() += x.array().exp() * v.array();
}

void HyperparamLogReg::jvp21_G(int, const Vector& z, const Vector& x,
                               const Vector& v, Vector& out) const {
  // d^2 G / d lambda_k d theta_k = e^{lambda_k} theta_k (diagonal coupling)
  out = (x.array().exp() * z.array() * v.array()).matrix();
}

double HyperparamLogReg::value_F(int j, const Vector& z, const Vector&) const {
  const double y = static_cast<double>(val_.labels[static_cast<std::size_t>(j)]);
  return logistic_loss(y * val_.features.row(j).dot(z));
}

double HyperparamLogReg::value_G(int i, const Vector& z,
                                 const Vector& x) const {
  const double y =
      static_cast<double>(train_.labels[static_cast<std::size_t>(i)]);
  const double loss = logistic_loss(y * train_.features.row(i).dot(z));
  return loss + 0.5 * (x.array().exp() * z.array().square()).sum();
}

std::shared_ptr<HyperparamLogReg> make_hyperparam_problem(Dataset train,
                                                          Dataset val) {
  return std::make_shared<HyperparamLogReg>(std::move(train), std::move(val));
}

}  // namespace srba
