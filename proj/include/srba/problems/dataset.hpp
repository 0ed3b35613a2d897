#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srba/types.hpp"

namespace srba {

/// Immutable sample matrix with integer labels (±1 for binary tasks,
/// 0..C-1 for multiclass). Rows of `features` are samples.
struct Dataset {
  Matrix features;
  std::vector<int> labels;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
};

/// Parses the sparse text format "label idx:val idx:val ...", one sample per
/// line, 1-based feature indices; absent entries are zero. Malformed lines
/// raise std::runtime_error naming the line, an empty file raises too.
Dataset load_libsvm(const std::string& path);

/// Writes the same format (zeros skipped); load_libsvm(save_libsvm(ds))
/// reproduces the matrix exactly when no column of trailing zeros is lost.
void save_libsvm(const Dataset& ds, const std::string& path);

/// Dense CSV with header "label,f0,f1,...".
Dataset load_csv(const std::string& path);

/// Two-class Gaussian data: features N(+-mu, I) with mu = separation/2 along
/// a fixed direction, labels ±1.
Dataset make_gaussian_binary(std::uint64_t seed, int n_samples, int n_features,
                             double separation);

/// Isotropic Gaussian blobs, one per class, labels 0..n_classes-1.
Dataset make_gaussian_blobs(std::uint64_t seed, int n_samples, int n_features,
                            int n_classes, double separation);

/// Row split into (first `count` samples, rest); used to carve train and
/// validation sets out of one generated distribution.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, int count);

}  // namespace srba
