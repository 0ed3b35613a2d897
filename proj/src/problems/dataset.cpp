#include "srba/problems/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "srba/rng.hpp"

namespace srba {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

struct SparseRow {
  int label = 0;
  std::vector<std::pair<int, double>> entries;  // 0-based column, value
};

}  // namespace

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<SparseRow> rows;
  int max_col = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    SparseRow row;
    try {
      std::size_t used = 0;
      const double lab = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      row.label = static_cast<int>(std::llround(lab));
    } catch (const std::exception&) {
      parse_fail(path, lineno, "bad label '" + tok + "'");
    }

    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        parse_fail(path, lineno, "bad feature entry '" + tok + "'");
      }
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        val = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        parse_fail(path, lineno, "bad feature entry '" + tok + "'");
      }
      if (idx < 1) parse_fail(path, lineno, "feature index must be >= 1");
      row.entries.emplace_back(idx - 1, val);
      max_col = std::max(max_col, idx - 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty dataset");

  Dataset ds;
  ds.features = Matrix::Zero(static_cast<int>(rows.size()), max_col + 1);
  ds.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ds.labels.push_back(rows[r].label);
    for (const auto& [col, val] : rows[r].entries) {
      ds.features(static_cast<int>(r), col) = val;
    }
  }
  return ds;
}

void save_libsvm(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[64];
  for (int r = 0; r < ds.num_samples(); ++r) {
    out << ds.labels[static_cast<std::size_t>(r)];
    for (int c = 0; c < ds.num_features(); ++c) {
      const double v = ds.features(r, c);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof(buf), " %d:%.17g", c + 1, v);
      out << buf;
    }
    out << '\n';
  }
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line.rfind("label", 0) != 0) {
    parse_fail(path, 1, "expected header starting with 'label'");
  }
  int n_cols = 0;
  for (char ch : line)
    if (ch == ',') ++n_cols;

  std::vector<int> labels;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int col = -1;
    while (std::getline(ls, cell, ',')) {
      try {
        if (col < 0) {
          labels.push_back(static_cast<int>(std::llround(std::stod(cell))));
        } else {
          values.push_back(std::stod(cell));
        }
      } catch (const std::exception&) {
        parse_fail(path, lineno, "bad cell '" + cell + "'");
      }
      ++col;
    }
    if (col != n_cols) parse_fail(path, lineno, "wrong column count");
  }
  if (labels.empty()) throw std::runtime_error(path + ": empty dataset");

  Dataset ds;
  ds.labels = std::move(labels);
  ds.features = Matrix(static_cast<int>(ds.labels.size()), n_cols);
  for (int r = 0; r < ds.num_samples(); ++r)
    for (int c = 0; c < n_cols; ++c)
      ds.features(r, c) = values[static_cast<std::size_t>(r) * n_cols + c];
  return ds;
}

Dataset make_gaussian_binary(std::uint64_t seed, int n_samples, int n_features,
                             double separation) {
  if (n_samples < 1 || n_features < 1) {
    throw std::invalid_argument("make_gaussian_binary: bad sizes");
  }
  Xoshiro256 gen(seed);
  Vector direction(n_features);
  for (int k = 0; k < n_features; ++k) direction[k] = gen.normal();
  direction *= (separation / 2.0) / direction.norm();

  Dataset ds;
  ds.features = Matrix(n_samples, n_features);
  ds.labels.resize(static_cast<std::size_t>(n_samples));
  for (int r = 0; r < n_samples; ++r) {
    const int y = gen.bounded(2) == 0 ? -1 : 1;
    ds.labels[static_cast<std::size_t>(r)] = y;
    for (int c = 0; c < n_features; ++c) {
      ds.features(r, c) = y * direction[c] + gen.normal();
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, int count) {
  if (count < 1 || count >= ds.num_samples()) {
    throw std::invalid_argument("split_dataset: count out of range");
  }
  Dataset head, tail;
  head.features = ds.features.topRows(count);
  tail.features = ds.features.bottomRows(ds.num_samples() - count);
  head.labels.assign(ds.labels.begin(), ds.labels.begin() + count);
  tail.labels.assign(ds.labels.begin() + count, ds.labels.end());
  return {std::move(head), std::move(tail)};
}

Dataset make_gaussian_blobs(std::uint64_t seed, int n_samples, int n_features,
                            int n_classes, double separation) {
  if (n_samples < 1 || n_features < 1 || n_classes < 2) {
    throw std::invalid_argument("make_gaussian_blobs: bad sizes");
  }
  Xoshiro256 gen(seed);
  Matrix centers(n_classes, n_features);
  for (int cl = 0; cl < n_classes; ++cl) {
    Vector dir(n_features);
    for (int k = 0; k < n_features; ++k) dir[k] = gen.normal();
    centers.row(cl) = dir.transpose() * (separation / dir.norm());
  }

  Dataset ds;
  ds.features = Matrix(n_samples, n_features);
  ds.labels.resize(static_cast<std::size_t>(n_samples));
  for (int r = 0; r < n_samples; ++r) {
    const int y = static_cast<int>(gen.bounded(n_classes));
    ds.labels[static_cast<std::size_t>(r)] = y;
    for (int c = 0; c < n_features; ++c) {
      ds.features(r, c) = centers(y, c) + gen.normal();
    }
  }
  return ds;
}

}  // namespace srba
