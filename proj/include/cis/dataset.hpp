#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "cis/common.hpp"

namespace cis {

struct Dataset {
  int n = 0;
  int p = 0;
  Eigen::VectorXd y;   // length n
  Eigen::MatrixXd X;   // n x p, column j is predictor j
  std::vector<std::string> names;  // length p
  bool standardized = false;
};

struct SelectionResult {
  ActiveSet selected;
  std::string statistic_used;
  double threshold = 0.0;
};

inline void validate_dataset(const Dataset& d) {
  require(d.n >= 2, "dataset: need n >= 2, got n = " + std::to_string(d.n));
  require(d.p >= 1, "dataset: need p >= 1, got p = " + std::to_string(d.p));
  require(d.y.size() == d.n, "dataset: y length does not match n");
  require(d.X.rows() == d.n && d.X.cols() == d.p, "dataset: X shape does not match n x p");
  require(d.names.empty() || (int)d.names.size() == d.p, "dataset: names length does not match p");
  require(d.y.allFinite(), "dataset: y contains a non-finite value");
  require(d.X.allFinite(), "dataset: X contains a non-finite value");
}

inline std::vector<std::string> default_names(int p) {
  std::vector<std::string> names(p);
  for (int j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

// columns centered and scaled so that x_j' x_j = n; y centered, never rescaled
inline Dataset standardize(const Dataset& d) {
  validate_dataset(d);
  Dataset out = d;
  if (out.names.empty()) out.names = default_names(d.p);
  out.y.array() -= d.y.mean();
  for (int j = 0; j < d.p; ++j) {
    double mu = d.X.col(j).mean();
    Eigen::VectorXd c = d.X.col(j).array() - mu;
    double ss = c.squaredNorm();
    // constant detection is relative to column magnitude so that
    // an already-centered column of tiny residual noise still counts
    require(ss > d.n * 1e-24 * (1.0 + mu * mu),
            "standardize: constant column " + std::to_string(j));
    out.X.col(j) = c * std::sqrt((double)d.n / ss);
  }
  out.standardized = true;
  return out;
}

}  // namespace cis
