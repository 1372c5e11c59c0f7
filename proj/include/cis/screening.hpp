#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cis/cov_block.hpp"
#include "cis/dataset.hpp"
#include "cis/parallel.hpp"

namespace cis {

struct ScreenStats {
  std::string method;
  Eigen::VectorXd stats;  // one nonnegative statistic per column
  std::optional<BlockPartition> partition;
  std::vector<std::string> warnings;
};

struct ScreenRule {
  bool by_threshold = false;
  double nu = 0.0;
  int k = 0;
  static ScreenRule threshold(double nu) { return {true, nu, 0}; }
  static ScreenRule top_k(int k) { return {false, 0.0, k}; }
};

namespace detail {

inline std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// descending statistic, ties broken by smaller column index
inline std::vector<int> rank_order(const Eigen::VectorXd& stats) {
  std::vector<int> order((std::size_t)stats.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (stats[a] != stats[b]) return stats[a] > stats[b];
    return a < b;
  });
  return order;
}

// semi-partial statistics for one block of columns against a response, via the
// block Gram matrix: beta = G^+ Xs'y, stat_j = |beta_j| / (sqrt(G^+_jj) ||y||).
// spectral pseudo-inverse drops eigenvalues below 1e-10 * lambda_max.
inline int block_semi_partial(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const std::vector<int>& block, double y_norm,
                              Eigen::VectorXd& stats_out) {
  const int q = (int)block.size();
  const int n = (int)y.size();
  if (q == 1) {
    // single column: plain correlation, columns have squared norm n
    stats_out[block[0]] = std::abs(X.col(block[0]).dot(y)) / (std::sqrt((double)n) * y_norm);
    return 0;
  }
  require(q < n, "semi-partial: block size " + std::to_string(q) +
                     " must be below n = " + std::to_string(n));
  Eigen::MatrixXd Xs(n, q);
  for (int i = 0; i < q; ++i) Xs.col(i) = X.col(block[i]);
  Eigen::MatrixXd G = Xs.transpose() * Xs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  require(eig.info() == Eigen::Success, "semi-partial: eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double ev_max = ev[q - 1];
  require(ev_max > 0.0, "semi-partial: block Gram matrix is zero");
  const double floor = 1e-10 * ev_max;
  int dropped = 0;
  Eigen::VectorXd inv_ev(q);
  for (int i = 0; i < q; ++i) {
    if (ev[i] < floor) {
      inv_ev[i] = 0.0;
      ++dropped;
    } else {
      inv_ev[i] = 1.0 / ev[i];
    }
  }
  Eigen::MatrixXd Ginv = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd beta = Ginv * (Xs.transpose() * y);
  for (int i = 0; i < q; ++i) {
    double gii = Ginv(i, i);
    stats_out[block[i]] = gii > 0.0 ? std::abs(beta[i]) / (std::sqrt(gii) * y_norm) : 0.0;
  }
  return dropped;
}

}  // namespace detail

// reference route: explicit projection built from a thin SVD of the companion
// columns; deliberately independent of the Gram fast path so the two can
// cross-check each other. returns the signed semi-partial correlation.
inline double semi_partial_oracle(const Dataset& d, const std::vector<int>& block, int j) {
  validate_dataset(d);
  require(d.standardized, "semi_partial_oracle: dataset must be standardized");
  require(std::find(block.begin(), block.end(), j) != block.end(),
          "semi_partial_oracle: column " + std::to_string(j) + " not in block");
  const double y_norm = d.y.norm();
  require(y_norm > 0.0, "semi_partial_oracle: response has zero norm");
  std::vector<int> others;
  for (int v : block) {
    require(v >= 0 && v < d.p, "semi_partial_oracle: block index out of range");
    if (v != j) others.push_back(v);
  }
  Eigen::VectorXd xr = d.X.col(j);
  if (!others.empty()) {
    require((int)block.size() < d.n, "semi_partial_oracle: block size must be below n");
    Eigen::MatrixXd B(d.n, (int)others.size());
    for (std::size_t i = 0; i < others.size(); ++i) B.col((Eigen::Index)i) = d.X.col(others[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    require(sv[sv.size() - 1] > 1e-10 * sv[0],
            "semi_partial_oracle: rank-deficient companion columns (smallest singular value " +
                detail::fmt_sci(sv[sv.size() - 1]) + ")");
    xr -= svd.matrixU() * (svd.matrixU().transpose() * xr);
  }
  const double xr_ss = xr.squaredNorm();
  require(xr_ss > 1e-12, "semi_partial_oracle: column " + std::to_string(j) +
                             " lies in the span of its companions (residual norm^2 " +
                             detail::fmt_sci(xr_ss) + ")");
  return xr.dot(d.y) / (std::sqrt(xr_ss) * y_norm);
}

// magnitudes of block-wise semi-partial correlations for every column
inline ScreenStats semi_partial_all(const Dataset& d, const BlockPartition& part,
                                    int n_threads = 1) {
  validate_dataset(d);
  require(d.standardized, "semi_partial_all: dataset must be standardized");
  const double y_norm = d.y.norm();
  require(y_norm > 0.0, "semi_partial_all: response has zero norm");
  block_ids(part, d.p);  // validates coverage
  ScreenStats out;
  out.method = "CIS";
  out.stats = Eigen::VectorXd::Zero(d.p);
  out.partition = part;
  const int n_blocks = (int)part.blocks.size();
  std::vector<int> dropped(n_blocks, 0);
  parallel_for(n_blocks, n_threads, [&](int b) {
    dropped[b] = detail::block_semi_partial(d.X, d.y, part.blocks[b], y_norm, out.stats);
  });
  for (int b = 0; b < n_blocks; ++b) {
    if (dropped[b] > 0) {
      out.warnings.push_back("block " + std::to_string(b) + ": dropped " +
                             std::to_string(dropped[b]) +
                             " near-zero eigenvalue(s) in the Gram pseudo-inverse");
    }
  }
  return out;
}

inline ScreenStats sis_stats(const Dataset& d) {
  validate_dataset(d);
  require(d.standardized, "sis_stats: dataset must be standardized");
  const double y_norm = d.y.norm();
  require(y_norm > 0.0, "sis_stats: response has zero norm");
  ScreenStats out;
  out.method = "SIS";
  out.stats = (d.X.transpose() * d.y).cwiseAbs() / (std::sqrt((double)d.n) * y_norm);
  return out;
}

inline ScreenStats holp_stats(const Dataset& d) {
  validate_dataset(d);
  require(d.standardized, "holp_stats: dataset must be standardized");
  ScreenStats out;
  out.method = "HOLP";
  Eigen::MatrixXd A = d.X * d.X.transpose();
  if (d.p < d.n) {
    // X X' is singular whenever p < n; shift keeps the solve defined
    A.diagonal().array() += 1e-8 * d.n;
    out.warnings.push_back("p < n: ridge shift 1e-8 * n applied to X X'");
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    require(llt.info() == Eigen::Success,
            "holp_stats: X X' factorization failed even with ridge shift");
    out.stats = (d.X.transpose() * llt.solve(d.y)).cwiseAbs();
    return out;
  }
  // centered columns leave the constant vector in the kernel of X X', so a
  // plain Cholesky solve is undefined even when p >= n; the minimum-norm
  // solve works on the complement, where the centered response lives
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  out.stats = (d.X.transpose() * cod.solve(d.y)).cwiseAbs();
  return out;
}

inline SelectionResult cis_screen(const ScreenStats& s, const ScreenRule& rule) {
  const int p = (int)s.stats.size();
  require(p >= 1, "cis_screen: empty statistics");
  SelectionResult res;
  res.statistic_used = s.method;
  if (rule.by_threshold) {
    require(rule.nu > 0.0, "cis_screen: threshold nu must be > 0");
    res.threshold = rule.nu;
    for (int j = 0; j < p; ++j) {
      if (s.stats[j] > rule.nu) res.selected.push_back(j);  // strictly above
    }
  } else {
    require(rule.k >= 1 && rule.k <= p,
            "cis_screen: top-k size must be in [1, p], got " + std::to_string(rule.k));
    res.threshold = (double)rule.k;
    std::vector<int> order = detail::rank_order(s.stats);
    res.selected.assign(order.begin(), order.begin() + rule.k);
    std::sort(res.selected.begin(), res.selected.end());
  }
  return res;
}

// 1 + worst rank over the true support, under descending-statistic order
inline int min_model_size(const ScreenStats& s, const ActiveSet& truth) {
  const int p = (int)s.stats.size();
  require(!truth.empty(), "min_model_size: empty true support");
  require(is_valid_active_set(truth, p), "min_model_size: invalid true support");
  std::vector<int> order = detail::rank_order(s.stats);
  std::vector<int> rank_of(p);
  for (int r = 0; r < p; ++r) rank_of[order[r]] = r;
  int worst = 0;
  for (int j : truth) worst = std::max(worst, rank_of[j]);
  return worst + 1;
}

}  // namespace cis
