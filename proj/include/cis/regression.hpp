#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "cis/common.hpp"

namespace cis {

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  bool min_norm_fallback = false;  // set when the design was rank deficient
};

inline OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xs) {
  const int n = (int)y.size();
  const int q = (int)Xs.cols();
  require(q >= 1, "ols_fit: need at least one column");
  require((int)Xs.rows() == n, "ols_fit: row count does not match y");
  require(q < n, "ols_fit: need q < n, got q = " + std::to_string(q) + ", n = " + std::to_string(n));
  require(y.allFinite() && Xs.allFinite(), "ols_fit: non-finite input");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xs);
  OlsFit fit;
  fit.coef = cod.solve(y);  // minimum-norm solution when rank deficient
  fit.min_norm_fallback = cod.rank() < q;
  fit.residuals = y - Xs * fit.coef;
  return fit;
}

struct LassoFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;  // inputs are centered upstream, kept for the record
  double lambda = 0.0;
  Eigen::VectorXd weights;
  long iterations = 0;  // full coordinate sweeps
  bool converged = false;
  double objective = 0.0;
};

// minimizes (1/2n)||y - Xs b||^2 + lambda * sum_j w_j |b_j| by cyclic
// coordinate descent; columns need not be standardized (d_j = x_j'x_j / n)
inline LassoFit lasso_cd(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xs, double lambda,
                         const Eigen::VectorXd& weights,
                         const Eigen::VectorXd* warm_start = nullptr,
                         std::vector<double>* objective_trace = nullptr,
                         long max_sweeps = 100000, double tol = 1e-8) {
  const int n = (int)y.size();
  const int q = (int)Xs.cols();
  require(n >= 1 && q >= 1, "lasso_cd: empty problem");
  require((int)Xs.rows() == n, "lasso_cd: row count does not match y");
  require(lambda >= 0.0, "lasso_cd: lambda must be >= 0");
  require((int)weights.size() == q, "lasso_cd: weights length does not match column count");
  require(y.allFinite() && Xs.allFinite() && weights.allFinite(), "lasso_cd: non-finite input");
  require((weights.array() >= 0.0).all(), "lasso_cd: weights must be >= 0");

  const double inv_n = 1.0 / n;
  Eigen::VectorXd d(q);
  for (int j = 0; j < q; ++j) d[j] = Xs.col(j).squaredNorm() * inv_n;

  LassoFit fit;
  fit.lambda = lambda;
  fit.weights = weights;
  fit.coefficients = warm_start ? *warm_start : Eigen::VectorXd::Zero(q);
  require((int)fit.coefficients.size() == q, "lasso_cd: warm start length does not match");
  Eigen::VectorXd r = y - Xs * fit.coefficients;

  auto objective = [&] {
    return 0.5 * inv_n * r.squaredNorm() +
           lambda * (weights.array() * fit.coefficients.array().abs()).sum();
  };
  if (objective_trace) objective_trace->push_back(objective());

  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < q; ++j) {
      const double bj = fit.coefficients[j];
      if (d[j] <= 0.0) {
        // all-zero column can never enter the model
        if (bj != 0.0) {
          r += Xs.col(j) * bj;
          fit.coefficients[j] = 0.0;
        }
        continue;
      }
      const double z = Xs.col(j).dot(r) * inv_n + d[j] * bj;
      const double thr = lambda * weights[j];
      double bn = 0.0;
      if (z > thr) {
        bn = (z - thr) / d[j];
      } else if (z < -thr) {
        bn = (z + thr) / d[j];
      }
      if (bn != bj) {
        r += Xs.col(j) * (bj - bn);
        fit.coefficients[j] = bn;
        max_change = std::max(max_change, std::abs(bn - bj));
      }
    }
    ++fit.iterations;
    if (objective_trace) objective_trace->push_back(objective());
    if (max_change <= tol) {
      fit.converged = true;
      break;
    }
  }
  fit.objective = objective();
  return fit;
}

namespace detail {

// same fixed point as lasso_cd, reached through the Gram matrix: the gradient
// c = X'r / n is maintained incrementally, so a sweep costs O(q) plus O(q) per
// coordinate that actually moved instead of O(q n). converges only on a full
// sweep with no movement past tol, which is the KKT condition at this
// resolution. grad holds X'y/n - G beta / n.
struct GramCd {
  const Eigen::MatrixXd& G;  // Xs' Xs
  Eigen::VectorXd d;         // diagonal of G / n
  Eigen::VectorXd grad;
  double inv_n = 0.0;
  long iterations = 0;

  GramCd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, int n)
      : G(gram), d(gram.diagonal() / (double)n), grad(xty / (double)n), inv_n(1.0 / n) {}

  // beta must match the state grad was built from (zero for a fresh start)
  bool fit(double lambda, const Eigen::VectorXd& weights, Eigen::VectorXd& beta,
           long max_sweeps = 100000, double tol = 1e-8) {
    const int q = (int)beta.size();
    std::vector<int> active;
    auto update = [&](int j) {
      if (d[j] <= 0.0) return 0.0;
      const double bj = beta[j];
      const double z = grad[j] + d[j] * bj;
      const double thr = lambda * weights[j];
      double bn = 0.0;
      if (z > thr) {
        bn = (z - thr) / d[j];
      } else if (z < -thr) {
        bn = (z + thr) / d[j];
      }
      if (bn != bj) {
        grad -= G.col(j) * ((bn - bj) * inv_n);
        beta[j] = bn;
        return std::abs(bn - bj);
      }
      return 0.0;
    };
    long sweeps = 0;
    while (sweeps < max_sweeps) {
      double max_change = 0.0;
      for (int j = 0; j < q; ++j) max_change = std::max(max_change, update(j));
      ++sweeps;
      if (max_change <= tol) {
        iterations += sweeps;
        return true;
      }
      active.clear();
      for (int j = 0; j < q; ++j) {
        if (beta[j] != 0.0) active.push_back(j);
      }
      while (sweeps < max_sweeps && !active.empty()) {
        double change = 0.0;
        for (int j : active) change = std::max(change, update(j));
        ++sweeps;
        if (change <= tol) break;
      }
    }
    iterations += sweeps;
    return false;
  }
};

struct BicPathResult {
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  long iterations = 0;
  bool converged = false;
};

// df_exit > 0 abandons the tail of the path once a fit grows past that many
// nonzeros; the BIC optimum sits far sparser, the dense tail only costs time
struct PathOptions {
  long max_sweeps = 100000;
  double tol = 1e-8;
  int df_exit = 0;
};

// BIC-tuned descent over a 50-point log-spaced grid from lambda_max down to
// 1e-4 lambda_max with warm starts; ties keep the sparser large-lambda fit
inline BicPathResult bic_path(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xs,
                              const Eigen::VectorXd& weights,
                              const PathOptions& opts = {}) {
  const int n = (int)y.size();
  const int q = (int)Xs.cols();
  BicPathResult res;
  res.coefficients = Eigen::VectorXd::Zero(q);
  double lambda_max = 0.0;
  for (int j = 0; j < q; ++j) {
    lambda_max = std::max(lambda_max, std::abs(Xs.col(j).dot(y)) / (n * weights[j]));
  }
  if (!(lambda_max > 0.0)) {
    res.converged = true;
    return res;
  }
  // the Gram matrix only pays for itself while it fits in memory; past that
  // fall back to residual updates
  const bool use_gram = (double)q * (double)q * 8.0 <= 256e6;
  Eigen::MatrixXd G;
  Eigen::VectorXd xty;
  double yty = 0.0;
  std::unique_ptr<GramCd> cd;
  if (use_gram) {
    G = Xs.transpose() * Xs;
    xty = Xs.transpose() * y;
    yty = y.squaredNorm();
    cd = std::make_unique<GramCd>(G, xty, n);
  }

  constexpr int grid_size = 50;
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * 1e-4);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  double best_bic = 0.0;
  bool have_best = false;
  for (int g = 0; g < grid_size; ++g) {
    const double lam = std::exp(log_max + (log_min - log_max) * ((double)g / (grid_size - 1)));
    bool ok;
    double rss;
    if (use_gram) {
      ok = cd->fit(lam, weights, beta, opts.max_sweeps, opts.tol);
      rss = yty - 2.0 * beta.dot(xty) + beta.dot(G * beta);
      res.iterations = cd->iterations;
    } else {
      LassoFit fit = lasso_cd(y, Xs, lam, weights, &beta, nullptr, opts.max_sweeps, opts.tol);
      beta = fit.coefficients;
      ok = fit.converged;
      rss = (y - Xs * beta).squaredNorm();
      res.iterations += fit.iterations;
    }
    const int df = (int)(beta.array() != 0.0).count();
    const double bic = n * std::log(std::max(rss, 1e-280) / n) + df * std::log((double)n);
    if (!have_best || bic < best_bic) {
      best_bic = bic;
      res.coefficients = beta;
      res.lambda = lam;
      res.converged = ok;
      have_best = true;
    }
    if (opts.df_exit > 0 && df > opts.df_exit) break;
  }
  if (use_gram) res.iterations = cd->iterations;
  return res;
}

}  // namespace detail

struct AdaptiveLassoResult {
  ActiveSet selected;  // indices local to the supplied columns
  LassoFit fit;
  Eigen::VectorXd residuals;
};

// weights 1/(|initial_j| + 1e-6); initial fit is OLS when q <= n/2, otherwise
// ridge with shift 1e-3 * n. lambda chosen by BIC over a 50-point log grid.
inline AdaptiveLassoResult adaptive_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& Xs) {
  const int n = (int)y.size();
  const int q = (int)Xs.cols();
  require(n >= 2, "adaptive_lasso: need n >= 2");
  AdaptiveLassoResult res;
  if (q == 0) {
    res.residuals = y;
    res.fit.converged = true;
    res.fit.objective = 0.5 * y.squaredNorm() / n;
    return res;
  }
  require((int)Xs.rows() == n, "adaptive_lasso: row count does not match y");
  require(y.allFinite() && Xs.allFinite(), "adaptive_lasso: non-finite input");

  Eigen::VectorXd init;
  if (2 * q <= n) {
    init = ols_fit(y, Xs).coef;
  } else {
    Eigen::MatrixXd G = Xs.transpose() * Xs;
    G.diagonal().array() += 1e-3 * n;
    init = Eigen::LDLT<Eigen::MatrixXd>(G).solve(Xs.transpose() * y);
  }
  Eigen::VectorXd w = (init.cwiseAbs().array() + 1e-6).inverse();

  detail::BicPathResult path = detail::bic_path(y, Xs, w);
  res.fit.coefficients = path.coefficients;
  res.fit.lambda = path.lambda;
  res.fit.weights = w;
  res.fit.iterations = path.iterations;
  res.fit.converged = path.converged;
  res.residuals = y - Xs * path.coefficients;
  res.fit.objective = 0.5 * res.residuals.squaredNorm() / n +
                      path.lambda * (w.array() * path.coefficients.array().abs()).sum();
  for (int j = 0; j < q; ++j) {
    if (path.coefficients[j] != 0.0) res.selected.push_back(j);
  }
  return res;
}

}  // namespace cis
