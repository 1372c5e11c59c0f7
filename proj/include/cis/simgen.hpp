#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "cis/dataset.hpp"
#include "cis/rng.hpp"

namespace cis {

struct ModelSpec {
  char model = 'B';  // A, B, C, D, or E
  int n = 0;
  int p = 0;
  int m = 0;          // block count for A/B/D; p = 100 * m
  double rho = 0.0;   // AR(1) coefficient for A-D
  double beta_mag = 1.0;  // signal magnitude for D
  double kappa = 0.975;   // E: n = ceil(p^kappa)
  double pi = 0.2;        // E: share of multi-signal blocks
  double theta = 0.35;    // E: sparsity exponent
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

struct SimTruth {
  Eigen::VectorXd beta;  // on the raw (pre-standardization) scale
  ActiveSet support;
  double sigma = 1.0;
};

namespace detail {

// stationary AR(1) columns with unit marginal variance, one chain per block
inline void fill_ar1_blocks(Eigen::MatrixXd& X, int block_size, double rho,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = (int)X.rows();
  const int p = (int)X.cols();
  const double carry = std::sqrt(1.0 - rho * rho);
  for (int c = 0; c < p; ++c) {
    const bool chain_start = (c % block_size) == 0;
    for (int i = 0; i < n; ++i) {
      double z = normal(rng);
      X(i, c) = chain_start ? z : rho * X(i, c - 1) + carry * z;
    }
  }
}

inline void place_signals(Eigen::VectorXd& beta, const std::vector<int>& support,
                          const std::vector<int>& signs, double magnitude) {
  for (std::size_t i = 0; i < support.size(); ++i) {
    beta[support[i]] = signs[i] * magnitude;
  }
}

// sign patterns from the two fixed designs; applied in support order
inline const std::vector<int>& signs_a() {
  static const std::vector<int> s{1, -1, 1, -1, -1, 1, -1, 1, -1, 1};
  return s;
}
inline const std::vector<int>& signs_b() {
  static const std::vector<int> s{1, 1, -1, 1, -1, 1, -1, 1, -1, 1};
  return s;
}

}  // namespace detail

// models A, B, D: m blocks of 100 AR(1) predictors; model C: one global chain
// with a randomly placed support. returns the standardized dataset.
inline std::pair<Dataset, SimTruth> gen_block_ar1(const ModelSpec& s) {
  require(s.model == 'A' || s.model == 'B' || s.model == 'C' || s.model == 'D',
          "gen_block_ar1: model must be one of A, B, C, D");
  require(s.n >= 2, "gen_block_ar1: need n >= 2");
  require(s.rho > -1.0 && s.rho < 1.0, "gen_block_ar1: rho must lie in (-1, 1)");
  require(s.sigma >= 0.0, "gen_block_ar1: sigma must be >= 0");
  int block_size = 100;
  if (s.model == 'C') {
    require(s.p >= 20, "gen_block_ar1: model C needs p >= 20");
    block_size = s.p;  // single chain
  } else {
    require(s.m >= 2, "gen_block_ar1: need m >= 2 blocks");
    require(s.p == 100 * s.m, "gen_block_ar1: models A, B, D require p = 100 * m");
  }
  if (s.model == 'D') {
    require(s.rho == 0.9, "gen_block_ar1: model D uses rho = 0.9");
    require(s.beta_mag > 0.0, "gen_block_ar1: model D needs beta_mag > 0");
  }

  std::mt19937_64 rng = substream(s.seed, Stream::generate, 0);
  Dataset d;
  d.n = s.n;
  d.p = s.p;
  d.X.resize(s.n, s.p);
  detail::fill_ar1_blocks(d.X, block_size, s.rho, rng);

  SimTruth truth;
  truth.sigma = s.sigma;
  truth.beta = Eigen::VectorXd::Zero(s.p);
  const int m = s.m;
  if (s.model == 'A' || s.model == 'D') {
    std::vector<int> support{0, 1, m, m + 1, 2 * m, 3 * m, 4 * m, 5 * m, 6 * m, 7 * m};
    double mag = s.model == 'D' ? s.beta_mag : 1.0;
    detail::place_signals(truth.beta, support, detail::signs_a(), mag);
  } else if (s.model == 'B') {
    std::vector<int> support;
    for (int i = 0; i < 10; ++i) support.push_back(i * m);
    detail::place_signals(truth.beta, support, detail::signs_b(), 1.0);
  } else {
    // two adjacent pairs plus six singletons, redrawn whole on any collision
    std::uniform_int_distribution<int> u(0, s.p - 2);
    std::vector<int> support;
    for (int attempt = 0; attempt < 10000 && support.empty(); ++attempt) {
      int j[8];
      for (int& v : j) v = u(rng);
      std::vector<int> cand{j[0], j[0] + 1, j[1], j[1] + 1, j[2], j[3], j[4], j[5], j[6], j[7]};
      std::vector<int> sorted = cand;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) support = sorted;
    }
    require(!support.empty(), "gen_block_ar1: could not draw a collision-free model C support");
    detail::place_signals(truth.beta, support, detail::signs_a(), 1.0);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  d.y = d.X * truth.beta;
  for (int i = 0; i < s.n; ++i) d.y[i] += s.sigma * normal(rng);

  for (int j = 0; j < s.p; ++j) {
    if (truth.beta[j] != 0.0) truth.support.push_back(j);
  }
  return {standardize(d), truth};
}

inline Eigen::Matrix4d model_e_block_corr() {
  Eigen::Matrix4d c;
  c << 1.0, 0.4, 0.0, 0.05,
       0.4, 1.0, 0.4, 0.0,
       0.0, 0.4, 1.0, -0.4,
       0.05, 0.0, -0.4, 1.0;
  return c;
}

inline double model_e_tau(double p) { return std::sqrt(6.0 * std::log(p)); }

// rare-and-weak design on 4-wide correlated blocks; n is derived from p
inline std::pair<Dataset, SimTruth> gen_model_e(const ModelSpec& s) {
  require(s.model == 'E', "gen_model_e: model must be E");
  require(s.p >= 8 && s.p % 4 == 0, "gen_model_e: need p >= 8 divisible by 4");
  require(s.kappa > 0.0 && s.kappa <= 1.0, "gen_model_e: kappa must lie in (0, 1]");
  require(s.pi >= 0.0 && s.pi <= 1.0, "gen_model_e: pi must lie in [0, 1]");
  require(s.theta > 0.0, "gen_model_e: theta must be > 0");
  require(s.sigma >= 0.0, "gen_model_e: sigma must be >= 0");
  const double p = (double)s.p;
  const double f_signal = 4.0 * std::pow(p, -s.theta);
  require(f_signal < 1.0, "gen_model_e: p too small for the sparsity fractions at theta");
  const int n = (int)std::ceil(std::pow(p, s.kappa));
  const double tau = model_e_tau(p);
  const int n_blocks = s.p / 4;

  const Eigen::Matrix4d corr = model_e_block_corr();
  Eigen::LLT<Eigen::Matrix4d> llt(corr);
  require(llt.info() == Eigen::Success, "gen_model_e: block correlation is not positive definite");
  const Eigen::Matrix4d L = llt.matrixL();

  std::mt19937_64 rng = substream(s.seed, Stream::generate, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // per-block signal count: 0 w.p. 1 - f_signal, 1 w.p. (1-pi) f_signal,
  // 2..4 w.p. pi f_signal / 3 each
  SimTruth truth;
  truth.sigma = s.sigma;
  truth.beta = Eigen::VectorXd::Zero(s.p);
  const double f1 = (1.0 - s.pi) * f_signal;
  const double f_each = s.pi * f_signal / 3.0;
  for (int b = 0; b < n_blocks; ++b) {
    const double u = unif(rng);
    int k = 0;
    if (u >= 1.0 - f_signal) {
      double rest = u - (1.0 - f_signal);
      if (rest < f1 || f_each <= 0.0) {
        k = 1;
      } else {
        k = 2 + std::min(2, (int)((rest - f1) / f_each));
      }
    }
    if (k == 0) continue;
    int slots[4] = {0, 1, 2, 3};
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, 3);
      std::swap(slots[i], slots[pick(rng)]);
    }
    for (int i = 0; i < k; ++i) {
      const double z = unif(rng) < 0.5 ? 1.0 : -1.0;
      double mag = tau;
      if (unif(rng) >= 0.8) {
        const double v = normal(rng);
        mag = tau * (1.0 + v * v / 6.0);
      }
      truth.beta[4 * b + slots[i]] = z * mag;
    }
  }

  Dataset d;
  d.n = n;
  d.p = s.p;
  d.X.resize(n, s.p);
  Eigen::MatrixXd z(n, 4);
  for (int b = 0; b < n_blocks; ++b) {
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < n; ++i) z(i, c) = normal(rng);
    }
    d.X.middleCols(4 * b, 4) = z * L.transpose();
  }
  d.y = d.X * truth.beta;
  for (int i = 0; i < n; ++i) d.y[i] += s.sigma * normal(rng);

  for (int j = 0; j < s.p; ++j) {
    if (truth.beta[j] != 0.0) truth.support.push_back(j);
  }
  return {standardize(d), truth};
}

inline std::pair<Dataset, SimTruth> generate(const ModelSpec& s) {
  return s.model == 'E' ? gen_model_e(s) : gen_block_ar1(s);
}

}  // namespace cis
