#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cis/cov_block.hpp"
#include "cis/dataset.hpp"
#include "cis/parallel.hpp"
#include "cis/regression.hpp"
#include "cis/rng.hpp"
#include "cis/screening.hpp"

namespace cis {

enum class Screener { cis, sis };

struct IcisParams {
  int B = 50;             // resamples
  int max_iter = 5;       // screening/selection rounds per pass
  int screen_k = 0;       // 0 resolves to ceil(n / log n)
  double delta = 0.0;     // 0 resolves to default_delta(n, p, delta_c)
  double delta_c = 5.0;
  int cap = 0;            // 0 resolves to max(2, n / 2)
  std::uint64_t seed = 0;
  Screener screener = Screener::cis;
  bool freeze_partition = false;  // reuse the full-data partition across resamples
  int n_threads = 1;
};

struct FrequencyTable {
  Eigen::VectorXd psi_hat;  // selection frequency per column, multiples of 1/B
  int B = 0;
};

struct FdrCurve {
  std::vector<double> thresholds;  // the grid 1/B, 2/B, ..., 1
  std::vector<double> fdr_hat;     // monotone non-increasing in psi
  double chosen_psi = 0.0;         // 1 + 1/B when no grid point meets q
  double q = 0.0;
};

namespace detail {

inline int resolve_screen_k(const IcisParams& prm, int n) {
  if (prm.screen_k > 0) return prm.screen_k;
  return (int)std::ceil(n / std::log((double)n));
}

inline double resolve_delta(const IcisParams& prm, int n, int p) {
  return prm.delta > 0.0 ? prm.delta : default_delta((double)n, (double)p, prm.delta_c);
}

inline int resolve_cap(const IcisParams& prm, int n) {
  return prm.cap > 0 ? prm.cap : default_cap(n);
}

}  // namespace detail

// one deterministic pass: screen against the current residual inside the
// partition induced on still-unselected columns, fit the adaptive lasso on the
// screened set, absorb its selections, repeat until nothing new enters
inline ActiveSet icis_single(const Dataset& d, const IcisParams& prm,
                             const BlockPartition* frozen = nullptr) {
  validate_dataset(d);
  require(d.standardized, "icis_single: dataset must be standardized");
  require(prm.max_iter >= 1, "icis_single: max_iter must be >= 1");
  const int k = detail::resolve_screen_k(prm, d.n);
  require(k >= 1, "icis_single: screen size must be >= 1");

  BlockPartition local;
  const BlockPartition* part = frozen;
  if (!part && prm.screener == Screener::cis) {
    const double delta = detail::resolve_delta(prm, d.n, d.p);
    local = partition_blocks(threshold_edges(d, delta, prm.n_threads), detail::resolve_cap(prm, d.n));
    part = &local;
  }

  std::vector<char> active(d.p, 1);
  ActiveSet selected;
  Eigen::VectorXd resp = d.y;
  const double sqrt_n = std::sqrt((double)d.n);

  for (int iter = 0; iter < prm.max_iter; ++iter) {
    const double resp_norm = resp.norm();
    if (resp_norm <= 1e-12 * sqrt_n) break;  // residual numerically zero

    Eigen::VectorXd stats = Eigen::VectorXd::Constant(d.p, -1.0);
    if (prm.screener == Screener::cis) {
      for (const auto& block : part->blocks) {
        std::vector<int> induced;
        for (int v : block) {
          if (active[v]) induced.push_back(v);
        }
        if (!induced.empty()) {
          detail::block_semi_partial(d.X, resp, induced, resp_norm, stats);
        }
      }
    } else {
      for (int j = 0; j < d.p; ++j) {
        if (active[j]) stats[j] = std::abs(d.X.col(j).dot(resp)) / (sqrt_n * resp_norm);
      }
    }

    std::vector<int> remaining;
    for (int j = 0; j < d.p; ++j) {
      if (active[j]) remaining.push_back(j);
    }
    if (remaining.empty()) break;
    const int kk = std::min<int>(k, (int)remaining.size());
    std::partial_sort(remaining.begin(), remaining.begin() + kk, remaining.end(),
                      [&](int a, int b) {
                        if (stats[a] != stats[b]) return stats[a] > stats[b];
                        return a < b;
                      });
    std::vector<int> cand(remaining.begin(), remaining.begin() + kk);
    std::sort(cand.begin(), cand.end());

    Eigen::MatrixXd Xs(d.n, kk);
    for (int i = 0; i < kk; ++i) Xs.col(i) = d.X.col(cand[i]);
    AdaptiveLassoResult ada = adaptive_lasso(resp, Xs);
    if (ada.selected.empty()) break;

    ActiveSet newly;
    for (int local_j : ada.selected) newly.push_back(cand[local_j]);
    selected = merge_active(selected, newly);
    for (int g : newly) active[g] = 0;
    // the next pass regresses against the residuals of the fitted selection,
    // not the penalized fit: lasso shrinkage leaves a leftover along the
    // chosen columns that later passes would chase
    if ((int)newly.size() < d.n) {
      Eigen::MatrixXd Xsel(d.n, (int)newly.size());
      for (std::size_t i = 0; i < newly.size(); ++i) Xsel.col((Eigen::Index)i) = d.X.col(newly[i]);
      resp = ols_fit(resp, Xsel).residuals;
    } else {
      resp = ada.residuals;
    }
    resp.array() -= resp.mean();
  }
  return selected;
}

// selection frequencies over B joint row resamples of (y, X); each resample is
// re-standardized, redrawn up to 10 times if it produces a constant column
inline FrequencyTable icis_resample(const Dataset& d, const IcisParams& prm) {
  validate_dataset(d);
  require(d.standardized, "icis_resample: dataset must be standardized");
  require(prm.B >= 1, "icis_resample: B must be >= 1");

  BlockPartition frozen;
  bool have_frozen = false;
  if (prm.freeze_partition && prm.screener == Screener::cis) {
    const double delta = detail::resolve_delta(prm, d.n, d.p);
    frozen = partition_blocks(threshold_edges(d, delta, prm.n_threads),
                              detail::resolve_cap(prm, d.n));
    have_frozen = true;
  }

  std::vector<ActiveSet> picks(prm.B);
  parallel_for(prm.B, prm.n_threads, [&](int r) {
    std::mt19937_64 rng = substream(prm.seed, Stream::resample, (std::uint64_t)r);
    std::uniform_int_distribution<int> row(0, d.n - 1);
    Dataset boot;
    boot.n = d.n;
    boot.p = d.p;
    boot.names = d.names;
    boot.X.resize(d.n, d.p);
    boot.y.resize(d.n);
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      for (int i = 0; i < d.n; ++i) {
        const int src = row(rng);
        boot.y[i] = d.y[src];
        boot.X.row(i) = d.X.row(src);
      }
      ok = true;
      for (int j = 0; j < d.p && ok; ++j) {
        if (boot.X.col(j).maxCoeff() == boot.X.col(j).minCoeff()) ok = false;
      }
    }
    require(ok, "icis_resample: resample " + std::to_string(r) +
                    " still has a constant column after 10 redraws");
    IcisParams inner = prm;
    inner.n_threads = 1;
    picks[r] = icis_single(standardize(boot), inner, have_frozen ? &frozen : nullptr);
  });

  FrequencyTable table;
  table.B = prm.B;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(d.p);
  for (const auto& sel : picks) {
    for (int j : sel) counts[j] += 1.0;
  }
  table.psi_hat = counts / (double)prm.B;
  return table;
}

inline SelectionResult select_by_frequency(const FrequencyTable& table, double psi) {
  require(psi > 0.0, "select_by_frequency: psi must be > 0");
  SelectionResult res;
  res.statistic_used = "ICIS-frequency";
  res.threshold = psi;
  for (int j = 0; j < (int)table.psi_hat.size(); ++j) {
    if (table.psi_hat[j] >= psi) res.selected.push_back(j);
  }
  return res;
}

// null frequencies from response permutations calibrate an FDR estimate per
// grid threshold; the curve is forced non-increasing by a running max taken
// from the highest threshold downward, so chosen_psi is conservative
inline FdrCurve permutation_fdr(const Dataset& d, double q, const IcisParams& prm,
                                int n_perm = 20, const FrequencyTable* observed = nullptr,
                                int b_null_override = 0) {
  validate_dataset(d);
  require(d.standardized, "permutation_fdr: dataset must be standardized");
  require(q > 0.0 && q < 1.0, "permutation_fdr: q must lie in (0, 1)");
  require(n_perm >= 1, "permutation_fdr: n_perm must be >= 1");
  require(prm.B >= 1, "permutation_fdr: B must be >= 1");

  FrequencyTable obs;
  if (observed) {
    require(observed->B == prm.B, "permutation_fdr: observed table B does not match params");
    obs = *observed;
  } else {
    obs = icis_resample(d, prm);
  }
  const int B = prm.B;
  const int B_null = b_null_override > 0 ? b_null_override : std::max(10, B / 5);
  const int p = d.p;

  std::vector<long> obs_count(p);
  for (int j = 0; j < p; ++j) obs_count[j] = std::lround(obs.psi_hat[j] * B);

  std::vector<std::vector<long>> null_count(n_perm);
  parallel_for(n_perm, prm.n_threads, [&](int t) {
    std::mt19937_64 rng = substream(prm.seed, Stream::permutation, (std::uint64_t)t);
    std::vector<double> y_perm(d.y.data(), d.y.data() + d.n);
    shuffle_in_place(y_perm, rng);
    Dataset dt = d;
    dt.y = Eigen::Map<Eigen::VectorXd>(y_perm.data(), d.n);
    IcisParams inner = prm;
    inner.B = B_null;
    inner.seed = derive_seed(prm.seed, Stream::perm_icis, (std::uint64_t)t);
    inner.n_threads = 1;
    FrequencyTable nt = icis_resample(dt, inner);
    null_count[t].resize(p);
    for (int j = 0; j < p; ++j) null_count[t][j] = std::lround(nt.psi_hat[j] * B_null);
  });

  FdrCurve curve;
  curve.q = q;
  curve.thresholds.resize(B);
  curve.fdr_hat.resize(B);
  std::vector<double> raw(B);
  for (int i = 0; i < B; ++i) {
    curve.thresholds[i] = (double)(i + 1) / B;
    // count(k / B_null >= (i+1) / B) compared in integers to dodge rounding
    const long lhs_scale = (long)(i + 1) * B_null;
    double null_mean = 0.0;
    for (int t = 0; t < n_perm; ++t) {
      long c = 0;
      for (int j = 0; j < p; ++j) {
        if (null_count[t][j] * (long)B >= lhs_scale) ++c;
      }
      null_mean += (double)c;
    }
    null_mean /= n_perm;
    long obs_at = 0;
    for (int j = 0; j < p; ++j) {
      if (obs_count[j] >= i + 1) ++obs_at;
    }
    raw[i] = null_mean / (double)std::max<long>(1, obs_at);
  }
  curve.fdr_hat[B - 1] = raw[B - 1];
  for (int i = B - 2; i >= 0; --i) {
    curve.fdr_hat[i] = std::max(raw[i], curve.fdr_hat[i + 1]);
  }
  curve.chosen_psi = 1.0 + 1.0 / B;
  for (int i = 0; i < B; ++i) {
    if (curve.fdr_hat[i] <= q) {
      curve.chosen_psi = curve.thresholds[i];
      break;
    }
  }
  return curve;
}

}  // namespace cis
