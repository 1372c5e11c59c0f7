#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "cis/csv.hpp"
#include "cis/icis.hpp"
#include "cis/screening.hpp"
#include "cis/simgen.hpp"

namespace cis {

struct BenchConfig {
  ModelSpec model;
  int reps = 1;
  std::vector<std::string> methods;  // subset of CIS, SIS, HOLP, ICIS, ISIS, Lasso, AdaptiveLasso
  std::uint64_t seed = 0;
  int n_threads = 1;
  double delta = 0.0;    // 0 resolves per dataset
  double delta_c = 5.0;
  int cap = 0;
  IcisParams icis;       // B, max_iter, screen_k, freeze_partition
  double psi = 0.5;      // fixed frequency threshold when not calibrating
  bool calibrate_psi = false;
  double q = 0.1;
  int n_perm = 20;
  bool record_timings = false;  // off keeps records.csv byte-stable across reruns
};

struct BenchRecord {
  int replicate = 0;  // 1-based
  std::uint64_t seed = 0;
  std::string model;
  std::string method;
  int min_model_size = -1;  // -1 renders as an empty cell
  int fp = -1;
  int fn = -1;
  double wall_ms = 0.0;
};

struct Aggregate {
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  int n_reps = 0;
};

struct ExperimentReport {
  BenchConfig config;
  std::vector<BenchRecord> records;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> failures;
  double total_wall_ms = 0.0;
};

namespace detail {

inline bool method_is_screener(const std::string& m) {
  return m == "CIS" || m == "SIS" || m == "HOLP";
}

inline void validate_methods(const std::vector<std::string>& methods) {
  static const std::vector<std::string> allowed{"CIS",  "SIS",   "HOLP",
                                                "ICIS", "ISIS", "Lasso", "AdaptiveLasso"};
  require(!methods.empty(), "bench: no methods requested");
  for (const auto& m : methods) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw error("bench: unknown method '" + m + "' (allowed: " + list + ")");
    }
  }
}

// plain lasso baseline: unit weights, same BIC rule and grid as adaptive_lasso
inline ActiveSet lasso_path_bic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const int q = (int)X.cols();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(q);
  // baseline uses practical path budgets: the BIC optimum sits in the sparse
  // part of the path, the near-interpolating tail fits only burn time
  cis::detail::PathOptions opts;
  opts.max_sweeps = 2000;
  opts.tol = 1e-7;
  opts.df_exit = (int)y.size() / 2;
  const cis::detail::BicPathResult path = cis::detail::bic_path(y, X, w, opts);
  ActiveSet sel;
  for (int j = 0; j < q; ++j) {
    if (path.coefficients[j] != 0.0) sel.push_back(j);
  }
  return sel;
}

inline std::pair<int, int> fp_fn(const ActiveSet& selected, const ActiveSet& truth) {
  int fp = 0, fn = 0;
  std::size_t i = 0, j = 0;
  while (i < selected.size() || j < truth.size()) {
    if (j == truth.size() || (i < selected.size() && selected[i] < truth[j])) {
      ++fp;
      ++i;
    } else if (i == selected.size() || truth[j] < selected[i]) {
      ++fn;
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return {fp, fn};
}

}  // namespace detail

inline ExperimentReport run_experiment(const BenchConfig& cfg) {
  require(cfg.reps >= 1, "bench: reps must be >= 1");
  detail::validate_methods(cfg.methods);
  require(cfg.psi > 0.0, "bench: psi must be > 0");
  require(cfg.q > 0.0 && cfg.q < 1.0, "bench: q must lie in (0, 1)");

  const auto t_start = std::chrono::steady_clock::now();
  const int n_methods = (int)cfg.methods.size();
  // slot per (replicate, method) so parallel replicates merge deterministically
  std::vector<std::vector<BenchRecord>> rows((std::size_t)cfg.reps);
  std::vector<std::vector<std::string>> errors((std::size_t)cfg.reps);

  parallel_for(cfg.reps, cfg.n_threads, [&](int r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, Stream::replicate, (std::uint64_t)r);
    rows[r].assign(n_methods, BenchRecord{});
    Dataset d;
    SimTruth truth;
    try {
      ModelSpec ms = cfg.model;
      ms.seed = rep_seed;
      std::tie(d, truth) = generate(ms);
    } catch (const std::exception& e) {
      errors[r].push_back("replicate " + std::to_string(r + 1) + ": generate: " + e.what());
      return;
    }
    for (int mi = 0; mi < n_methods; ++mi) {
      const std::string& method = cfg.methods[mi];
      BenchRecord& rec = rows[r][mi];
      rec.replicate = r + 1;
      rec.seed = rep_seed;
      rec.model = std::string(1, cfg.model.model);
      rec.method = method;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (detail::method_is_screener(method)) {
          ScreenStats stats;
          if (method == "CIS") {
            const double delta = cfg.delta > 0.0
                                     ? cfg.delta
                                     : default_delta((double)d.n, (double)d.p, cfg.delta_c);
            const int cap = cfg.cap > 0 ? cfg.cap : default_cap(d.n);
            stats = semi_partial_all(d, partition_blocks(threshold_edges(d, delta, 1), cap), 1);
          } else if (method == "SIS") {
            stats = sis_stats(d);
          } else {
            stats = holp_stats(d);
          }
          rec.min_model_size = min_model_size(stats, truth.support);
        } else if (method == "ICIS" || method == "ISIS") {
          IcisParams prm = cfg.icis;
          prm.delta = cfg.delta;
          prm.delta_c = cfg.delta_c;
          prm.cap = cfg.cap;
          prm.screener = method == "ISIS" ? Screener::sis : Screener::cis;
          prm.seed = derive_seed(rep_seed, Stream::method, (std::uint64_t)mi);
          prm.n_threads = 1;
          FrequencyTable freq = icis_resample(d, prm);
          double psi_use = cfg.psi;
          if (cfg.calibrate_psi) {
            psi_use = permutation_fdr(d, cfg.q, prm, cfg.n_perm, &freq).chosen_psi;
          }
          auto [fp, fn] = detail::fp_fn(select_by_frequency(freq, psi_use).selected, truth.support);
          rec.fp = fp;
          rec.fn = fn;
        } else if (method == "Lasso") {
          auto [fp, fn] = detail::fp_fn(detail::lasso_path_bic(d.y, d.X), truth.support);
          rec.fp = fp;
          rec.fn = fn;
        } else {  // AdaptiveLasso
          auto [fp, fn] = detail::fp_fn(adaptive_lasso(d.y, d.X).selected, truth.support);
          rec.fp = fp;
          rec.fn = fn;
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (cfg.record_timings) {
          rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
      } catch (const std::exception& e) {
        rec.replicate = 0;  // marks the slot as failed
        errors[r].push_back("replicate " + std::to_string(r + 1) + " method " + method + ": " +
                            e.what());
      }
    }
  });

  ExperimentReport report;
  report.config = cfg;
  for (int r = 0; r < cfg.reps; ++r) {
    for (const auto& rec : rows[r]) {
      if (rec.replicate > 0) report.records.push_back(rec);
    }
    for (const auto& msg : errors[r]) report.failures.push_back(msg);
  }

  for (const auto& method : cfg.methods) {
    const bool screener = detail::method_is_screener(method);
    const std::vector<std::string> metrics =
        screener ? std::vector<std::string>{"min_model_size"}
                 : std::vector<std::string>{"fp", "fn"};
    for (const auto& metric : metrics) {
      std::vector<double> vals;
      for (const auto& rec : report.records) {
        if (rec.method != method) continue;
        if (metric == "min_model_size") vals.push_back((double)rec.min_model_size);
        if (metric == "fp") vals.push_back((double)rec.fp);
        if (metric == "fn") vals.push_back((double)rec.fn);
      }
      Aggregate agg;
      agg.method = method;
      agg.metric = metric;
      agg.n_reps = (int)vals.size();
      if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        agg.mean = sum / vals.size();
        if (vals.size() > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - agg.mean) * (v - agg.mean);
          agg.sd = std::sqrt(ss / (vals.size() - 1));
        }
      }
      report.aggregates.push_back(agg);
    }
  }

  const auto t_end = std::chrono::steady_clock::now();
  report.total_wall_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();
  return report;
}

inline void write_records_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_records_csv: cannot open '" + path + "'");
  out << "replicate,seed,model,method,min_model_size,fp,fn,wall_ms\n";
  for (const auto& r : records) {
    out << r.replicate << ',' << r.seed << ',' << r.model << ',' << r.method << ',';
    if (r.min_model_size >= 0) out << r.min_model_size;
    out << ',';
    if (r.fp >= 0) out << r.fp;
    out << ',';
    if (r.fn >= 0) out << r.fn;
    out << ',' << fmt_double(r.wall_ms) << '\n';
  }
  require(out.good(), "write_records_csv: write failed for '" + path + "'");
}

inline void write_aggregates_csv(const std::vector<Aggregate>& aggs, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_aggregates_csv: cannot open '" + path + "'");
  out << "method,metric,mean,sd,n_reps\n";
  for (const auto& a : aggs) {
    out << a.method << ',' << a.metric << ',' << fmt_double(a.mean) << ',' << fmt_double(a.sd)
        << ',' << a.n_reps << '\n';
  }
  require(out.good(), "write_aggregates_csv: write failed for '" + path + "'");
}

// named starting points for the three benchmark tables; every field can still
// be overridden by flags afterwards
inline void apply_preset(BenchConfig& cfg, const std::string& name) {
  if (name == "table1-desk") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'A';
    cfg.model.n = 400;
    cfg.model.p = 2000;
    cfg.model.m = 20;
    cfg.model.rho = 0.7;
    cfg.reps = 100;
    cfg.methods = {"CIS", "SIS"};
  } else if (name == "table1-full") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'A';
    cfg.model.n = 1000;
    cfg.model.p = 10000;
    cfg.model.m = 100;
    cfg.model.rho = 0.9;
    cfg.reps = 100;
    cfg.methods = {"CIS", "SIS", "HOLP"};
  } else if (name == "table2-desk") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'D';
    cfg.model.n = 1000;
    cfg.model.p = 1000;
    cfg.model.m = 10;
    cfg.model.rho = 0.9;
    cfg.model.beta_mag = 1.0;
    cfg.reps = 100;
    cfg.methods = {"ICIS", "Lasso"};
  } else if (name == "table2-full") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'D';
    cfg.model.n = 1000;
    cfg.model.p = 10000;
    cfg.model.m = 100;
    cfg.model.rho = 0.9;
    cfg.model.beta_mag = 1.0;
    cfg.reps = 100;
    cfg.methods = {"ICIS", "Lasso", "AdaptiveLasso", "ISIS"};
  } else if (name == "table3-desk") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'E';
    cfg.model.p = 1000;
    cfg.reps = 50;
    cfg.methods = {"ICIS", "Lasso", "ISIS"};
    cfg.delta_c = 2.5;
  } else if (name == "table3-full") {
    cfg.model = ModelSpec{};
    cfg.model.model = 'E';
    cfg.model.p = 5000;
    cfg.reps = 100;
    cfg.methods = {"ICIS", "Lasso", "ISIS"};
    cfg.delta_c = 2.5;
  } else {
    throw error("bench: unknown preset '" + name +
                "' (available: table1-desk, table1-full, table2-desk, table2-full, "
                "table3-desk, table3-full)");
  }
}

}  // namespace cis
