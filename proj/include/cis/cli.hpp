#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cis/bench.hpp"
#include "cis/csv.hpp"
#include "cis/icis.hpp"
#include "cis/screening.hpp"
#include "cis/simgen.hpp"

namespace cis::cli {

namespace detail {

using ordered_json = nlohmann::ordered_json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

inline std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ordered_json versions_json() {
  ordered_json v;
  v["toolkit"] = version;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  return v;
}

inline std::string cfg_quote(const std::string& v) {
  if (v.find_first_of(", \t#\"") == std::string::npos && !v.empty()) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// rerun.cfg pins every resolved option so `cis --config rerun.cfg` repeats the
// run; the manifest records the same information for the reader
inline void write_rerun_cfg(const std::filesystem::path& path, const GlobalOpts& g,
                            const std::string& subcommand,
                            const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path.string() + "' for writing");
  out << "# rerun with: cis --config " << path.filename().string() << "\n";
  out << "seed=" << g.seed << "\n";
  out << "threads=" << g.threads << "\n";
  out << "out-dir=" << cfg_quote(g.out_dir) << "\n";
  out << "[" << subcommand << "]\n";
  for (const auto& [key, value] : kv) out << key << "=" << cfg_quote(value) << "\n";
  require(out.good(), "write failed for '" + path.string() + "'");
}

inline void write_manifest(const std::filesystem::path& path, const std::string& command,
                           const GlobalOpts& g, const ordered_json& config,
                           const std::vector<std::string>& outputs, double wall_ms,
                           const std::vector<std::string>& warnings = {},
                           const std::vector<std::string>& failures = {},
                           const ordered_json& extra = ordered_json::object()) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["out_dir"] = g.out_dir;
  m["config"] = config;
  m["versions"] = versions_json();
  m["outputs"] = outputs;
  m["timings"] = ordered_json{{"total_wall_ms", wall_ms}};
  if (!warnings.empty()) m["warnings"] = warnings;
  if (!failures.empty()) m["failures"] = failures;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path.string() + "' for writing");
  out << m.dump(2) << "\n";
  require(out.good(), "write failed for '" + path.string() + "'");
}

inline std::vector<std::string> split_methods(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// ----- simulate -----

struct SimulateOpts {
  std::string model;
  int n = 0;
  int p = 0;
  int m = 0;
  double rho = 0.0;
  double beta_mag = 1.0;
  double sigma = 1.0;
  double kappa = 0.975;
  double pi = 0.2;
  double theta = 0.35;
};

inline int run_simulate(const GlobalOpts& g, const SimulateOpts& o, const CLI::App* sub) {
  Timer timer;
  ModelSpec spec;
  spec.model = o.model[0];
  spec.p = o.p;
  spec.sigma = o.sigma;
  spec.seed = g.seed;
  const bool is_e = spec.model == 'E';
  const bool needs_m = spec.model == 'A' || spec.model == 'B' || spec.model == 'D';
  if (is_e) {
    require(sub->count("--n") == 0, "simulate: model E derives n from p, drop --n");
    require(sub->count("--rho") == 0, "simulate: model E takes no --rho");
    require(sub->count("--m") == 0, "simulate: model E takes no --m");
    spec.kappa = o.kappa;
    spec.pi = o.pi;
    spec.theta = o.theta;
  } else {
    require(sub->count("--n") > 0, "simulate: model " + o.model + " requires --n");
    if (spec.model == 'D' && sub->count("--rho") == 0) {
      spec.rho = 0.9;
    } else {
      require(sub->count("--rho") > 0, "simulate: model " + o.model + " requires --rho");
      spec.rho = o.rho;
    }
    spec.n = o.n;
    spec.beta_mag = o.beta_mag;
    if (needs_m) {
      require(sub->count("--m") > 0, "simulate: model " + o.model + " requires --m");
      spec.m = o.m;
    }
  }

  auto [d, truth] = generate(spec);
  const auto dir = ensure_out_dir(g.out_dir);
  write_csv(d, (dir / "dataset.csv").string());
  {
    std::ofstream out(dir / "truth.csv");
    require(out.good(), "simulate: cannot open truth.csv for writing");
    out << "variable_index_1based,name,beta\n";
    for (int j : truth.support) {
      out << (j + 1) << ',' << d.names[j] << ',' << fmt_double(truth.beta[j]) << '\n';
    }
    require(out.good(), "simulate: write failed for truth.csv");
  }

  std::vector<std::pair<std::string, std::string>> kv;
  kv.push_back({"model", o.model});
  ordered_json cfg;
  cfg["model"] = o.model;
  if (!is_e) {
    kv.push_back({"n", std::to_string(spec.n)});
    cfg["n"] = spec.n;
  }
  kv.push_back({"p", std::to_string(spec.p)});
  cfg["p"] = spec.p;
  if (needs_m) {
    kv.push_back({"m", std::to_string(spec.m)});
    cfg["m"] = spec.m;
  }
  if (!is_e) {
    kv.push_back({"rho", fmt_double(spec.rho)});
    cfg["rho"] = spec.rho;
  }
  if (spec.model == 'D') {
    kv.push_back({"beta-mag", fmt_double(spec.beta_mag)});
    cfg["beta_mag"] = spec.beta_mag;
  }
  if (is_e) {
    kv.push_back({"kappa", fmt_double(spec.kappa)});
    kv.push_back({"pi", fmt_double(spec.pi)});
    kv.push_back({"theta", fmt_double(spec.theta)});
    cfg["kappa"] = spec.kappa;
    cfg["pi"] = spec.pi;
    cfg["theta"] = spec.theta;
    cfg["n_derived"] = d.n;
  }
  kv.push_back({"sigma", fmt_double(spec.sigma)});
  cfg["sigma"] = spec.sigma;
  write_rerun_cfg(dir / "rerun.cfg", g, "simulate", kv);
  write_manifest(dir / "manifest.json", "simulate", g, cfg,
                 {"dataset.csv", "truth.csv", "rerun.cfg"}, timer.ms());
  return 0;
}

// ----- screen -----

struct ScreenOpts {
  std::string input;
  std::string response = "y";
  std::string method = "cis";
  double delta = 0.0;
  double delta_c = 5.0;
  int cap = 0;
  int top_k = 0;
  double nu = 0.0;
};

inline void write_stats_csv(const std::filesystem::path& path, const Dataset& d,
                            const ScreenStats& stats, const std::vector<int>* ids) {
  std::vector<int> order = cis::detail::rank_order(stats.stats);
  std::vector<int> rank_of(d.p);
  for (int r = 0; r < d.p; ++r) rank_of[order[r]] = r + 1;
  std::ofstream out(path);
  require(out.good(), "screen: cannot open stats.csv for writing");
  out << "variable_index_1based,name,method,statistic,rank,block_id\n";
  for (int j = 0; j < d.p; ++j) {
    out << (j + 1) << ',' << d.names[j] << ',' << stats.method << ','
        << fmt_double(stats.stats[j]) << ',' << rank_of[j] << ',';
    if (ids) out << (*ids)[j];
    out << '\n';
  }
  require(out.good(), "screen: write failed for stats.csv");
}

inline void write_selection_csv(const std::filesystem::path& path, const Dataset& d,
                                const ActiveSet& sel) {
  std::ofstream out(path);
  require(out.good(), "cannot open selection.csv for writing");
  out << "variable_index_1based,name\n";
  for (int j : sel) out << (j + 1) << ',' << d.names[j] << '\n';
  require(out.good(), "write failed for selection.csv");
}

inline int run_screen(const GlobalOpts& g, const ScreenOpts& o, const CLI::App* sub) {
  Timer timer;
  const bool has_k = sub->count("--top-k") > 0;
  const bool has_nu = sub->count("--nu") > 0;
  require(has_k != has_nu, "screen: exactly one of --top-k or --nu is required");
  if (has_k) require(o.top_k >= 1, "screen: --top-k must be >= 1, got " + std::to_string(o.top_k));
  if (has_nu) require(o.nu > 0.0, "screen: --nu must be > 0");

  Dataset d = standardize(load_csv(o.input, o.response));
  ScreenStats stats;
  std::vector<int> ids;
  ordered_json partition_info = ordered_json::object();
  if (o.method == "cis") {
    const double delta =
        o.delta > 0.0 ? o.delta : default_delta((double)d.n, (double)d.p, o.delta_c);
    const int cap = o.cap > 0 ? o.cap : default_cap(d.n);
    BlockPartition part = partition_blocks(threshold_edges(d, delta, g.threads), cap);
    ids = block_ids(part, d.p);
    partition_info["delta"] = part.delta;
    partition_info["cap"] = part.cap;
    partition_info["forced_splits"] = part.forced_splits;
    partition_info["n_blocks"] = (int)part.blocks.size();
    int largest = 0;
    for (const auto& b : part.blocks) largest = std::max(largest, (int)b.size());
    partition_info["largest_block"] = largest;
    stats = semi_partial_all(d, part, g.threads);
  } else if (o.method == "sis") {
    stats = sis_stats(d);
  } else {
    stats = holp_stats(d);
  }
  print_warnings(stats.warnings);

  SelectionResult sel =
      cis_screen(stats, has_k ? ScreenRule::top_k(o.top_k) : ScreenRule::threshold(o.nu));

  const auto dir = ensure_out_dir(g.out_dir);
  write_stats_csv(dir / "stats.csv", d, stats, o.method == "cis" ? &ids : nullptr);
  write_selection_csv(dir / "selection.csv", d, sel.selected);
  std::vector<std::string> outputs{"stats.csv", "selection.csv", "rerun.cfg"};
  if (o.method == "cis") {
    std::ofstream out(dir / "partition.csv");
    require(out.good(), "screen: cannot open partition.csv for writing");
    out << "variable_index_1based,block_id\n";
    for (int j = 0; j < d.p; ++j) out << (j + 1) << ',' << ids[j] << '\n';
    require(out.good(), "screen: write failed for partition.csv");
    std::ofstream pj(dir / "partition.json");
    require(pj.good(), "screen: cannot open partition.json for writing");
    pj << partition_info.dump(2) << "\n";
    outputs.push_back("partition.csv");
    outputs.push_back("partition.json");
  }

  std::vector<std::pair<std::string, std::string>> kv{
      {"input", o.input},       {"response", o.response},
      {"method", o.method},     {"delta", fmt_double(o.delta)},
      {"delta-c", fmt_double(o.delta_c)}, {"cap", std::to_string(o.cap)},
  };
  if (has_k) kv.push_back({"top-k", std::to_string(o.top_k)});
  if (has_nu) kv.push_back({"nu", fmt_double(o.nu)});
  ordered_json cfg;
  cfg["input"] = o.input;
  cfg["response"] = o.response;
  cfg["method"] = o.method;
  cfg["delta"] = o.delta;
  cfg["delta_c"] = o.delta_c;
  cfg["cap"] = o.cap;
  if (has_k) cfg["top_k"] = o.top_k;
  if (has_nu) cfg["nu"] = o.nu;
  ordered_json extra;
  if (o.method == "cis") extra["partition"] = partition_info;
  extra["n_selected"] = (int)sel.selected.size();
  write_rerun_cfg(dir / "rerun.cfg", g, "screen", kv);
  write_manifest(dir / "manifest.json", "screen", g, cfg, outputs, timer.ms(), stats.warnings,
                 {}, extra);
  return 0;
}

// ----- icis -----

struct IcisOpts {
  std::string input;
  std::string response = "y";
  int B = 50;
  int max_iter = 5;
  int screen_k = 0;
  double delta = 0.0;
  double delta_c = 5.0;
  int cap = 0;
  double psi = 0.0;  // 0 means calibrate via permutations
  double q = 0.1;
  int n_perm = 20;
  int b_null = 0;
  bool freeze_partition = false;
};

inline int run_icis(const GlobalOpts& g, const IcisOpts& o) {
  Timer timer;
  require(o.q > 0.0 && o.q < 1.0, "icis: --q must lie in (0, 1), got " + fmt_double(o.q));
  require(o.B >= 1, "icis: --B must be >= 1");
  require(o.n_perm >= 1, "icis: --n-perm must be >= 1");
  Dataset d = standardize(load_csv(o.input, o.response));

  IcisParams prm;
  prm.B = o.B;
  prm.max_iter = o.max_iter;
  prm.screen_k = o.screen_k;
  prm.delta = o.delta;
  prm.delta_c = o.delta_c;
  prm.cap = o.cap;
  prm.seed = g.seed;
  prm.freeze_partition = o.freeze_partition;
  prm.n_threads = g.threads;

  FrequencyTable freq = icis_resample(d, prm);
  double psi_used = o.psi;
  FdrCurve curve;
  const bool calibrated = !(o.psi > 0.0);
  if (calibrated) {
    curve = permutation_fdr(d, o.q, prm, o.n_perm, &freq, o.b_null);
    psi_used = curve.chosen_psi;
  }
  SelectionResult sel = select_by_frequency(freq, psi_used);

  const auto dir = ensure_out_dir(g.out_dir);
  {
    std::ofstream out(dir / "frequencies.csv");
    require(out.good(), "icis: cannot open frequencies.csv for writing");
    out << "variable_index_1based,name,psi_hat\n";
    for (int j = 0; j < d.p; ++j) {
      out << (j + 1) << ',' << d.names[j] << ',' << fmt_double(freq.psi_hat[j]) << '\n';
    }
    require(out.good(), "icis: write failed for frequencies.csv");
  }
  std::vector<std::string> outputs{"frequencies.csv", "selection.csv", "rerun.cfg"};
  if (calibrated) {
    std::ofstream out(dir / "fdr_curve.csv");
    require(out.good(), "icis: cannot open fdr_curve.csv for writing");
    out << "psi,fdr_hat\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
      out << fmt_double(curve.thresholds[i]) << ',' << fmt_double(curve.fdr_hat[i]) << '\n';
    }
    require(out.good(), "icis: write failed for fdr_curve.csv");
    outputs.push_back("fdr_curve.csv");
  }
  write_selection_csv(dir / "selection.csv", d, sel.selected);

  std::vector<std::pair<std::string, std::string>> kv{
      {"input", o.input},
      {"response", o.response},
      {"B", std::to_string(o.B)},
      {"max-iter", std::to_string(o.max_iter)},
      {"screen-k", std::to_string(o.screen_k)},
      {"delta", fmt_double(o.delta)},
      {"delta-c", fmt_double(o.delta_c)},
      {"cap", std::to_string(o.cap)},
      {"psi", fmt_double(o.psi)},
      {"q", fmt_double(o.q)},
      {"n-perm", std::to_string(o.n_perm)},
      {"b-null", std::to_string(o.b_null)},
      {"freeze-partition", o.freeze_partition ? "true" : "false"},
  };
  ordered_json cfg;
  for (const auto& [k, v] : kv) cfg[k] = v;
  ordered_json extra;
  extra["psi_used"] = psi_used;
  extra["calibrated"] = calibrated;
  extra["n_selected"] = (int)sel.selected.size();
  write_rerun_cfg(dir / "rerun.cfg", g, "icis", kv);
  write_manifest(dir / "manifest.json", "icis", g, cfg, outputs, timer.ms(), {}, {}, extra);
  return 0;
}

// ----- bench -----

struct BenchOpts {
  std::string preset;
  std::string model;
  int n = 0, p = 0, m = 0, reps = 0;
  double rho = 0.0, beta_mag = 1.0, sigma = 1.0, kappa = 0.975, pi = 0.2, theta = 0.35;
  std::string methods;
  int B = 50, max_iter = 5, screen_k = 0, cap = 0, n_perm = 20;
  double delta = 0.0, delta_c = 5.0, psi = 0.5, q = 0.1;
  bool calibrate_psi = false, freeze_partition = false, record_timings = false;
};

inline int run_bench(const GlobalOpts& g, const BenchOpts& o, const CLI::App* sub) {
  Timer timer;
  BenchConfig cfg;
  if (sub->count("--preset") > 0) apply_preset(cfg, o.preset);
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--model")) cfg.model.model = o.model[0];
  if (given("--n")) cfg.model.n = o.n;
  if (given("--p")) cfg.model.p = o.p;
  if (given("--m")) cfg.model.m = o.m;
  if (given("--rho")) cfg.model.rho = o.rho;
  if (given("--beta-mag")) cfg.model.beta_mag = o.beta_mag;
  if (given("--sigma")) cfg.model.sigma = o.sigma;
  if (given("--kappa")) cfg.model.kappa = o.kappa;
  if (given("--pi")) cfg.model.pi = o.pi;
  if (given("--theta")) cfg.model.theta = o.theta;
  if (given("--reps")) cfg.reps = o.reps;
  if (given("--methods")) cfg.methods = split_methods(o.methods);
  if (given("--B")) cfg.icis.B = o.B;
  if (given("--max-iter")) cfg.icis.max_iter = o.max_iter;
  if (given("--screen-k")) cfg.icis.screen_k = o.screen_k;
  if (given("--freeze-partition")) cfg.icis.freeze_partition = o.freeze_partition;
  if (given("--delta")) cfg.delta = o.delta;
  if (given("--delta-c")) cfg.delta_c = o.delta_c;
  if (given("--cap")) cfg.cap = o.cap;
  if (given("--psi")) cfg.psi = o.psi;
  if (given("--calibrate-psi")) cfg.calibrate_psi = o.calibrate_psi;
  if (given("--q")) cfg.q = o.q;
  if (given("--n-perm")) cfg.n_perm = o.n_perm;
  if (given("--record-timings")) cfg.record_timings = o.record_timings;
  cfg.seed = g.seed;
  cfg.n_threads = g.threads;
  require(cfg.model.model == 'A' || cfg.model.model == 'B' || cfg.model.model == 'C' ||
              cfg.model.model == 'D' || cfg.model.model == 'E',
          "bench: --model must be one of A, B, C, D, E");
  require(!cfg.methods.empty(), "bench: --methods (or a --preset) is required");
  require(cfg.q > 0.0 && cfg.q < 1.0, "bench: --q must lie in (0, 1), got " + fmt_double(cfg.q));

  ExperimentReport report = run_experiment(cfg);
  const auto dir = ensure_out_dir(g.out_dir);
  write_records_csv(report.records, (dir / "records.csv").string());
  write_aggregates_csv(report.aggregates, (dir / "aggregates.csv").string());
  for (const auto& f : report.failures) std::cerr << "failure: " << f << "\n";

  std::string methods_csv;
  for (const auto& m : cfg.methods) methods_csv += (methods_csv.empty() ? "" : ",") + m;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.push_back({"model", std::string(1, cfg.model.model)});
  if (cfg.model.model != 'E') {
    kv.push_back({"n", std::to_string(cfg.model.n)});
  }
  kv.push_back({"p", std::to_string(cfg.model.p)});
  if (cfg.model.model == 'A' || cfg.model.model == 'B' || cfg.model.model == 'D') {
    kv.push_back({"m", std::to_string(cfg.model.m)});
  }
  if (cfg.model.model != 'E') {
    kv.push_back({"rho", fmt_double(cfg.model.rho)});
    kv.push_back({"beta-mag", fmt_double(cfg.model.beta_mag)});
  } else {
    kv.push_back({"kappa", fmt_double(cfg.model.kappa)});
    kv.push_back({"pi", fmt_double(cfg.model.pi)});
    kv.push_back({"theta", fmt_double(cfg.model.theta)});
  }
  kv.push_back({"sigma", fmt_double(cfg.model.sigma)});
  kv.push_back({"reps", std::to_string(cfg.reps)});
  kv.push_back({"methods", methods_csv});
  kv.push_back({"B", std::to_string(cfg.icis.B)});
  kv.push_back({"max-iter", std::to_string(cfg.icis.max_iter)});
  kv.push_back({"screen-k", std::to_string(cfg.icis.screen_k)});
  kv.push_back({"freeze-partition", cfg.icis.freeze_partition ? "true" : "false"});
  kv.push_back({"delta", fmt_double(cfg.delta)});
  kv.push_back({"delta-c", fmt_double(cfg.delta_c)});
  kv.push_back({"cap", std::to_string(cfg.cap)});
  kv.push_back({"psi", fmt_double(cfg.psi)});
  kv.push_back({"calibrate-psi", cfg.calibrate_psi ? "true" : "false"});
  kv.push_back({"q", fmt_double(cfg.q)});
  kv.push_back({"n-perm", std::to_string(cfg.n_perm)});
  kv.push_back({"record-timings", cfg.record_timings ? "true" : "false"});
  write_rerun_cfg(dir / "rerun.cfg", g, "bench", kv);

  ordered_json cj;
  for (const auto& [k, v] : kv) cj[k] = v;
  ordered_json extra;
  extra["n_records"] = (int)report.records.size();
  extra["n_failures"] = (int)report.failures.size();
  write_manifest(dir / "manifest.json", "bench", g, cj,
                 {"records.csv", "aggregates.csv", "rerun.cfg"}, report.total_wall_ms, {},
                 report.failures, extra);
  return report.failures.empty() ? 0 : 1;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"block-partitioned semi-partial correlation screening toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  detail::GlobalOpts g;
  app.add_option("--seed", g.seed, "root seed for all randomized work");
  app.add_option("--threads", g.threads, "worker thread count")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic regression dataset");
  sim->configurable();
  sim->fallthrough();
  detail::SimulateOpts so;
  sim->add_option("--model", so.model, "generator family")
      ->required()
      ->check(CLI::IsMember({"A", "B", "C", "D", "E"}));
  sim->add_option("--n", so.n, "sample size");
  sim->add_option("--p", so.p, "predictor count")->required();
  sim->add_option("--m", so.m, "block count (models A, B, D; p = 100 m)");
  sim->add_option("--rho", so.rho, "AR(1) coefficient (models A-D)");
  sim->add_option("--beta-mag", so.beta_mag, "signal magnitude (model D)");
  sim->add_option("--sigma", so.sigma, "noise standard deviation");
  sim->add_option("--kappa", so.kappa, "model E: n = ceil(p^kappa)");
  sim->add_option("--pi", so.pi, "model E: share of multi-signal blocks");
  sim->add_option("--theta", so.theta, "model E: sparsity exponent");

  auto* scr = app.add_subcommand("screen", "rank predictors by a screening statistic");
  scr->configurable();
  scr->fallthrough();
  detail::ScreenOpts co;
  scr->add_option("--input", co.input, "dataset CSV")->required();
  scr->add_option("--response", co.response, "response column name");
  scr->add_option("--method", co.method, "screening statistic")
      ->check(CLI::IsMember({"cis", "sis", "holp"}));
  scr->add_option("--delta", co.delta, "correlation threshold (0 = default rule)");
  scr->add_option("--delta-c", co.delta_c, "multiplier in the default threshold rule");
  scr->add_option("--cap", co.cap, "largest allowed block (0 = max(2, n/2))");
  scr->add_option("--top-k", co.top_k, "select the k top-ranked predictors");
  scr->add_option("--nu", co.nu, "select predictors with statistic strictly above nu");

  auto* ici = app.add_subcommand("icis", "resampled iterative screening with FDR calibration");
  ici->configurable();
  ici->fallthrough();
  detail::IcisOpts io;
  ici->add_option("--input", io.input, "dataset CSV")->required();
  ici->add_option("--response", io.response, "response column name");
  ici->add_option("--B", io.B, "resample count");
  ici->add_option("--max-iter", io.max_iter, "screening rounds per pass");
  ici->add_option("--screen-k", io.screen_k, "screened set size (0 = ceil(n/log n))");
  ici->add_option("--delta", io.delta, "correlation threshold (0 = default rule)");
  ici->add_option("--delta-c", io.delta_c, "multiplier in the default threshold rule");
  ici->add_option("--cap", io.cap, "largest allowed block (0 = max(2, n/2))");
  ici->add_option("--psi", io.psi, "fixed frequency threshold (0 = calibrate)");
  ici->add_option("--q", io.q, "target false discovery rate");
  ici->add_option("--n-perm", io.n_perm, "response permutations for calibration");
  ici->add_option("--b-null", io.b_null, "resamples per permutation (0 = max(10, B/5))");
  ici->add_flag("--freeze-partition", io.freeze_partition,
                "reuse the full-data partition across resamples");

  auto* ben = app.add_subcommand("bench", "run a simulation experiment and report metrics");
  ben->configurable();
  ben->fallthrough();
  detail::BenchOpts bo;
  ben->add_option("--preset", bo.preset, "named experiment configuration");
  ben->add_option("--model", bo.model, "generator family")
      ->check(CLI::IsMember({"A", "B", "C", "D", "E"}));
  ben->add_option("--n", bo.n, "sample size");
  ben->add_option("--p", bo.p, "predictor count");
  ben->add_option("--m", bo.m, "block count");
  ben->add_option("--rho", bo.rho, "AR(1) coefficient");
  ben->add_option("--beta-mag", bo.beta_mag, "signal magnitude (model D)");
  ben->add_option("--sigma", bo.sigma, "noise standard deviation");
  ben->add_option("--kappa", bo.kappa, "model E: n = ceil(p^kappa)");
  ben->add_option("--pi", bo.pi, "model E: share of multi-signal blocks");
  ben->add_option("--theta", bo.theta, "model E: sparsity exponent");
  ben->add_option("--reps", bo.reps, "replicate count");
  ben->add_option("--methods", bo.methods, "comma-separated method list");
  ben->add_option("--B", bo.B, "resample count for ICIS/ISIS");
  ben->add_option("--max-iter", bo.max_iter, "screening rounds per pass");
  ben->add_option("--screen-k", bo.screen_k, "screened set size (0 = ceil(n/log n))");
  ben->add_flag("--freeze-partition", bo.freeze_partition,
                "reuse the full-data partition across resamples");
  ben->add_option("--delta", bo.delta, "correlation threshold (0 = default rule)");
  ben->add_option("--delta-c", bo.delta_c, "multiplier in the default threshold rule");
  ben->add_option("--cap", bo.cap, "largest allowed block (0 = max(2, n/2))");
  ben->add_option("--psi", bo.psi, "fixed frequency threshold for ICIS/ISIS");
  ben->add_flag("--calibrate-psi", bo.calibrate_psi,
                "calibrate the frequency threshold by permutation");
  ben->add_option("--q", bo.q, "target false discovery rate");
  ben->add_option("--n-perm", bo.n_perm, "response permutations for calibration");
  ben->add_flag("--record-timings", bo.record_timings, "write wall times into records.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return detail::run_simulate(g, so, sim);
    if (scr->parsed()) return detail::run_screen(g, co, scr);
    if (ici->parsed()) return detail::run_icis(g, io);
    return detail::run_bench(g, bo, ben);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cis::cli
