// SPDX-License-Identifier: Apache-2.0
//
// fedgmr — asynchronous model-heterogeneous federated learning simulator.
//
// Subcommands:
//   run          one experiment, metrics to CSV
//   sweep        grid over seeds / gmr / aggregator axes
//   feasibility  fixed-density slope study
//   ablate       preset comparison runs (gmr/buffer/ims/aggregators)
//   prune-eval   post-hoc density sweep of a trained checkpoint
//   analyze      mri | slope | prune over recorded CSVs/checkpoints

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedgmr/common.hpp"
#include "fedgmr/diagnostics.hpp"
#include "fedgmr/simulator.hpp"

using json = nlohmann::json;
using namespace fedgmr;

namespace {

Heterogeneity parse_heterogeneity(const std::string& s) {
  if (s == "high") return Heterogeneity::High;
  if (s == "medium") return Heterogeneity::Medium;
  if (s == "low") return Heterogeneity::Low;
  throw ConfigError("unknown heterogeneity preset: " + s);
}

Aggregator parse_aggregator(const std::string& s) {
  if (s == "MA" || s == "ma") return Aggregator::MA;
  if (s == "GA" || s == "ga") return Aggregator::GA;
  if (s == "FA" || s == "fa") return Aggregator::FA;
  throw ConfigError("unknown aggregator: " + s);
}

SimConfig config_from_json(const json& j) {
  SimConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  std::size_t n_clients = cfg.n_clients;
  get("n_clients", n_clients);
  cfg.n_clients = n_clients;
  if (j.contains("heterogeneity")) {
    cfg.heterogeneity = parse_heterogeneity(j.at("heterogeneity").get<std::string>());
  }
  get("delta_t", cfg.delta_t);
  get("total_time", cfg.total_time);
  get("alpha", cfg.alpha);
  if (j.contains("aggregator")) {
    cfg.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
  }
  get("force_sync", cfg.force_sync);
  get("gmr", cfg.gmr);
  get("ims", cfg.ims);
  get("buffer", cfg.buffer);
  get("max_staleness", cfg.max_staleness);
  get("seed", cfg.seed);
  if (j.contains("local")) {
    const json& l = j.at("local");
    if (l.contains("steps")) cfg.local.steps = l.at("steps").get<std::size_t>();
    if (l.contains("lr")) cfg.local.lr = l.at("lr").get<double>();
    if (l.contains("batch_size")) cfg.local.batch_size = l.at("batch_size").get<std::size_t>();
    if (l.contains("with_replacement")) {
      cfg.local.with_replacement = l.at("with_replacement").get<bool>();
    }
  }
  get("ladder", cfg.ladder);
  get("rho_min", cfg.rho_min);
  get("lambda", cfg.lambda);
  get("rho_init", cfg.rho_init);
  get("stage1_max_rounds", cfg.stage1_max_rounds);
  get("eps_stab", cfg.eps_stab);
  get("w_stab", cfg.w_stab);
  get("patience", cfg.patience);
  get("eval_interval", cfg.eval_interval);
  get("tol", cfg.tol);
  if (j.contains("esm_metric")) {
    const std::string m = j.at("esm_metric").get<std::string>();
    if (m == "subnet") {
      cfg.esm_metric = EsmMetric::SubnetValAcc;
    } else if (m == "global") {
      cfg.esm_metric = EsmMetric::GlobalValAcc;
    } else {
      throw ConfigError("unknown esm_metric: " + m);
    }
  }
  get("mask_refresh_interval", cfg.mask_refresh_interval);
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.contains("kind")) {
      const std::string k = m.at("kind").get<std::string>();
      if (k == "logistic") {
        cfg.model_kind = ModelKind::Logistic;
      } else if (k == "mlp") {
        cfg.model_kind = ModelKind::Mlp;
      } else {
        throw ConfigError("unknown model kind: " + k);
      }
    }
    if (m.contains("hidden_dims")) {
      cfg.hidden_dims = m.at("hidden_dims").get<std::vector<std::size_t>>();
    }
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("n_samples")) cfg.data.n_samples = d.at("n_samples").get<std::size_t>();
    if (d.contains("dim")) cfg.data.dim = d.at("dim").get<std::size_t>();
    if (d.contains("n_classes")) cfg.data.n_classes = d.at("n_classes").get<int>();
    if (d.contains("separation")) cfg.data.separation = d.at("separation").get<double>();
    if (d.contains("noise_sigma")) cfg.data.noise_sigma = d.at("noise_sigma").get<double>();
  }
  get("csv_path", cfg.csv_path);
  get("idx_images", cfg.idx_images);
  get("idx_labels", cfg.idx_labels);
  if (j.contains("partition")) {
    const std::string p = j.at("partition").get<std::string>();
    if (p == "iid") {
      cfg.partition_scheme = PartitionScheme::Iid;
    } else if (p == "dirichlet") {
      cfg.partition_scheme = PartitionScheme::Dirichlet;
    } else {
      throw ConfigError("unknown partition scheme: " + p);
    }
  }
  get("dirichlet_alpha", cfg.dirichlet_alpha);
  get("val_fraction", cfg.val_fraction);
  get("compute_c0", cfg.compute_c0);
  get("compute_c1", cfg.compute_c1);
  get("jitter", cfg.jitter);
  get("jitter_rate", cfg.jitter_rate);
  get("model_bytes", cfg.model_bytes);
  get("server_upload_MBps", cfg.server_upload_MBps);
  get("ims_value_delta", cfg.ims_value_delta);
  if (j.contains("bandwidth")) {
    cfg.use_custom_bandwidth = true;
    for (const json& c : j.at("bandwidth")) {
      ClientLink link;
      link.down_MBps = c.at("down_MBps").get<double>();
      link.up_MBps = c.at("up_MBps").get<double>();
      if (c.contains("preset_density")) {
        link.preset_density = c.at("preset_density").get<double>();
      }
      cfg.bandwidth.clients.push_back(link);
    }
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  if (path.empty()) return SimConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  in >> j;
  return config_from_json(j);
}

struct CommonOverrides {
  std::string config_path;
  long seed = -1;
  double total_time = -1.0;
  std::string aggregator;
  std::string heterogeneity;
  int gmr = -1;
  int ims = -1;
  int buffer = -1;
  int jitter = -1;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--seed", seed, "random seed override");
    app->add_option("--total-time", total_time, "virtual horizon override (s)");
    app->add_option("--aggregator", aggregator, "MA | GA | FA");
    app->add_option("--heterogeneity", heterogeneity, "high | medium | low");
    app->add_option("--gmr", gmr, "0/1 density restoration");
    app->add_option("--ims", ims, "0/1 incremental transmission");
    app->add_option("--buffer", buffer, "0/1 server buffer");
    app->add_option("--jitter", jitter, "0/1 bandwidth jitter");
  }

  SimConfig resolve() const {
    SimConfig cfg = load_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (total_time >= 0.0) cfg.total_time = total_time;
    if (!aggregator.empty()) cfg.aggregator = parse_aggregator(aggregator);
    if (!heterogeneity.empty()) cfg.heterogeneity = parse_heterogeneity(heterogeneity);
    if (gmr >= 0) cfg.gmr = gmr != 0;
    if (ims >= 0) cfg.ims = ims != 0;
    if (buffer >= 0) cfg.buffer = buffer != 0;
    if (jitter >= 0) cfg.jitter = jitter != 0;
    return cfg;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << content;
}

void save_result_checkpoint(const SimResult& res, const std::string& path) {
  Checkpoint ckpt;
  ckpt.spec = res.spec;
  ckpt.model = res.final_model;
  ckpt.scores = res.final_scores;
  save_checkpoint(path, ckpt);
}

int cmd_run(const CommonOverrides& common, const std::string& out_path,
            const std::string& ckpt_path) {
  const SimConfig cfg = common.resolve();
  const SimResult res = run_simulation(cfg);
  if (out_path.empty()) {
    std::cout << res.log.to_csv();
  } else {
    write_file(out_path, res.log.to_csv());
    std::cout << "wrote " << res.log.rows.size() << " rows to " << out_path << "\n";
  }
  if (!ckpt_path.empty()) {
    save_result_checkpoint(res, ckpt_path);
    std::cout << "wrote checkpoint to " << ckpt_path << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOverrides& common, const std::vector<long>& seeds,
              const std::vector<std::string>& gmr_axis,
              const std::vector<std::string>& agg_axis, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const SimConfig base = common.resolve();
  std::vector<bool> gmrs;
  for (const std::string& g : gmr_axis) gmrs.push_back(g == "on" || g == "1" || g == "true");
  if (gmrs.empty()) gmrs.push_back(base.gmr);
  std::vector<Aggregator> aggs;
  for (const std::string& a : agg_axis) aggs.push_back(parse_aggregator(a));
  if (aggs.empty()) aggs.push_back(base.aggregator);
  const std::vector<long> seed_list =
      seeds.empty() ? std::vector<long>{static_cast<long>(base.seed)} : seeds;

  for (bool g : gmrs) {
    for (Aggregator a : aggs) {
      for (long s : seed_list) {
        SimConfig cfg = base;
        cfg.gmr = g;
        cfg.aggregator = a;
        cfg.seed = static_cast<std::uint64_t>(s);
        const SimResult res = run_simulation(cfg);
        std::ostringstream name;
        name << outdir << "/run_" << aggregator_name(a) << "_gmr" << (g ? 1 : 0) << "_seed" << s
             << ".csv";
        write_file(name.str(), res.log.to_csv());
        std::cout << name.str() << ": rows=" << res.log.rows.size() << " final_acc="
                  << (res.log.rows.empty() ? 0.0 : res.log.rows.back().global_val_acc) << "\n";
      }
    }
  }
  return 0;
}

// Trains standalone fixed-density models and reports accuracy-time slopes,
// one run per (density, seed).
int cmd_feasibility(const CommonOverrides& common, const std::vector<double>& densities,
                    const std::vector<long>& seeds, double early_lo, double early_hi,
                    double late_lo, double late_hi, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const SimConfig base = common.resolve();
  std::cout << "density,seed,early_slope,early_reached,late_slope,late_reached\n";
  for (double rho : densities) {
    for (long s : seeds) {
      SimConfig cfg = base;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.n_clients = 1;
      cfg.gmr = false;
      cfg.use_custom_bandwidth = true;
      cfg.bandwidth.clients = {{1.0, 0.25, rho}};  // a bandwidth-constrained link
      const SimResult res = run_simulation(cfg);
      std::ostringstream name;
      name << outdir << "/feas_rho" << rho << "_seed" << s << ".csv";
      write_file(name.str(), res.log.to_csv());
      const AccuracyTrace tr = trace_from_metrics(res.log);
      const SlopeResult early = growth_slope(tr, early_lo, early_hi);
      const SlopeResult late = growth_slope(tr, late_lo, late_hi);
      std::cout << rho << "," << s << "," << early.slope << "," << early.reached << ","
                << late.slope << "," << late.reached << "\n";
    }
  }
  return 0;
}

int cmd_ablate(const CommonOverrides& common, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const SimConfig base = common.resolve();
  struct Variant {
    const char* name;
    void (*apply)(SimConfig&);
  };
  const std::vector<Variant> variants{
      {"full", [](SimConfig&) {}},
      {"no_gmr", [](SimConfig& c) { c.gmr = false; }},
      {"no_buffer", [](SimConfig& c) { c.buffer = false; }},
      {"no_ims", [](SimConfig& c) { c.ims = false; }},
      {"sync", [](SimConfig& c) { c.force_sync = true; }},
      {"ga", [](SimConfig& c) { c.aggregator = Aggregator::GA; }},
      {"fa", [](SimConfig& c) { c.aggregator = Aggregator::FA; }},
  };
  std::cout << "variant,final_val_acc,final_train_loss,bytes_down\n";
  for (const Variant& v : variants) {
    SimConfig cfg = base;
    v.apply(cfg);
    const SimResult res = run_simulation(cfg);
    std::ostringstream name;
    name << outdir << "/ablate_" << v.name << ".csv";
    write_file(name.str(), res.log.to_csv());
    if (!res.log.rows.empty()) {
      const MetricsRow& last = res.log.rows.back();
      std::cout << v.name << "," << last.global_val_acc << "," << last.global_train_loss << ","
                << last.bytes_down_cum << "\n";
    }
  }
  return 0;
}

DataShard eval_data_for(const CommonOverrides& common, const std::string& csv_path) {
  if (!csv_path.empty()) return read_csv(csv_path);
  const SimConfig cfg = common.resolve();
  Rng rng(Rng::derive(cfg.seed, {rng_tag::kData}));
  DataShard full = make_gaussian_mixture(cfg.data.n_samples, cfg.data.dim, cfg.data.n_classes,
                                         cfg.data.separation, cfg.data.noise_sigma, rng);
  Rng srng(Rng::derive(cfg.seed, {rng_tag::kValSplit}));
  return split_train_val(full, cfg.val_fraction, srng).val;
}

int cmd_prune_eval(const CommonOverrides& common, const std::string& ckpt_path,
                   const std::vector<double>& densities, const std::string& csv_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const DataShard val = eval_data_for(common, csv_path);
  std::cout << "density,accuracy\n";
  for (const auto& [rho, acc] : prune_eval(ckpt.model, ckpt.spec, ckpt.scores, densities, val)) {
    std::cout << rho << "," << acc << "\n";
  }
  return 0;
}

int cmd_analyze_mri(const std::vector<std::string>& runs, const std::vector<std::string>& baselines,
                    double t_star, int window) {
  auto smoothed = [&](const std::string& path) {
    const AccuracyTrace tr = trace_from_csv_file(path);
    const double t = t_star > 0.0 ? t_star : tr.t.back();
    return smoothed_acc(tr, t, window).mean;
  };
  double method_sum = 0.0;
  for (const std::string& r : runs) method_sum += smoothed(r);
  const double method_acc = method_sum / static_cast<double>(runs.size());
  std::vector<double> base_accs;
  for (const std::string& b : baselines) base_accs.push_back(smoothed(b));
  std::cout << "method_acc," << method_acc << "\n";
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    std::cout << "baseline_acc," << baselines[i] << "," << base_accs[i] << "\n";
  }
  std::cout << "mri," << mri(method_acc, base_accs) << "\n";
  return 0;
}

int cmd_analyze_slope(const std::string& run, double lo, double hi) {
  const AccuracyTrace tr = trace_from_csv_file(run);
  const SlopeResult s = growth_slope(tr, lo, hi);
  if (s.reached) {
    std::cout << "slope," << s.slope << "\n";
  } else {
    std::cout << "slope,unreached\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedgmr: asynchronous model-heterogeneous FL simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment");
  CommonOverrides run_common;
  run_common.attach(run);
  std::string run_out, run_ckpt;
  run->add_option("--out", run_out, "metrics CSV path (stdout if omitted)");
  run->add_option("--save-checkpoint", run_ckpt, "binary checkpoint path");

  auto* sweep = app.add_subcommand("sweep", "grid over config axes");
  CommonOverrides sweep_common;
  sweep_common.attach(sweep);
  std::vector<long> sweep_seeds;
  std::vector<std::string> sweep_gmr, sweep_agg;
  std::string sweep_outdir = "sweep_out";
  sweep->add_option("--seeds", sweep_seeds, "seed axis")->delimiter(',');
  sweep->add_option("--gmr-axis", sweep_gmr, "on,off")->delimiter(',');
  sweep->add_option("--aggregator-axis", sweep_agg, "MA,GA,FA")->delimiter(',');
  sweep->add_option("--outdir", sweep_outdir, "output directory");

  auto* feas = app.add_subcommand("feasibility", "fixed-density slope study");
  CommonOverrides feas_common;
  feas_common.attach(feas);
  std::vector<double> feas_densities{0.3, 1.0};
  std::vector<long> feas_seeds{1, 2, 3};
  double feas_early_lo = 0.3, feas_early_hi = 0.5, feas_late_lo = 0.6, feas_late_hi = 0.75;
  std::string feas_outdir = "feasibility_out";
  feas->add_option("--densities", feas_densities, "fixed densities")->delimiter(',');
  feas->add_option("--seeds", feas_seeds, "seeds")->delimiter(',');
  feas->add_option("--early-lo", feas_early_lo, "early interval lower accuracy");
  feas->add_option("--early-hi", feas_early_hi, "early interval upper accuracy");
  feas->add_option("--late-lo", feas_late_lo, "late interval lower accuracy");
  feas->add_option("--late-hi", feas_late_hi, "late interval upper accuracy");
  feas->add_option("--outdir", feas_outdir, "output directory");

  auto* ablate = app.add_subcommand("ablate", "preset component comparisons");
  CommonOverrides ablate_common;
  ablate_common.attach(ablate);
  std::string ablate_outdir = "ablate_out";
  ablate->add_option("--outdir", ablate_outdir, "output directory");

  auto* prune = app.add_subcommand("prune-eval", "density sweep of a checkpoint");
  CommonOverrides prune_common;
  prune_common.attach(prune);
  std::string prune_ckpt, prune_csv;
  std::vector<double> prune_densities{0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  prune->add_option("--checkpoint", prune_ckpt, "checkpoint path")->required();
  prune->add_option("--densities", prune_densities, "densities to evaluate")->delimiter(',');
  prune->add_option("--csv", prune_csv, "evaluation dataset (CSV with label column)");

  auto* analyze = app.add_subcommand("analyze", "post-run analysis");
  analyze->require_subcommand(1);
  auto* a_mri = analyze->add_subcommand("mri", "mean relative improvement");
  std::vector<std::string> mri_runs, mri_baselines;
  double mri_tstar = -1.0;
  int mri_window = 11;
  a_mri->add_option("--run", mri_runs, "method metrics CSVs")->required();
  a_mri->add_option("--baseline", mri_baselines, "baseline metrics CSVs")->required();
  a_mri->add_option("--t-star", mri_tstar, "evaluation budget (default: trace end)");
  a_mri->add_option("--window", mri_window, "smoothing window (evaluations)");

  auto* a_slope = analyze->add_subcommand("slope", "accuracy growth slope");
  std::string slope_run;
  double slope_lo = 0.0, slope_hi = 0.0;
  a_slope->add_option("--run", slope_run, "metrics CSV")->required();
  a_slope->add_option("--lo", slope_lo, "interval lower accuracy")->required();
  a_slope->add_option("--hi", slope_hi, "interval upper accuracy")->required();

  auto* a_prune = analyze->add_subcommand("prune", "density sweep of a checkpoint");
  CommonOverrides aprune_common;
  aprune_common.attach(a_prune);
  std::string aprune_ckpt, aprune_csv;
  std::vector<double> aprune_densities{0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  a_prune->add_option("--checkpoint", aprune_ckpt, "checkpoint path")->required();
  a_prune->add_option("--densities", aprune_densities, "densities")->delimiter(',');
  a_prune->add_option("--csv", aprune_csv, "evaluation dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_common, run_out, run_ckpt);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_common, sweep_seeds, sweep_gmr, sweep_agg, sweep_outdir);
    }
    if (feas->parsed()) {
      return cmd_feasibility(feas_common, feas_densities, feas_seeds, feas_early_lo, feas_early_hi,
                             feas_late_lo, feas_late_hi, feas_outdir);
    }
    if (ablate->parsed()) return cmd_ablate(ablate_common, ablate_outdir);
    if (prune->parsed()) {
      return cmd_prune_eval(prune_common, prune_ckpt, prune_densities, prune_csv);
    }
    if (analyze->parsed()) {
      if (a_mri->parsed()) return cmd_analyze_mri(mri_runs, mri_baselines, mri_tstar, mri_window);
      if (a_slope->parsed()) return cmd_analyze_slope(slope_run, slope_lo, slope_hi);
      if (a_prune->parsed()) {
        return cmd_prune_eval(aprune_common, aprune_ckpt, aprune_densities, aprune_csv);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
