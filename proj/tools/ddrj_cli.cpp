//! Command-line front end: scenario simulation, chain fitting, prediction,
//! and cross-validation over the CSV/config formats documented in README.md.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ddrj/ddrj.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

//! Write the manifest through a temp file and rename so readers never see a
//! partial file.
void write_manifest_atomic(const fs::path& dir, const json& manifest) {
  const fs::path tmp = dir / "manifest.json.tmp";
  const fs::path final_path = dir / "manifest.json";
  {
    std::ofstream out(tmp);
    if (!out) throw ddrj::IoError("cannot write " + tmp.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw ddrj::IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

json chain_digest(const std::vector<ddrj::ChainTrace>& traces) {
  json chains = json::array();
  for (const auto& t : traces) {
    json c;
    c["final_log_post"] = t.log_post_trace.empty() ? 0.0 : t.log_post_trace.back();
    c["accept_roi_birth"] = t.acceptance_rate(ddrj::Space::Roi, ddrj::MoveKind::Birth);
    c["accept_roi_death"] = t.acceptance_rate(ddrj::Space::Roi, ddrj::MoveKind::Death);
    c["accept_snp_birth"] = t.acceptance_rate(ddrj::Space::Snp, ddrj::MoveKind::Birth);
    c["accept_snp_death"] = t.acceptance_rate(ddrj::Space::Snp, ddrj::MoveKind::Death);
    chains.push_back(c);
  }
  return chains;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::size_t jobs = 1;
};

void apply_overrides(const CommonOpts& opts, ddrj::RunConfig& config) {
  if (opts.seed) config.seed = *opts.seed;
  if (opts.mode) {
    if (*opts.mode == "ddrj")
      config.mode = ddrj::ProposalMode::DataDriven;
    else if (*opts.mode == "rj")
      config.mode = ddrj::ProposalMode::Uniform;
    else
      throw ddrj::ConfigError("--mode must be ddrj or rj");
  }
}

void write_logpost_csv(const fs::path& path, const ddrj::Vector& trace) {
  std::ofstream out(path);
  if (!out) throw ddrj::IoError("cannot write " + path.string());
  out << "iteration,log_post\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << (i + 1) << ',' << ddrj::fmt_full(trace[i]) << '\n';
  if (!out) throw ddrj::IoError("failed writing " + path.string());
}

int cmd_simulate(const CommonOpts& opts, const std::string& scenario_name) {
  const auto t0 = std::chrono::steady_clock::now();
  ddrj::Scenario sc;
  if (!scenario_name.empty())
    sc = ddrj::find_scenario(scenario_name);
  else if (!opts.config_path.empty())
    sc = ddrj::load_scenario_config(opts.config_path);
  else
    throw ddrj::ConfigError("simulate: need --scenario or --config");
  if (opts.seed) sc.seed = *opts.seed;

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  const ddrj::Dataset data = ddrj::simulate_dataset(sc);
  ddrj::write_dataset_csv((dir / "data.csv").string(), data);
  ddrj::write_truth_csv((dir / "truth.csv").string(), sc);
  ddrj::write_scenario_config((dir / "scenario.config").string(), sc);

  json manifest;
  manifest["command"] = "simulate";
  manifest["scenario"] = sc.name;
  manifest["config"] = opts.config_path;
  manifest["seed"] = sc.seed;
  manifest["outputs"] = {(dir / "data.csv").string(), (dir / "truth.csv").string(),
                         (dir / "scenario.config").string()};
  manifest["case_fraction"] =
      static_cast<double>(std::count(data.y.begin(), data.y.end(), 1)) /
      static_cast<double>(data.n());
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest_atomic(dir, manifest);
  return 0;
}

int cmd_fit(const CommonOpts& opts, const std::string& data_path) {
  const auto t0 = std::chrono::steady_clock::now();
  ddrj::RunConfig config;
  ddrj::Hyperparams hyper;
  if (!opts.config_path.empty()) ddrj::load_run_config(opts.config_path, config, hyper);
  apply_overrides(opts, config);

  ddrj::Dataset data = ddrj::load_dataset_csv(data_path);
  ddrj::standardize(data);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);

  const ddrj::Dataset* fit_data = &data;
  ddrj::Dataset reduced;
  std::vector<std::size_t> roi_keep, snp_keep;
  if (config.preselect_threshold) {
    reduced = ddrj::pre_select(data, hyper, config, roi_keep, snp_keep);
    fit_data = &reduced;
  }

  const auto traces = ddrj::run_chains(*fit_data, hyper, config, opts.jobs);
  std::vector<ddrj::RetainedSample> merged;
  for (const auto& t : traces)
    merged.insert(merged.end(), t.samples.begin(), t.samples.end());

  ddrj::write_trace_csv((dir / "trace.csv").string(), traces, *fit_data);
  const ddrj::PosteriorSummary summary = ddrj::summarize(merged, *fit_data);
  ddrj::write_summary_csv((dir / "summary.csv").string(), summary, *fit_data);
  ddrj::write_models_csv((dir / "models.csv").string(), summary,
                         config.preselect_threshold ? &roi_keep : nullptr,
                         config.preselect_threshold ? &snp_keep : nullptr);
  for (std::size_t c = 0; c < traces.size(); ++c)
    write_logpost_csv(dir / ("logpost_chain" + std::to_string(c + 1) + ".csv"),
                      traces[c].log_post_trace);

  json manifest;
  manifest["command"] = "fit";
  manifest["data"] = data_path;
  manifest["config"] = opts.config_path;
  manifest["seed"] = config.seed;
  manifest["mode"] = config.mode == ddrj::ProposalMode::DataDriven ? "ddrj" : "rj";
  manifest["chains"] = config.chains;
  json outputs = {(dir / "trace.csv").string(), (dir / "summary.csv").string(),
                  (dir / "models.csv").string()};
  for (std::size_t c = 0; c < traces.size(); ++c)
    outputs.push_back((dir / ("logpost_chain" + std::to_string(c + 1) + ".csv")).string());
  manifest["outputs"] = outputs;
  if (config.preselect_threshold) {
    json kept = json::array();
    for (const auto& nm : fit_data->roi_names) kept.push_back(nm);
    for (const auto& nm : fit_data->snp_names) kept.push_back(nm);
    manifest["preselected_columns"] = kept;
  }
  manifest["chain_diagnostics"] = chain_digest(traces);
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest_atomic(dir, manifest);
  return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& fit_dir,
                const std::string& newdata_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path trace_path = fs::path(fit_dir) / "trace.csv";
  const ddrj::BmaPredictor pred = ddrj::bma_from_trace_csv(trace_path.string());
  const ddrj::Dataset newdata = ddrj::load_dataset_csv(newdata_path);
  std::vector<ddrj::PredictionRow> rows;
  try {
    rows = ddrj::bma_predict(pred, newdata);
  } catch (const ddrj::UnknownColumn& e) {
    throw ddrj::SchemaMismatch(e.what());
  }

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  ddrj::write_predictions_csv((dir / "predictions.csv").string(), rows);

  json manifest;
  manifest["command"] = "predict";
  manifest["trace"] = trace_path.string();
  manifest["newdata"] = newdata_path;
  manifest["outputs"] = {(dir / "predictions.csv").string()};
  manifest["models_averaged"] = pred.models.size();
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest_atomic(dir, manifest);
  return 0;
}

int cmd_crossval(const CommonOpts& opts, const std::string& data_path, std::size_t k) {
  const auto t0 = std::chrono::steady_clock::now();
  ddrj::RunConfig config;
  ddrj::Hyperparams hyper;
  if (!opts.config_path.empty()) ddrj::load_run_config(opts.config_path, config, hyper);
  apply_overrides(opts, config);

  const ddrj::Dataset data = ddrj::load_dataset_csv(data_path);
  const ddrj::PredictionReport report =
      ddrj::cross_validate(data, hyper, config, k, opts.jobs);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  ddrj::write_metrics_csv((dir / "metrics.csv").string(), report);
  std::vector<ddrj::PredictionRow> rows(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    rows[i].ystar = report.ystar[i];
    rows[i].prob = report.prob[i];
    rows[i].cls = report.cls[i];
  }
  ddrj::write_predictions_csv((dir / "predictions.csv").string(), rows);

  json manifest;
  manifest["command"] = "crossval";
  manifest["data"] = data_path;
  manifest["config"] = opts.config_path;
  manifest["seed"] = config.seed;
  manifest["k"] = k;
  manifest["outputs"] = {(dir / "metrics.csv").string(),
                         (dir / "predictions.csv").string()};
  manifest["mce_mean"] = report.mce_mean;
  manifest["auc_mean"] = report.auc_mean;
  manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest_atomic(dir, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reversible-jump variable selection for probit models"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string scenario_name, data_path, newdata_path, fit_dir;
  std::size_t k = 5;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key=value configuration file");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the configured seed");
    sub->add_option("--jobs", opts.jobs, "worker thread bound")->check(CLI::PositiveNumber);
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--scenario", scenario_name, "built-in scenario name");
  add_common(sim);

  CLI::App* fit = app.add_subcommand("fit", "run the sampler on a dataset");
  fit->add_option("--data", data_path, "dataset CSV")->required();
  fit->add_option("--mode", opts.mode, "proposal mode: ddrj or rj");
  add_common(fit);

  CLI::App* pre = app.add_subcommand("predict", "model-averaged prediction");
  pre->add_option("--fit", fit_dir, "directory holding trace.csv")->required();
  pre->add_option("--newdata", newdata_path, "dataset CSV to score")->required();
  add_common(pre);

  CLI::App* cv = app.add_subcommand("crossval", "k-fold cross-validation");
  cv->add_option("--data", data_path, "dataset CSV")->required();
  cv->add_option("--k", k, "number of folds")->check(CLI::PositiveNumber);
  cv->add_option("--mode", opts.mode, "proposal mode: ddrj or rj");
  add_common(cv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opts, scenario_name);
    if (fit->parsed()) return cmd_fit(opts, data_path);
    if (pre->parsed()) return cmd_predict(opts, fit_dir, newdata_path);
    if (cv->parsed()) return cmd_crossval(opts, data_path, k);
  } catch (const ddrj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ddrj::UnknownScenario& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ddrj::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddrj::SchemaMismatch& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddrj::UnknownColumn& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddrj::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddrj::EmptyTrace& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddrj::Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
