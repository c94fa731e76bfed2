#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ddrj/dataset.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("DDRJ_CLI_PATH");
  REQUIRE(p != nullptr);
  return p;
}

//! Run the CLI and return its exit code; stdout/stderr go to a scratch file.
int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ddrj_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

void write_small_config(const fs::path& path) {
  std::ofstream out(path);
  out << "# quick run for the CLI tests\n";
  out << "iterations = 800\n";
  out << "burn_in = 200\n";
  out << "thin = 4\n";
  out << "seed = 1\n";
}

void write_small_scenario(const fs::path& path) {
  std::ofstream out(path);
  out << "name=cli-small\n";
  out << "n=120\ng=4\nm=2\n";
  out << "beta0=0.2\n";
  out << "roi_effects=1:2.0\n";
  out << "snp_alpha=1:1.5\n";
  out << "snp_delta=1:-1.5\n";
  out << "seed=5\n";
}

}  // namespace

TEST_CASE("simulate writes dataset, truth, config, and manifest") {
  const fs::path dir = fresh_dir("simulate");
  REQUIRE(run_cli("simulate --scenario joint-210 --out " + dir.string()) == 0);
  for (const char* f : {"data.csv", "truth.csv", "scenario.config", "manifest.json"})
    REQUIRE(fs::exists(dir / f));

  const ddrj::Dataset data = ddrj::load_dataset_csv((dir / "data.csv").string());
  REQUIRE(data.n() == 210);
  REQUIRE(data.g() == 116);
  REQUIRE(data.m() == 81);

  const json manifest = read_manifest(dir);
  REQUIRE(manifest["command"] == "simulate");
  REQUIRE(manifest["scenario"] == "joint-210");
  const double cases = manifest["case_fraction"].get<double>();
  REQUIRE(cases > 0.0);
  REQUIRE(cases < 1.0);
  fs::remove_all(dir);
}

TEST_CASE("simulate honours a seed override") {
  const fs::path d1 = fresh_dir("sim_seed1");
  const fs::path d2 = fresh_dir("sim_seed2");
  write_small_scenario(d1 / "sc.config");
  REQUIRE(run_cli("simulate --config " + (d1 / "sc.config").string() + " --out " +
                  d1.string()) == 0);
  REQUIRE(run_cli("simulate --config " + (d1 / "sc.config").string() +
                  " --seed 99 --out " + d2.string()) == 0);
  const ddrj::Dataset a = ddrj::load_dataset_csv((d1 / "data.csv").string());
  const ddrj::Dataset b = ddrj::load_dataset_csv((d2 / "data.csv").string());
  REQUIRE(a.y != b.y);
  REQUIRE(read_manifest(d2)["seed"] == 99);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("simulate fails cleanly without a scenario or with an unknown one") {
  const fs::path dir = fresh_dir("sim_bad");
  REQUIRE(run_cli("simulate --out " + dir.string()) == 1);
  REQUIRE(run_cli("simulate --scenario no-such --out " + dir.string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("fit, predict, and crossval cooperate on a small study") {
  const fs::path dir = fresh_dir("pipeline");
  write_small_scenario(dir / "sc.config");
  write_small_config(dir / "run.config");
  REQUIRE(run_cli("simulate --config " + (dir / "sc.config").string() + " --out " +
                  dir.string()) == 0);

  const fs::path fit_dir = dir / "fit";
  REQUIRE(run_cli("fit --data " + (dir / "data.csv").string() + " --config " +
                  (dir / "run.config").string() + " --out " + fit_dir.string()) == 0);
  for (const char* f :
       {"trace.csv", "summary.csv", "models.csv", "logpost_chain1.csv", "manifest.json"})
    REQUIRE(fs::exists(fit_dir / f));
  REQUIRE(first_line(fit_dir / "trace.csv") ==
          "chain,iteration,log_post,rois,snps,coefs");
  REQUIRE(first_line(fit_dir / "summary.csv") == "label,class,mppi,post_mean,post_sd");
  REQUIRE(first_line(fit_dir / "models.csv") == "rois,snps,probability,visits");

  const json fit_manifest = read_manifest(fit_dir);
  REQUIRE(fit_manifest["command"] == "fit");
  REQUIRE(fit_manifest["mode"] == "ddrj");
  REQUIRE(fit_manifest["chain_diagnostics"].size() == 1);

  const fs::path pred_dir = dir / "pred";
  REQUIRE(run_cli("predict --fit " + fit_dir.string() + " --newdata " +
                  (dir / "data.csv").string() + " --out " + pred_dir.string()) == 0);
  REQUIRE(fs::exists(pred_dir / "predictions.csv"));
  REQUIRE(first_line(pred_dir / "predictions.csv") == "row,ystar,probability,class");
  {
    std::ifstream in(pred_dir / "predictions.csv");
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    REQUIRE(rows == 120);
  }

  const fs::path cv_dir = dir / "cv";
  REQUIRE(run_cli("crossval --data " + (dir / "data.csv").string() + " --config " +
                  (dir / "run.config").string() + " --k 3 --jobs 3 --out " +
                  cv_dir.string()) == 0);
  REQUIRE(fs::exists(cv_dir / "metrics.csv"));
  REQUIRE(fs::exists(cv_dir / "predictions.csv"));
  REQUIRE(first_line(cv_dir / "metrics.csv") == "fold,mce,auc");
  const json cv_manifest = read_manifest(cv_dir);
  REQUIRE(cv_manifest["k"] == 3);
  REQUIRE(cv_manifest["mce_mean"].get<double>() >= 0.0);
  REQUIRE(cv_manifest["auc_mean"].get<double>() <= 1.0);
  fs::remove_all(dir);
}

TEST_CASE("fit runs the uniform baseline when asked") {
  const fs::path dir = fresh_dir("rj_mode");
  write_small_scenario(dir / "sc.config");
  write_small_config(dir / "run.config");
  REQUIRE(run_cli("simulate --config " + (dir / "sc.config").string() + " --out " +
                  dir.string()) == 0);
  const fs::path fit_dir = dir / "fit";
  REQUIRE(run_cli("fit --data " + (dir / "data.csv").string() + " --config " +
                  (dir / "run.config").string() + " --mode rj --out " +
                  fit_dir.string()) == 0);
  REQUIRE(read_manifest(fit_dir)["mode"] == "rj");
  REQUIRE(run_cli("fit --data " + (dir / "data.csv").string() + " --mode bogus --out " +
                  fit_dir.string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("configuration and data errors map to distinct exit codes") {
  const fs::path dir = fresh_dir("errors");
  write_small_scenario(dir / "sc.config");
  REQUIRE(run_cli("simulate --config " + (dir / "sc.config").string() + " --out " +
                  dir.string()) == 0);

  // unknown config key -> configuration error (1)
  {
    std::ofstream out(dir / "bad.config");
    out << "iterations=500\nburn_in=100\nthin=2\nturbo=yes\n";
  }
  REQUIRE(run_cli("fit --data " + (dir / "data.csv").string() + " --config " +
                  (dir / "bad.config").string() + " --out " + dir.string()) == 1);

  // missing dataset -> data error (2)
  REQUIRE(run_cli("fit --data " + (dir / "missing.csv").string() + " --out " +
                  dir.string()) == 2);

  // malformed dataset -> data error (2)
  {
    std::ofstream out(dir / "mangled.csv");
    out << "y,roi_1\n1,apple\n0,2.0\n";
  }
  REQUIRE(run_cli("fit --data " + (dir / "mangled.csv").string() + " --out " +
                  dir.string()) == 2);

  // column without a roi_/snp_ prefix -> data error (2)
  {
    std::ofstream out(dir / "prefix.csv");
    out << "y,age\n1,50\n0,60\n";
  }
  REQUIRE(run_cli("fit --data " + (dir / "prefix.csv").string() + " --out " +
                  dir.string()) == 2);

  // predict against a fit directory without a trace -> data error (2)
  REQUIRE(run_cli("predict --fit " + (dir / "nofit").string() + " --newdata " +
                  (dir / "data.csv").string() + " --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("predicting onto a dataset that lacks fitted columns is a schema error") {
  const fs::path dir = fresh_dir("schema");
  write_small_scenario(dir / "sc.config");
  write_small_config(dir / "run.config");
  REQUIRE(run_cli("simulate --config " + (dir / "sc.config").string() + " --out " +
                  dir.string()) == 0);
  const fs::path fit_dir = dir / "fit";
  REQUIRE(run_cli("fit --data " + (dir / "data.csv").string() + " --config " +
                  (dir / "run.config").string() + " --out " + fit_dir.string()) == 0);

  // strip every covariate the fit could have used
  {
    std::ofstream out(dir / "narrow.csv");
    out << "y,roi_99\n1,0.5\n0,-0.5\n";
  }
  REQUIRE(run_cli("predict --fit " + fit_dir.string() + " --newdata " +
                  (dir / "narrow.csv").string() + " --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with status 1") {
  REQUIRE(run_cli("") == 1);                    // missing subcommand
  REQUIRE(run_cli("fit") == 1);                 // missing required --data
  REQUIRE(run_cli("frobnicate --data x") == 1);  // unknown subcommand
}
