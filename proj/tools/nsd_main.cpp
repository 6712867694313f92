// Command-line front end: dataset generation, reference solving, optimizer
// runs, sweeps and report emission. All options funnel into the same dotted
// key=value store the --config file uses; explicit flags override file
// values.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "nsd/dataset.hpp"
#include "nsd/harness.hpp"
#include "nsd/io.hpp"
#include "nsd/maxmargin.hpp"

namespace {

namespace fs = std::filesystem;
using nsd::io::KvMap;

struct KvCollector {
  std::string config_file;
  KvMap flags;

  KvMap merged() const {
    KvMap kv;
    if (!config_file.empty()) {
      kv = nsd::io::load_kv_file(config_file);
    }
    for (const auto& [k, v] : flags) kv[k] = v;  // flags win
    return kv;
  }
};

// Registers a flag that writes through to the dotted config key.
void add_kv_option(CLI::App* cmd, KvCollector& kv, const std::string& flag,
                   const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&kv, key](const std::string& v) { kv.flags[key] = v; }, help);
}

void add_common_options(CLI::App* cmd, KvCollector& kv) {
  cmd->add_option("--config", kv.config_file,
                  "key=value config file (dotted keys, e.g. gen.k=15)");
  add_kv_option(cmd, kv, "--out", "out.dir", "output directory");
  add_kv_option(cmd, kv, "--k", "gen.k", "number of classes");
  add_kv_option(cmd, kv, "--d", "gen.d", "feature dimension");
  add_kv_option(cmd, kv, "--n-per-class", "gen.n_per_class",
                "points per class");
  add_kv_option(cmd, kv, "--sigma", "gen.sigma", "noise standard deviation");
  add_kv_option(cmd, kv, "--data-seed", "gen.seed", "dataset seed");
}

void add_solve_options(CLI::App* cmd, KvCollector& kv) {
  add_kv_option(cmd, kv, "--max-iters", "solve.max_iters",
                "reference solver iteration budget");
  add_kv_option(cmd, kv, "--eta0", "solve.eta0", "reference solver base step");
  add_kv_option(cmd, kv, "--patience", "solve.patience",
                "reference solver stall window");
  add_kv_option(cmd, kv, "--solve-tol", "solve.tol",
                "reference solver improvement tolerance");
  add_kv_option(cmd, kv, "--solve-seed", "solve.seed",
                "reference solver init seed");
}

void add_run_options(CLI::App* cmd, KvCollector& kv) {
  add_kv_option(cmd, kv, "--optimizers", "run.optimizers",
                "comma list: ngd,signgd,spectral_gd,nucgd,nucgd_power");
  add_kv_option(cmd, kv, "--gamma0", "run.gamma0", "base step size");
  add_kv_option(cmd, kv, "--mu", "run.mu", "momentum weight in [0,1)");
  add_kv_option(cmd, kv, "--batch-size", "run.batch_size",
                "mini-batch size (0 = full batch)");
  add_kv_option(cmd, kv, "--max-steps", "run.max_steps",
                "training steps (0 = 20000 full / 50000 mini)");
  add_kv_option(cmd, kv, "--norm", "run.norm",
                "override norm: frobenius|entrywise_max|spectral|nuclear");
  add_kv_option(cmd, kv, "--mode", "run.mode",
                "nuclear update mode: analytic|power");
  add_kv_option(cmd, kv, "--restart-tau", "run.restart_tau",
                "power-iteration restart threshold");
  add_kv_option(cmd, kv, "--run-seed", "run.seed", "optimizer RNG seed");
  add_kv_option(cmd, kv, "--probe-dense-until", "probe.dense_until",
                "probe every step up to here");
  add_kv_option(cmd, kv, "--probe-growth", "probe.growth",
                "geometric probe growth factor");
}

int cmd_generate(const KvMap& kv) {
  const auto cfg = nsd::harness::config_from_kv(kv);
  const nsd::data::Dataset ds = nsd::data::generate(cfg.gen);
  fs::create_directories(cfg.output_dir);
  nsd::data::save_dataset(cfg.output_dir / "dataset.csv", ds);
  std::cout << "wrote " << (cfg.output_dir / "dataset.csv").string() << " ("
            << ds.n() << " points, " << ds.k << " classes)\n";
  return 0;
}

int cmd_solve_refs(const KvMap& kv) {
  const auto cfg = nsd::harness::config_from_kv(kv);
  const nsd::harness::Workspace ws = nsd::harness::prepare_workspace(cfg);
  for (const auto& [kind, ref] : ws.refs) {
    std::cout << nsd::la::to_string(kind) << ": margin "
              << nsd::io::format_double(ref.margin_value) << " ("
              << ref.iterations << " iterations)\n";
  }
  return 0;
}

int cmd_train(const KvMap& kv, const std::string& optimizer) {
  KvMap merged = kv;
  if (!optimizer.empty()) merged["run.optimizers"] = optimizer;
  auto cfg = nsd::harness::config_from_kv(merged);
  const auto records = nsd::harness::run_experiment(cfg);
  bool ok = true;
  for (const auto& rec : records) {
    std::cout << rec.name << " [" << rec.run_id << "] " << rec.status;
    if (rec.status == "ok" && !rec.probes.empty()) {
      const auto& last = rec.probes.back();
      std::cout << " steps=" << last.step
                << " loss=" << nsd::io::format_double(last.loss)
                << " accuracy=" << nsd::io::format_double(last.accuracy);
    }
    std::cout << '\n';
    ok = ok && rec.status == "ok";
  }
  return ok ? 0 : 1;
}

int cmd_sweep(const KvMap& kv) {
  const auto cfg = nsd::harness::config_from_kv(kv);
  const auto records = nsd::harness::run_sweep(cfg);
  bool ok = true;
  for (const auto& rec : records) {
    std::cout << rec.name << " [" << rec.run_id << "] " << rec.status << '\n';
    ok = ok && rec.status == "ok";
  }
  std::cout << "summary: " << (cfg.output_dir / "sweep_summary.csv").string()
            << '\n';
  return ok ? 0 : 1;
}

int cmd_report(const KvMap& kv) {
  const auto cfg = nsd::harness::config_from_kv(kv);
  const fs::path runs_dir = cfg.output_dir / "runs";
  if (!fs::exists(runs_dir)) {
    throw std::runtime_error("no runs directory under " +
                             cfg.output_dir.string());
  }
  std::vector<nsd::harness::RunRecord> records;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) {
    records.push_back(nsd::harness::load_run(dir));
  }
  nsd::harness::emit_report(records, cfg.output_dir);
  std::cout << "report written under "
            << (cfg.output_dir / "report").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normalized steepest descent experiments"};
  app.require_subcommand(1);

  KvCollector kv;
  std::string optimizer;

  CLI::App* generate = app.add_subcommand("generate", "generate the dataset");
  add_common_options(generate, kv);

  CLI::App* solve = app.add_subcommand(
      "solve-refs", "solve the four max-margin reference solutions");
  add_common_options(solve, kv);
  add_solve_options(solve, kv);

  CLI::App* train =
      app.add_subcommand("train", "run one optimizer (or a comma list)");
  add_common_options(train, kv);
  add_solve_options(train, kv);
  add_run_options(train, kv);
  train->add_option("--optimizer", optimizer,
                    "optimizer name (default nucgd)");

  CLI::App* sweep =
      app.add_subcommand("sweep", "run a batch-size or momentum sweep");
  add_common_options(sweep, kv);
  add_solve_options(sweep, kv);
  add_run_options(sweep, kv);
  add_kv_option(sweep, kv, "--axis", "sweep.axis", "batch_size or mu");
  add_kv_option(sweep, kv, "--values", "sweep.values",
                "comma list of sweep values");

  CLI::App* report = app.add_subcommand(
      "report", "emit the report bundle from persisted runs");
  add_common_options(report, kv);

  CLI11_PARSE(app, argc, argv);

  try {
    const KvMap merged = kv.merged();
    if (generate->parsed()) return cmd_generate(merged);
    if (solve->parsed()) return cmd_solve_refs(merged);
    if (train->parsed()) {
      return cmd_train(merged, optimizer.empty() ? "nucgd" : optimizer);
    }
    if (sweep->parsed()) return cmd_sweep(merged);
    if (report->parsed()) return cmd_report(merged);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
