#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsd/dataset.hpp"
#include "nsd/io.hpp"
#include "nsd/maxmargin.hpp"
#include "nsd/metrics.hpp"
#include "nsd/optim.hpp"

namespace nsd::harness {

/// Probe steps: every step up to dense_until, then geometric growth, always
/// ending at max_steps.
struct ProbeSchedule {
  std::size_t dense_until = 100;
  double growth = 1.3;

  std::vector<std::size_t> build(std::size_t max_steps) const;
};

struct OptimizerSpec {
  std::string name;
  optim::NsdConfig cfg;
};

/// Named presets: ngd (frobenius), signgd (entrywise_max), spectral_gd
/// (spectral), nucgd (nuclear, analytic), nucgd_power (nuclear, power).
OptimizerSpec make_optimizer(std::string_view name);
std::vector<OptimizerSpec> default_optimizers();

enum class SweepAxis { batch_size, mu };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::batch_size;
  std::vector<double> values;
};

struct ExperimentConfig {
  data::GenConfig gen{};
  maxmargin::SolveConfig solve{};
  std::vector<OptimizerSpec> optimizers;  // empty means default_optimizers()
  ProbeSchedule probes{};
  /// Unset selects per-run defaults: 20000 full-batch, 50000 mini-batch.
  std::optional<std::size_t> max_steps;
  std::filesystem::path output_dir = "nsd_out";
  std::optional<SweepSpec> sweep;
};

/// One optimizer run: per-probe metric rows plus the final spectrum.
struct RunRecord {
  std::string name;
  std::string run_id;
  optim::NsdConfig cfg;
  std::vector<metrics::MetricsReport> probes;
  std::vector<double> final_spectrum;
  double wall_seconds = 0.0;  // lives only in the manifest, not the CSVs
  std::string status = "ok";
};

/// Dataset and per-norm references, loaded from the output directory when
/// present there and computed (then persisted) otherwise. Aborts with
/// SolverStallError/SeparabilityInconclusiveError when the data cannot be
/// certified separable.
struct Workspace {
  data::Dataset ds;
  std::map<la::NormKind, maxmargin::ReferenceSolution> refs;
};

Workspace prepare_workspace(const ExperimentConfig& cfg);

/// Runs one optimizer against a prepared workspace (no I/O).
RunRecord record_run(const Workspace& ws, const OptimizerSpec& spec,
                     const ExperimentConfig& cfg);

/// Dataset + separability + references + one run per optimizer, all
/// persisted under cfg.output_dir. A failing run is recorded in its status
/// without aborting siblings.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

/// Clones every optimizer across cfg.sweep values and emits
/// sweep_summary.csv (one row per cell) and sweep_trends.csv (per-optimizer
/// spread and slope of the final own-norm metrics).
std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg);

/// Report bundle under <out_dir>/report: per-run metrics CSVs, reference
/// spectra and cross-correlations, final-spectra comparison, and SVG line
/// charts of the margin-error and correlation traces.
void emit_report(const std::vector<RunRecord>& records,
                 const std::filesystem::path& out_dir);

std::string run_id(const ExperimentConfig& cfg, const OptimizerSpec& spec);

/// Frozen CSV schema:
/// step,loss,accuracy,corr_frobenius,corr_linf,corr_spectral,corr_nuclear,
/// err_frobenius,err_linf,err_spectral,err_nuclear,power_alignment,
/// gap_ratio,e_t,delta_t,restarts
std::string metrics_csv_header();
std::string metrics_to_csv(const std::vector<metrics::MetricsReport>& rows);
std::vector<metrics::MetricsReport> metrics_from_csv(const std::string& csv);

void save_run(const std::filesystem::path& run_dir, const RunRecord& rec);
RunRecord load_run(const std::filesystem::path& run_dir);

/// Builds a config from dotted key=value pairs (unknown keys rejected).
/// The optional NSD_OUTPUT_ROOT environment variable prefixes relative
/// output directories.
ExperimentConfig config_from_kv(const io::KvMap& kv);

/// The canonical key=value echo of a config (also the run_id hash input).
io::KvMap config_to_kv(const ExperimentConfig& cfg);

}  // namespace nsd::harness
