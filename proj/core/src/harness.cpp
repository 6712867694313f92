#include "nsd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "nsd/errors.hpp"
#include "nsd/model.hpp"
#include "nsd/svd.hpp"

namespace nsd::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFullBatchDefaultSteps = 20000;
constexpr std::size_t kMiniBatchDefaultSteps = 50000;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

std::optional<double> parse_opt_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return io::parse_double(s);
}

io::KvMap optimizer_kv(const OptimizerSpec& spec) {
  io::KvMap kv;
  kv["name"] = spec.name;
  kv["norm"] = std::string(la::to_string(spec.cfg.norm));
  kv["gamma0"] = io::format_double(spec.cfg.gamma0);
  kv["mu"] = io::format_double(spec.cfg.mu);
  kv["batch_size"] = std::to_string(spec.cfg.batch_size);
  kv["max_steps"] = std::to_string(spec.cfg.max_steps);
  kv["nucgd_mode"] = std::string(optim::to_string(spec.cfg.nucgd_mode));
  kv["restart_tau"] = io::format_double(spec.cfg.restart_tau);
  kv["seed"] = std::to_string(spec.cfg.seed);
  return kv;
}

fs::path refs_dir(const ExperimentConfig& cfg) {
  return cfg.output_dir / "refs";
}

/// Applies the full/mini-batch step-count policy and resolves batch_size 0.
OptimizerSpec resolve_spec(OptimizerSpec spec, const ExperimentConfig& cfg,
                           std::size_t n) {
  if (spec.cfg.batch_size == 0 || spec.cfg.batch_size == n) {
    spec.cfg.batch_size = n;
    spec.cfg.max_steps = cfg.max_steps.value_or(kFullBatchDefaultSteps);
  } else {
    spec.cfg.max_steps = cfg.max_steps.value_or(kMiniBatchDefaultSteps);
  }
  return spec;
}

}  // namespace

std::vector<std::size_t> ProbeSchedule::build(std::size_t max_steps) const {
  if (growth <= 1.0) throw std::invalid_argument("probe growth must exceed 1");
  std::set<std::size_t> steps;
  for (std::size_t t = 1; t <= std::min(dense_until, max_steps); ++t) {
    steps.insert(t);
  }
  double x = static_cast<double>(std::max<std::size_t>(dense_until, 1));
  while (true) {
    x *= growth;
    const std::size_t t = static_cast<std::size_t>(std::llround(x));
    if (t > max_steps) break;
    steps.insert(t);
  }
  if (max_steps >= 1) steps.insert(max_steps);
  return {steps.begin(), steps.end()};
}

OptimizerSpec make_optimizer(std::string_view name) {
  OptimizerSpec spec;
  spec.name = std::string(name);
  if (name == "ngd") {
    spec.cfg.norm = la::NormKind::frobenius;
  } else if (name == "signgd") {
    spec.cfg.norm = la::NormKind::entrywise_max;
  } else if (name == "spectral_gd") {
    spec.cfg.norm = la::NormKind::spectral;
  } else if (name == "nucgd") {
    spec.cfg.norm = la::NormKind::nuclear;
    spec.cfg.nucgd_mode = optim::NucgdMode::analytic;
  } else if (name == "nucgd_power") {
    spec.cfg.norm = la::NormKind::nuclear;
    spec.cfg.nucgd_mode = optim::NucgdMode::power;
  } else {
    throw std::invalid_argument("unknown optimizer: " + std::string(name));
  }
  return spec;
}

std::vector<OptimizerSpec> default_optimizers() {
  return {make_optimizer("ngd"), make_optimizer("signgd"),
          make_optimizer("spectral_gd"), make_optimizer("nucgd")};
}

std::string_view to_string(SweepAxis axis) {
  return axis == SweepAxis::batch_size ? "batch_size" : "mu";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "batch_size") return SweepAxis::batch_size;
  if (name == "mu") return SweepAxis::mu;
  throw std::invalid_argument("unknown sweep axis: " + std::string(name));
}

io::KvMap config_to_kv(const ExperimentConfig& cfg) {
  io::KvMap kv;
  kv["gen.k"] = std::to_string(cfg.gen.k);
  kv["gen.d"] = std::to_string(cfg.gen.d);
  kv["gen.n_per_class"] = std::to_string(cfg.gen.n_per_class);
  kv["gen.sigma"] = io::format_double(cfg.gen.sigma);
  kv["gen.seed"] = std::to_string(cfg.gen.seed);
  kv["solve.max_iters"] = std::to_string(cfg.solve.max_iters);
  kv["solve.eta0"] = io::format_double(cfg.solve.eta0);
  kv["solve.patience"] = std::to_string(cfg.solve.patience);
  kv["solve.tol"] = io::format_double(cfg.solve.tol);
  kv["solve.seed"] = std::to_string(cfg.solve.seed);
  kv["probe.dense_until"] = std::to_string(cfg.probes.dense_until);
  kv["probe.growth"] = io::format_double(cfg.probes.growth);
  if (cfg.max_steps) kv["run.max_steps"] = std::to_string(*cfg.max_steps);
  std::string names;
  const auto& optimizers =
      cfg.optimizers.empty() ? default_optimizers() : cfg.optimizers;
  for (const auto& spec : optimizers) {
    if (!names.empty()) names += ',';
    names += spec.name;
  }
  kv["run.optimizers"] = names;
  if (cfg.sweep) {
    kv["sweep.axis"] = std::string(to_string(cfg.sweep->axis));
    std::string values;
    for (double v : cfg.sweep->values) {
      if (!values.empty()) values += ',';
      values += io::format_double(v);
    }
    kv["sweep.values"] = values;
  }
  return kv;
}

std::string run_id(const ExperimentConfig& cfg, const OptimizerSpec& spec) {
  io::KvMap kv = config_to_kv(cfg);
  kv.erase("run.optimizers");  // identity comes from this run's own config
  kv.erase("sweep.axis");
  kv.erase("sweep.values");
  for (const auto& [k, v] : optimizer_kv(spec)) kv["optimizer." + k] = v;
  return hex64(fnv1a(io::render_kv(kv)));
}

Workspace prepare_workspace(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  Workspace ws;

  const fs::path ds_path = cfg.output_dir / "dataset.csv";
  bool reuse_dataset = false;
  if (fs::exists(ds_path) && fs::exists(ds_path.string() + ".manifest")) {
    const data::Dataset loaded = data::load_dataset(ds_path);
    reuse_dataset = loaded.config.k == cfg.gen.k &&
                    loaded.config.d == cfg.gen.d &&
                    loaded.config.n_per_class == cfg.gen.n_per_class &&
                    loaded.config.sigma == cfg.gen.sigma &&
                    loaded.config.seed == cfg.gen.seed;
    if (reuse_dataset) ws.ds = loaded;
  }
  if (!reuse_dataset) {
    ws.ds = data::generate(cfg.gen);
    data::save_dataset(ds_path, ws.ds);
  }

  // Separability certificate, cached alongside the dataset.
  const fs::path sep_path = cfg.output_dir / "separability.manifest";
  bool certified = false;
  if (reuse_dataset && fs::exists(sep_path)) {
    const io::KvMap kv = io::load_kv_file(sep_path);
    certified = kv.at("separable") == "true";
    if (!certified) {
      throw SolverStallError("dataset recorded as not separable");
    }
  } else {
    const data::SeparabilityReport report = data::check_separability(ws.ds);
    io::KvMap kv;
    kv["separable"] = report.separable ? "true" : "false";
    kv["witness_margin"] = io::format_double(report.witness_margin);
    io::save_kv_file(sep_path, kv);
    if (!report.separable) {
      throw SolverStallError("dataset is not linearly separable (margin " +
                             io::format_double(report.witness_margin) + ")");
    }
  }

  fs::create_directories(refs_dir(cfg));
  bool solved_any = false;
  std::map<la::NormKind, maxmargin::ReferenceSolution> missing;
  for (la::NormKind kind : la::kAllNormKinds) {
    const fs::path base = refs_dir(cfg) / std::string(la::to_string(kind));
    if (reuse_dataset && fs::exists(base.string() + ".csv") &&
        fs::exists(base.string() + ".manifest")) {
      ws.refs.emplace(kind, maxmargin::load_reference(base));
    }
  }
  if (ws.refs.size() < la::kAllNormKinds.size()) {
    maxmargin::SolveConfig solve = cfg.solve;
    solve.expect_positive = true;
    ws.refs = maxmargin::solve_all_references(ws.ds, solve);
    for (const auto& [kind, ref] : ws.refs) {
      const fs::path base = refs_dir(cfg) / std::string(la::to_string(kind));
      maxmargin::save_reference(base, ref, cfg.solve.seed);
    }
    solved_any = true;
  }
  if (solved_any || !fs::exists(refs_dir(cfg) / "spectra.csv")) {
    std::string csv = "kind";
    const std::size_t r = std::min<std::size_t>(ws.ds.k, ws.ds.dim());
    for (std::size_t i = 1; i <= r; ++i) csv += ",sigma_" + std::to_string(i);
    csv += '\n';
    for (const auto& [kind, ref] : ws.refs) {
      csv += std::string(la::to_string(kind));
      for (double s : la::svd(ref.w_star).singular_values) {
        csv += ',';
        csv += io::format_double(s);
      }
      csv += '\n';
    }
    io::write_file_atomic(refs_dir(cfg) / "spectra.csv", csv);
  }
  return ws;
}

RunRecord record_run(const Workspace& ws, const OptimizerSpec& raw_spec,
                     const ExperimentConfig& cfg) {
  const OptimizerSpec spec = resolve_spec(raw_spec, cfg, ws.ds.n());
  RunRecord rec;
  rec.name = spec.name;
  rec.cfg = spec.cfg;
  rec.run_id = run_id(cfg, spec);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::size_t> probes =
      cfg.probes.build(spec.cfg.max_steps);
  const std::vector<optim::OptState> traj = optim::run(ws.ds, spec.cfg, probes);

  const bool power_mode = spec.cfg.norm == la::NormKind::nuclear &&
                          spec.cfg.nucgd_mode == optim::NucgdMode::power;
  const model::BatchIndex full = model::full_batch(ws.ds.n());
  const la::Matrix* prev_momentum = nullptr;
  for (const optim::OptState& st : traj) {
    metrics::MetricsReport row;
    row.step = st.t;
    row.loss = model::ce_loss(st.w, ws.ds, full);
    row.accuracy = model::accuracy(st.w, ws.ds);
    row.restarts = st.restarts;
    const bool w_nonzero =
        la::matrix_norm(st.w, la::NormKind::frobenius) > 0.0;
    if (w_nonzero) {
      for (const auto& [kind, ref] : ws.refs) {
        row.correlations[kind] = metrics::correlation(st.w, ref);
        row.margin_errors[kind] = metrics::margin_error(st.w, ref, ws.ds);
      }
      const metrics::SpectrumResult sp = metrics::spectrum(st.w);
      row.spectrum = sp.singular_values;
      row.effective_rank = sp.effective_rank;
    }
    if (power_mode && st.t > 0 &&
        la::matrix_norm(st.momentum, la::NormKind::frobenius) > 0.0) {
      const metrics::PowerDiag diag =
          metrics::power_diagnostics(st.p, st.momentum, prev_momentum);
      const la::SvdResult sv = la::svd(st.momentum);
      std::vector<double> u1(st.momentum.rows());
      for (std::size_t i = 0; i < u1.size(); ++i) u1[i] = sv.left_vectors(i, 0);
      row.power_alignment = std::abs(la::dot(st.p, u1));
      row.gap_ratio = diag.gap_ratio;
      row.e_t = diag.e_t;
      row.delta_t = diag.delta_t;
    }
    rec.probes.push_back(std::move(row));
    prev_momentum = &st.momentum;
  }
  if (!traj.empty() && !rec.probes.empty()) {
    rec.final_spectrum = rec.probes.back().spectrum;
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rec;
}

std::string metrics_csv_header() {
  return "step,loss,accuracy,corr_frobenius,corr_linf,corr_spectral,"
         "corr_nuclear,err_frobenius,err_linf,err_spectral,err_nuclear,"
         "power_alignment,gap_ratio,e_t,delta_t,restarts";
}

std::string metrics_to_csv(const std::vector<metrics::MetricsReport>& rows) {
  std::string csv = metrics_csv_header();
  csv += '\n';
  for (const auto& row : rows) {
    csv += std::to_string(row.step);
    csv += ',' + io::format_double(row.loss);
    csv += ',' + io::format_double(row.accuracy);
    for (const auto* map : {&row.correlations, &row.margin_errors}) {
      for (la::NormKind kind : la::kAllNormKinds) {
        const auto it = map->find(kind);
        csv += ',';
        if (it != map->end()) csv += io::format_double(it->second);
      }
    }
    csv += ',' + opt_cell(row.power_alignment);
    csv += ',' + opt_cell(row.gap_ratio);
    csv += ',' + opt_cell(row.e_t);
    csv += ',' + opt_cell(row.delta_t);
    csv += ',' + std::to_string(row.restarts);
    csv += '\n';
  }
  return csv;
}

std::vector<metrics::MetricsReport> metrics_from_csv(const std::string& csv) {
  const std::vector<std::string> lines = io::split(csv, '\n');
  if (lines.empty() || io::trim(lines.front()) != metrics_csv_header()) {
    throw std::invalid_argument("unexpected metrics CSV header");
  }
  std::vector<metrics::MetricsReport> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string line = io::trim(lines[li]);
    if (line.empty()) continue;
    const std::vector<std::string> cells = io::split(line, ',');
    if (cells.size() != 16) throw std::invalid_argument("bad metrics row");
    metrics::MetricsReport row;
    row.step = std::stoull(cells[0]);
    row.loss = io::parse_double(cells[1]);
    row.accuracy = io::parse_double(cells[2]);
    for (std::size_t i = 0; i < 4; ++i) {
      if (!cells[3 + i].empty()) {
        row.correlations[la::kAllNormKinds[i]] = io::parse_double(cells[3 + i]);
      }
      if (!cells[7 + i].empty()) {
        row.margin_errors[la::kAllNormKinds[i]] =
            io::parse_double(cells[7 + i]);
      }
    }
    row.power_alignment = parse_opt_cell(cells[11]);
    row.gap_ratio = parse_opt_cell(cells[12]);
    row.e_t = parse_opt_cell(cells[13]);
    row.delta_t = parse_opt_cell(cells[14]);
    row.restarts = std::stoull(cells[15]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_run(const std::filesystem::path& run_dir, const RunRecord& rec) {
  fs::create_directories(run_dir);
  io::write_file_atomic(run_dir / "metrics.csv", metrics_to_csv(rec.probes));
  if (!rec.final_spectrum.empty()) {
    std::string csv;
    for (std::size_t i = 0; i < rec.final_spectrum.size(); ++i) {
      if (i) csv += ',';
      csv += io::format_double(rec.final_spectrum[i]);
    }
    csv += '\n';
    io::write_file_atomic(run_dir / "final_spectrum.csv", csv);
  }
  io::KvMap kv = optimizer_kv({rec.name, rec.cfg});
  kv["run_id"] = rec.run_id;
  kv["status"] = rec.status;
  kv["wall_seconds"] = io::format_double(rec.wall_seconds);
  io::save_kv_file(run_dir / "manifest.txt", kv);
}

RunRecord load_run(const std::filesystem::path& run_dir) {
  RunRecord rec;
  const io::KvMap kv = io::load_kv_file(run_dir / "manifest.txt");
  rec.name = kv.at("name");
  rec.run_id = kv.at("run_id");
  rec.status = kv.at("status");
  rec.wall_seconds = io::parse_double(kv.at("wall_seconds"));
  rec.cfg.norm = la::parse_norm_kind(kv.at("norm"));
  rec.cfg.gamma0 = io::parse_double(kv.at("gamma0"));
  rec.cfg.mu = io::parse_double(kv.at("mu"));
  rec.cfg.batch_size = std::stoull(kv.at("batch_size"));
  rec.cfg.max_steps = std::stoull(kv.at("max_steps"));
  rec.cfg.nucgd_mode = optim::parse_nucgd_mode(kv.at("nucgd_mode"));
  rec.cfg.restart_tau = io::parse_double(kv.at("restart_tau"));
  rec.cfg.seed = std::stoull(kv.at("seed"));
  if (fs::exists(run_dir / "metrics.csv")) {
    rec.probes = metrics_from_csv(io::read_file(run_dir / "metrics.csv"));
  }
  if (fs::exists(run_dir / "final_spectrum.csv")) {
    const std::string content = io::read_file(run_dir / "final_spectrum.csv");
    for (const std::string& cell : io::split(io::trim(content), ',')) {
      rec.final_spectrum.push_back(io::parse_double(cell));
    }
  }
  return rec;
}

namespace {

std::vector<RunRecord> run_specs(const ExperimentConfig& cfg,
                                 const Workspace& ws,
                                 const std::vector<OptimizerSpec>& specs) {
  std::vector<RunRecord> records;
  for (const OptimizerSpec& spec : specs) {
    RunRecord rec;
    try {
      rec = record_run(ws, spec, cfg);
    } catch (const std::exception& e) {
      rec.name = spec.name;
      rec.cfg = spec.cfg;
      rec.run_id = run_id(cfg, spec);
      rec.status = std::string("failed: ") + e.what();
    }
    save_run(cfg.output_dir / "runs" / rec.name, rec);
    records.push_back(std::move(rec));
  }
  return records;
}

double final_metric(const RunRecord& rec,
                    const std::map<la::NormKind, double>& (*sel)(
                        const metrics::MetricsReport&),
                    la::NormKind kind) {
  if (rec.probes.empty()) return std::nan("");
  const auto& map = sel(rec.probes.back());
  const auto it = map.find(kind);
  return it == map.end() ? std::nan("") : it->second;
}

const std::map<la::NormKind, double>& select_corr(
    const metrics::MetricsReport& r) {
  return r.correlations;
}

const std::map<la::NormKind, double>& select_err(
    const metrics::MetricsReport& r) {
  return r.margin_errors;
}

double ls_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  const double denom = sxx - sx * sx / n;
  return denom == 0.0 ? 0.0 : (sxy - sx * sy / n) / denom;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  const Workspace ws = prepare_workspace(cfg);
  const auto specs =
      cfg.optimizers.empty() ? default_optimizers() : cfg.optimizers;
  return run_specs(cfg, ws, specs);
}

std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw std::invalid_argument("run_sweep requires cfg.sweep");
  if (cfg.sweep->values.empty()) {
    throw std::invalid_argument("sweep values must be nonempty");
  }
  const Workspace ws = prepare_workspace(cfg);
  const auto base_specs =
      cfg.optimizers.empty() ? default_optimizers() : cfg.optimizers;

  std::vector<OptimizerSpec> specs;
  for (const OptimizerSpec& base : base_specs) {
    for (double value : cfg.sweep->values) {
      OptimizerSpec spec = base;
      if (cfg.sweep->axis == SweepAxis::batch_size) {
        const auto b = static_cast<std::size_t>(std::llround(value));
        if (b == 0 || b > ws.ds.n()) {
          throw std::invalid_argument("sweep batch size out of range");
        }
        spec.cfg.batch_size = b;
        spec.name = base.name + "-B" + std::to_string(b);
      } else {
        if (value < 0.0 || value >= 1.0) {
          throw std::invalid_argument("sweep mu out of range");
        }
        spec.cfg.mu = value;
        spec.name = base.name + "-mu" + io::format_double(value);
      }
      specs.push_back(std::move(spec));
    }
  }

  std::vector<RunRecord> records = run_specs(cfg, ws, specs);

  // Per-cell summary of final metrics (the data behind the sweep figures).
  std::string summary =
      "optimizer,axis,value,final_step,final_loss,final_accuracy,"
      "corr_frobenius,corr_linf,corr_spectral,corr_nuclear,"
      "err_frobenius,err_linf,err_spectral,err_nuclear\n";
  std::size_t idx = 0;
  for (const OptimizerSpec& base : base_specs) {
    for (double value : cfg.sweep->values) {
      const RunRecord& rec = records[idx++];
      summary += base.name;
      summary += ',' + std::string(to_string(cfg.sweep->axis));
      summary += ',' + io::format_double(value);
      if (!rec.probes.empty()) {
        const auto& last = rec.probes.back();
        summary += ',' + std::to_string(last.step);
        summary += ',' + io::format_double(last.loss);
        summary += ',' + io::format_double(last.accuracy);
        for (const auto* map : {&last.correlations, &last.margin_errors}) {
          for (la::NormKind kind : la::kAllNormKinds) {
            const auto it = map->find(kind);
            summary += ',';
            if (it != map->end()) summary += io::format_double(it->second);
          }
        }
      } else {
        summary += ",,,,,,,,,,,";
      }
      summary += '\n';
    }
  }
  io::write_file_atomic(cfg.output_dir / "sweep_summary.csv", summary);

  // Per-optimizer spread and trend of the final own-norm metrics.
  std::string trends =
      "optimizer,corr_own_spread,err_own_spread,corr_own_slope,"
      "err_own_slope\n";
  idx = 0;
  for (const OptimizerSpec& base : base_specs) {
    std::vector<double> corrs, errs;
    for (std::size_t vi = 0; vi < cfg.sweep->values.size(); ++vi) {
      const RunRecord& rec = records[idx++];
      const double c = final_metric(rec, select_corr, base.cfg.norm);
      const double e = final_metric(rec, select_err, base.cfg.norm);
      if (!std::isnan(c)) corrs.push_back(c);
      if (!std::isnan(e)) errs.push_back(e);
    }
    trends += base.name;
    if (!corrs.empty()) {
      const auto [cmin, cmax] = std::minmax_element(corrs.begin(), corrs.end());
      trends += ',' + io::format_double(*cmax - *cmin);
    } else {
      trends += ',';
    }
    if (!errs.empty()) {
      const auto [emin, emax] = std::minmax_element(errs.begin(), errs.end());
      trends += ',' + io::format_double(*emax - *emin);
    } else {
      trends += ',';
    }
    trends += ',' + (corrs.size() > 1 ? io::format_double(ls_slope(corrs))
                                      : std::string());
    trends += ',' + (errs.size() > 1 ? io::format_double(ls_slope(errs))
                                     : std::string());
    trends += '\n';
  }
  io::write_file_atomic(cfg.output_dir / "sweep_trends.csv", trends);
  return records;
}

}  // namespace nsd::harness
