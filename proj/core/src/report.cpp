#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "nsd/harness.hpp"
#include "nsd/svd.hpp"

namespace nsd::harness {

namespace fs = std::filesystem;

namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

constexpr const char* kSeriesColors[4] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                          "#d62728"};

std::string fmt_axis(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

/// Minimal line chart: log10 x axis, optionally log10 y, fixed canvas.
std::string render_svg(const std::string& title,
                       const std::vector<Series>& series, bool log_y) {
  constexpr double width = 640, height = 440;
  constexpr double ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Series& s : series) {
    for (auto [x, y] : s.points) {
      const double lx = std::log10(x);
      const double ly = log_y ? std::log10(std::max(y, 1e-15)) : y;
      xmin = std::min(xmin, lx);
      xmax = std::max(xmax, lx);
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;

  const auto px = [&](double lx) {
    return ml + (lx - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  const auto py = [&](double ly) {
    return height - mb - (ly - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
      "height=\"440\" viewBox=\"0 0 640 440\">\n"
      "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" +
         title + "</text>\n";
  // Axes.
  svg += "<line x1=\"" + fmt_axis(ml) + "\" y1=\"" + fmt_axis(height - mb) +
         "\" x2=\"" + fmt_axis(width - mr) + "\" y2=\"" +
         fmt_axis(height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt_axis(ml) + "\" y1=\"" + fmt_axis(mt) +
         "\" x2=\"" + fmt_axis(ml) + "\" y2=\"" + fmt_axis(height - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt_axis(ml) + "\" y=\"" + fmt_axis(height - mb + 20) +
         "\" font-family=\"sans-serif\" font-size=\"11\">10^" +
         fmt_axis(xmin) + "</text>\n";
  svg += "<text x=\"" + fmt_axis(width - mr - 40) + "\" y=\"" +
         fmt_axis(height - mb + 20) +
         "\" font-family=\"sans-serif\" font-size=\"11\">10^" +
         fmt_axis(xmax) + " step</text>\n";
  const std::string ylab = log_y ? "10^" : "";
  svg += "<text x=\"6\" y=\"" + fmt_axis(height - mb) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + ylab +
         fmt_axis(ymin) + "</text>\n";
  svg += "<text x=\"6\" y=\"" + fmt_axis(mt + 10) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + ylab +
         fmt_axis(ymax) + "</text>\n";

  double legend_y = mt + 6;
  for (const Series& s : series) {
    std::string path;
    for (auto [x, y] : s.points) {
      const double lx = std::log10(x);
      const double ly = log_y ? std::log10(std::max(y, 1e-15)) : y;
      path += path.empty() ? "M" : " L";
      path += fmt_axis(px(lx)) + " " + fmt_axis(py(ly));
    }
    svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt_axis(width - mr - 120) + "\" y=\"" +
           fmt_axis(legend_y) + "\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"" + s.color + "\">" + s.label +
           "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

std::string csv_label(la::NormKind kind) {
  return kind == la::NormKind::entrywise_max
             ? "linf"
             : std::string(la::to_string(kind));
}

}  // namespace

void emit_report(const std::vector<RunRecord>& records,
                 const std::filesystem::path& out_dir) {
  if (records.empty()) {
    throw std::invalid_argument("emit_report requires at least one run");
  }
  for (const RunRecord& rec : records) {
    if (rec.status == "ok" && rec.probes.empty()) {
      throw std::invalid_argument("run '" + rec.name + "' has no probe rows");
    }
  }
  const fs::path report_dir = out_dir / "report";
  fs::create_directories(report_dir);

  // (1) Per-run metrics CSVs.
  for (const RunRecord& rec : records) {
    io::write_file_atomic(report_dir / ("metrics_" + rec.name + ".csv"),
                          metrics_to_csv(rec.probes));
  }

  // (2)+(3) Reference spectra and cross-correlations, from the persisted
  // reference solutions.
  const fs::path refs = out_dir / "refs";
  std::map<la::NormKind, la::Matrix> ref_mats;
  for (la::NormKind kind : la::kAllNormKinds) {
    const fs::path csv = refs / (std::string(la::to_string(kind)) + ".csv");
    if (!fs::exists(csv)) {
      throw std::runtime_error("missing reference matrix: " + csv.string());
    }
    ref_mats.emplace(kind, io::load_matrix_csv(csv));
  }
  {
    std::string csv = "kind";
    for (la::NormKind kind : la::kAllNormKinds) {
      csv += ',' + std::string(la::to_string(kind));
    }
    csv += '\n';
    for (la::NormKind a : la::kAllNormKinds) {
      csv += std::string(la::to_string(a));
      const la::Matrix& ma = ref_mats.at(a);
      const double na = la::matrix_norm(ma, la::NormKind::frobenius);
      for (la::NormKind b : la::kAllNormKinds) {
        const la::Matrix& mb = ref_mats.at(b);
        const double nb = la::matrix_norm(mb, la::NormKind::frobenius);
        csv += ',' + io::format_double(la::dot(ma, mb) / (na * nb));
      }
      csv += '\n';
    }
    io::write_file_atomic(report_dir / "reference_correlations.csv", csv);
  }
  {
    std::string csv = "kind";
    const la::Matrix& first = ref_mats.begin()->second;
    const std::size_t r = std::min(first.rows(), first.cols());
    for (std::size_t i = 1; i <= r; ++i) csv += ",sigma_" + std::to_string(i);
    csv += '\n';
    for (la::NormKind kind : la::kAllNormKinds) {
      csv += std::string(la::to_string(kind));
      for (double s : la::svd(ref_mats.at(kind)).singular_values) {
        csv += ',';
        csv += io::format_double(s);
      }
      csv += '\n';
    }
    io::write_file_atomic(report_dir / "reference_spectra.csv", csv);
  }

  // (4) Final spectra across runs.
  {
    std::size_t max_len = 0;
    for (const RunRecord& rec : records) {
      max_len = std::max(max_len, rec.final_spectrum.size());
    }
    std::string csv = "optimizer";
    for (std::size_t i = 1; i <= max_len; ++i) {
      csv += ",sigma_" + std::to_string(i);
    }
    csv += '\n';
    for (const RunRecord& rec : records) {
      csv += rec.name;
      for (double s : rec.final_spectrum) {
        csv += ',';
        csv += io::format_double(s);
      }
      csv += '\n';
    }
    io::write_file_atomic(report_dir / "final_spectra.csv", csv);
  }

  // (5) SVG traces per run.
  for (const RunRecord& rec : records) {
    if (rec.probes.empty()) continue;
    std::vector<Series> err_series, corr_series;
    std::size_t ci = 0;
    for (la::NormKind kind : la::kAllNormKinds) {
      Series se{csv_label(kind), kSeriesColors[ci], {}};
      Series sc{csv_label(kind), kSeriesColors[ci], {}};
      ++ci;
      for (const auto& row : rec.probes) {
        if (row.step == 0) continue;
        const auto eit = row.margin_errors.find(kind);
        if (eit != row.margin_errors.end()) {
          se.points.push_back({static_cast<double>(row.step), eit->second});
        }
        const auto cit = row.correlations.find(kind);
        if (cit != row.correlations.end()) {
          sc.points.push_back({static_cast<double>(row.step), cit->second});
        }
      }
      err_series.push_back(std::move(se));
      corr_series.push_back(std::move(sc));
    }
    io::write_file_atomic(
        report_dir / ("margin_error_" + rec.name + ".svg"),
        render_svg("margin error: " + rec.name, err_series, true));
    io::write_file_atomic(
        report_dir / ("correlation_" + rec.name + ".svg"),
        render_svg("correlation: " + rec.name, corr_series, false));
  }
}

ExperimentConfig config_from_kv(const io::KvMap& kv) {
  static const std::set<std::string> known = {
      "gen.k",          "gen.d",         "gen.n_per_class",
      "gen.sigma",      "gen.seed",      "solve.max_iters",
      "solve.eta0",     "solve.patience", "solve.tol",
      "solve.seed",     "probe.dense_until", "probe.growth",
      "run.gamma0",     "run.mu",        "run.batch_size",
      "run.max_steps",  "run.restart_tau", "run.seed",
      "run.optimizers", "run.norm",      "run.mode",
      "sweep.axis",     "sweep.values",  "out.dir"};
  for (const auto& [key, _] : kv) {
    if (!known.contains(key)) {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  if (const auto* v = get("gen.k")) cfg.gen.k = std::stoi(*v);
  if (const auto* v = get("gen.d")) cfg.gen.d = std::stoi(*v);
  if (const auto* v = get("gen.n_per_class")) cfg.gen.n_per_class = std::stoi(*v);
  if (const auto* v = get("gen.sigma")) cfg.gen.sigma = io::parse_double(*v);
  if (const auto* v = get("gen.seed")) cfg.gen.seed = std::stoull(*v);
  if (const auto* v = get("solve.max_iters")) cfg.solve.max_iters = std::stoull(*v);
  if (const auto* v = get("solve.eta0")) cfg.solve.eta0 = io::parse_double(*v);
  if (const auto* v = get("solve.patience")) cfg.solve.patience = std::stoull(*v);
  if (const auto* v = get("solve.tol")) cfg.solve.tol = io::parse_double(*v);
  if (const auto* v = get("solve.seed")) cfg.solve.seed = std::stoull(*v);
  if (const auto* v = get("probe.dense_until")) {
    cfg.probes.dense_until = std::stoull(*v);
  }
  if (const auto* v = get("probe.growth")) cfg.probes.growth = io::parse_double(*v);
  if (const auto* v = get("run.max_steps")) cfg.max_steps = std::stoull(*v);

  std::vector<std::string> names = {"ngd", "signgd", "spectral_gd", "nucgd"};
  if (const auto* v = get("run.optimizers")) {
    names.clear();
    for (const std::string& name : io::split(*v, ',')) {
      if (!io::trim(name).empty()) names.push_back(io::trim(name));
    }
    if (names.empty()) throw std::invalid_argument("empty optimizer list");
  }
  for (const std::string& name : names) {
    OptimizerSpec spec = make_optimizer(name);
    if (const auto* v = get("run.norm")) {
      spec.cfg.norm = la::parse_norm_kind(*v);
    }
    if (const auto* v = get("run.mode")) {
      spec.cfg.nucgd_mode = optim::parse_nucgd_mode(*v);
    }
    if (const auto* v = get("run.gamma0")) spec.cfg.gamma0 = io::parse_double(*v);
    if (const auto* v = get("run.mu")) spec.cfg.mu = io::parse_double(*v);
    if (const auto* v = get("run.batch_size")) {
      spec.cfg.batch_size = std::stoull(*v);
    }
    if (const auto* v = get("run.restart_tau")) {
      spec.cfg.restart_tau = io::parse_double(*v);
    }
    if (const auto* v = get("run.seed")) spec.cfg.seed = std::stoull(*v);
    cfg.optimizers.push_back(std::move(spec));
  }

  if (const auto* v = get("sweep.axis")) {
    SweepSpec sweep;
    sweep.axis = parse_sweep_axis(*v);
    const auto* values = get("sweep.values");
    if (values == nullptr) {
      throw std::invalid_argument("sweep.axis requires sweep.values");
    }
    for (const std::string& cell : io::split(*values, ',')) {
      if (!io::trim(cell).empty()) {
        sweep.values.push_back(io::parse_double(io::trim(cell)));
      }
    }
    if (sweep.values.empty()) {
      throw std::invalid_argument("sweep.values must be nonempty");
    }
    cfg.sweep = sweep;
  } else if (get("sweep.values")) {
    throw std::invalid_argument("sweep.values requires sweep.axis");
  }

  std::filesystem::path out = "nsd_out";
  if (const auto* v = get("out.dir")) out = *v;
  if (const char* root = std::getenv("NSD_OUTPUT_ROOT");
      root != nullptr && out.is_relative()) {
    out = std::filesystem::path(root) / out;
  }
  cfg.output_dir = out;
  return cfg;
}

}  // namespace nsd::harness
