#include "nsd/dataset.hpp"

#include <stdexcept>
#include <string>

#include "nsd/errors.hpp"
#include "nsd/io.hpp"
#include "nsd/maxmargin.hpp"
#include "nsd/rng.hpp"

namespace nsd::data {

namespace {

void validate(const GenConfig& cfg) {
  if (cfg.k < 2) throw std::invalid_argument("GenConfig: k must be >= 2");
  if (cfg.d < 1) throw std::invalid_argument("GenConfig: d must be >= 1");
  if (cfg.n_per_class < 1) {
    throw std::invalid_argument("GenConfig: n_per_class must be >= 1");
  }
  if (cfg.sigma < 0.0) {
    throw std::invalid_argument("GenConfig: sigma must be >= 0");
  }
}

}  // namespace

Dataset generate(const GenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  const std::size_t d = static_cast<std::size_t>(cfg.d);
  const std::size_t n = k * static_cast<std::size_t>(cfg.n_per_class);

  Dataset ds;
  ds.k = cfg.k;
  ds.config = cfg;
  ds.centers = rng.gaussian_matrix(k, d);
  ds.features = la::Matrix(n, d);
  ds.labels.resize(n);

  std::size_t row = 0;
  for (std::size_t y = 0; y < k; ++y) {
    for (int j = 0; j < cfg.n_per_class; ++j, ++row) {
      for (std::size_t c = 0; c < d; ++c) {
        ds.features(row, c) = ds.centers(y, c) + cfg.sigma * rng.gaussian();
      }
      ds.labels[row] = static_cast<int>(y) + 1;
    }
  }
  return ds;
}

SeparabilityReport check_separability(const Dataset& ds, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  maxmargin::SolveConfig cfg;
  cfg.stop_margin = tol;  // certify as soon as the margin clears the bar
  const maxmargin::ReferenceSolution sol =
      maxmargin::solve_max_margin(ds, la::NormKind::entrywise_max, cfg);

  SeparabilityReport report;
  report.witness = sol.w_star;
  report.witness_margin = sol.margin_value;
  report.separable = sol.margin_value > tol;
  if (!report.separable && !sol.stalled && sol.margin_value <= -tol) {
    throw SeparabilityInconclusiveError(
        "separability check exhausted its budget at margin " +
        io::format_double(sol.margin_value) + " after " +
        std::to_string(sol.iterations) + " iterations");
  }
  return report;
}

void save_dataset(const std::filesystem::path& csv_path, const Dataset& ds) {
  std::string csv = "y";
  for (std::size_t j = 1; j <= ds.dim(); ++j) {
    csv += ",x_" + std::to_string(j);
  }
  csv += '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    csv += std::to_string(ds.labels[i]);
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      csv += ',';
      csv += io::format_double(ds.features(i, j));
    }
    csv += '\n';
  }
  io::write_file_atomic(csv_path, csv);

  io::KvMap kv;
  kv["k"] = std::to_string(ds.config.k);
  kv["d"] = std::to_string(ds.config.d);
  kv["n_per_class"] = std::to_string(ds.config.n_per_class);
  kv["sigma"] = io::format_double(ds.config.sigma);
  kv["seed"] = std::to_string(ds.config.seed);
  kv["generator"] = Rng::kGeneratorName;
  kv["labels"] = "1-based";
  io::save_kv_file(csv_path.string() + ".manifest", kv);
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  const io::KvMap kv = io::load_kv_file(csv_path.string() + ".manifest");
  Dataset ds;
  ds.config.k = std::stoi(kv.at("k"));
  ds.config.d = std::stoi(kv.at("d"));
  ds.config.n_per_class = std::stoi(kv.at("n_per_class"));
  ds.config.sigma = io::parse_double(kv.at("sigma"));
  ds.config.seed = std::stoull(kv.at("seed"));
  ds.k = ds.config.k;

  const std::string content = io::read_file(csv_path);
  const std::vector<std::string> lines = io::split(content, '\n');
  if (lines.empty()) throw std::invalid_argument("empty dataset CSV");

  std::vector<double> values;
  std::size_t d = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string line = io::trim(lines[li]);
    if (line.empty()) continue;
    const std::vector<std::string> cells = io::split(line, ',');
    if (cells.size() < 2) throw std::invalid_argument("bad dataset row");
    if (d == 0) {
      d = cells.size() - 1;
    } else if (cells.size() - 1 != d) {
      throw std::invalid_argument("ragged dataset CSV");
    }
    ds.labels.push_back(std::stoi(io::trim(cells[0])));
    for (std::size_t j = 1; j < cells.size(); ++j) {
      values.push_back(io::parse_double(io::trim(cells[j])));
    }
  }
  ds.features = la::Matrix(ds.labels.size(), d, std::move(values));
  for (int label : ds.labels) {
    if (label < 1 || label > ds.k) {
      throw std::invalid_argument("dataset label out of range");
    }
  }
  return ds;
}

}  // namespace nsd::data
