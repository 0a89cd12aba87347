#include <CLI11.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tmap/config_io.hpp"
#include "tmap/error.hpp"
#include "tmap/estimation.hpp"
#include "tmap/experiment.hpp"
#include "tmap/map_io.hpp"
#include "tmap/sparsity.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitDiverged = 2;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw tmap::ArgumentError("cannot write '" + path.string() + "'");
  out << text;
}

bool parse_row(const std::string& line, std::vector<double>& row) {
  row.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    double x = 0.0;
    const char* first = cell.data() + b;
    const char* last = cell.data() + e + 1;
    const auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last) return false;
    row.push_back(x);
  }
  return !row.empty();
}

Eigen::MatrixXd read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tmap::ArgumentError("cannot open samples file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (rows.empty() && number == 1) continue;  // header
      throw tmap::ArgumentError(path + ": line " + std::to_string(number) + " is not a row of numbers");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw tmap::ArgumentError(path + ": line " + std::to_string(number) + " has " + std::to_string(row.size()) +
                                " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw tmap::ArgumentError(path + ": no samples");
  Eigen::MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

tmap::UndirectedGraph read_graph(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw tmap::ArgumentError("cannot open graph file '" + path + "'");
  tmap::UndirectedGraph g(n);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::size_t a = 0, b = 0;
    if (!(ss >> a)) continue;
    if (!(ss >> b)) throw tmap::ArgumentError(path + ": edge needs two vertices");
    if (a >= n || b >= n) throw tmap::ArgumentError(path + ": vertex out of range");
    g.add_edge(a, b);
  }
  return g;
}

int run_command(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = tmap::load_config(config_path);
  fs::create_directories(out_dir);
  const auto result = tmap::run_twin_experiment(cfg);
  write_file(fs::path(out_dir) / "summary.json", tmap::summary_json(cfg, result.summary));
  std::ofstream records(fs::path(out_dir) / "records.csv");
  tmap::write_records_csv(records, result.records);
  const auto& s = result.summary;
  if (s.diverged) {
    std::cerr << "diverged: " << s.failure << '\n';
    return kExitDiverged;
  }
  if (!s.defined) {
    std::cout << "no records in the metric window\n";
    return 0;
  }
  std::cout << "mean rmse " << s.mean_rmse << ", mean spread " << s.mean_spread << ", coverage " << s.coverage
            << ", mean crps " << s.mean_crps << " over " << s.window << " steps\n";
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& grid_path, const std::string& out_dir) {
  const auto cfg = tmap::load_config(config_path);
  const auto grid = tmap::load_grid(grid_path);
  fs::create_directories(out_dir);
  const auto sweep = tmap::run_sweep(cfg, grid);
  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  tmap::write_sweep_csv(csv, sweep);
  write_file(fs::path(out_dir) / "best.json", tmap::best_json(cfg, sweep));
  const auto& best = sweep.rows.at(sweep.best);
  std::cout << sweep.rows.size() << " combinations, best mean rmse " << best.summary.mean_rmse << '\n';
  return 0;
}

struct EstimateOptions {
  std::string samples;
  int p = 0;
  double gamma = 2.0;
  std::string monotone_scope = "first_component";
  std::optional<double> radius;
  std::string graph;
  std::optional<std::size_t> cutoff;
  std::string out;
  std::string report;
};

int estimate_command(const EstimateOptions& o) {
  const Eigen::MatrixXd samples = read_samples(o.samples);
  const auto n = static_cast<std::size_t>(samples.cols());
  tmap::MapSpec spec;
  spec.p = o.p;
  spec.gamma = o.gamma;
  spec.nonlinear_monotone = tmap::monotone_scope_from_string(o.monotone_scope);

  tmap::SparsityPattern sparsity;
  if (!o.graph.empty()) {
    sparsity = tmap::graph_sparsity(read_graph(o.graph, n));
  } else if (o.radius) {
    sparsity = tmap::distance_sparsity(tmap::line_distance, n, *o.radius);
  } else {
    sparsity = tmap::SparsityPattern::dense(n);
  }
  sparsity.identity_cutoff = o.cutoff;

  const auto fitted = tmap::fit_map(samples, spec, sparsity);
  write_file(o.out, tmap::map_to_json(fitted.map));
  if (!o.report.empty()) write_file(o.report, tmap::fit_report_json(fitted.report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport-map ensemble filters and twin experiments"};
  app.require_subcommand(1);

  std::string config_path, grid_path, out_dir;
  auto* run = app.add_subcommand("run", "Run one twin experiment");
  run->add_option("--config", config_path, "Experiment configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep localization and inflation settings");
  sweep->add_option("--config", config_path, "Base experiment configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_path, "Grid of values")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory")->required();

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate-map", "Fit a triangular map to samples");
  estimate->add_option("--samples", est.samples, "CSV with one sample per row")->required()->check(CLI::ExistingFile);
  estimate->add_option("--p", est.p, "Polynomial degree of the map")->check(CLI::NonNegativeNumber);
  estimate->add_option("--gamma", est.gamma, "Width factor of the radial bases")->check(CLI::PositiveNumber);
  estimate->add_option("--monotone-scope", est.monotone_scope, "none, first_component or all_components");
  estimate->add_option("--r", est.radius, "Distance-based sparsity radius on a line");
  estimate->add_option("--graph", est.graph, "Edge list, one 0-based pair per line")->check(CLI::ExistingFile);
  estimate->add_option("--cutoff", est.cutoff, "Leave components from this index on as the identity");
  estimate->add_option("--out", est.out, "Output map JSON")->required();
  estimate->add_option("--report", est.report, "Output fit report JSON");

  CLI11_PARSE(app, argc, argv);

  if (!est.graph.empty() && est.radius) {
    std::cerr << "--graph and --r are mutually exclusive\n";
    return kExitFailure;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir);
    if (sweep->parsed()) return sweep_command(config_path, grid_path, out_dir);
    if (estimate->parsed()) return estimate_command(est);
  } catch (const tmap::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
