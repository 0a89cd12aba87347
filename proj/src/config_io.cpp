#include "tmap/config_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <sstream>

#include "tmap/error.hpp"

namespace tmap {

namespace {

using Entries = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Entries read_entries(std::istream& in) {
  Entries out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArgumentError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ArgumentError("line " + std::to_string(number) + ": empty key");
    if (out.count(key)) throw ArgumentError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ArgumentError(key + ": '" + v + "' is not a number");
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ArgumentError(key + ": '" + v + "' is not a nonnegative integer");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ArgumentError(key + ": '" + v + "' is not true or false");
}

std::optional<double> to_optional_double(const std::string& key, const std::string& v) {
  if (v == "none") return std::nullopt;
  return to_double(key, v);
}

std::optional<std::size_t> to_optional_size(const std::string& key, const std::string& v) {
  if (v == "none") return std::nullopt;
  return to_size(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(Entries entries) : entries_(std::move(entries)) {}

  std::optional<std::string> take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string v = it->second;
    entries_.erase(it);
    return v;
  }

  void finish() const {
    if (!entries_.empty()) throw ArgumentError("unknown key '" + entries_.begin()->first + "'");
  }

 private:
  Entries entries_;
};

std::string number(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::string optional_text(const std::optional<double>& v) { return v ? number(*v) : "none"; }
std::string optional_text(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "none"; }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
nlohmann::json optional_json(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  std::istringstream text(format_config(cfg));
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : read_entries(text)) j[k] = v;
  return j;
}

nlohmann::json summary_object(const Summary& s) {
  return {{"defined", s.defined},
          {"diverged", s.diverged},
          {"failure", s.failure},
          {"completed_steps", s.completed_steps},
          {"window", s.window},
          {"mean_rmse", s.mean_rmse},
          {"median_rmse", s.median_rmse},
          {"mean_spread", s.mean_spread},
          {"median_spread", s.median_spread},
          {"coverage", s.coverage},
          {"mean_crps", s.mean_crps},
          {"median_crps", s.median_crps},
          {"climatological_spread", s.climatological_spread},
          {"wall_seconds", s.wall_seconds}};
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  Reader r(read_entries(in));
  ExperimentConfig cfg;

  const std::string model = r.take("model").value_or("lorenz63");
  if (model == "lorenz63") {
    Lorenz63 l;
    if (auto v = r.take("sigma")) l.sigma = to_double("sigma", *v);
    if (auto v = r.take("rho")) l.rho = to_double("rho", *v);
    if (auto v = r.take("beta")) l.beta = to_double("beta", *v);
    cfg.dynamics = DynamicsSpec::lorenz63();
    cfg.dynamics.model = l;
    cfg.filter.topology = Topology::line;
  } else if (model == "lorenz96") {
    std::size_t n = 40;
    if (auto v = r.take("n")) n = to_size("n", *v);
    double forcing = 8.0;
    if (auto v = r.take("forcing")) forcing = to_double("forcing", *v);
    cfg.dynamics = DynamicsSpec::lorenz96(n, 0.4, 0.01, forcing);
    cfg.filter.topology = Topology::cycle;
  } else {
    throw ArgumentError("model: unknown model '" + model + "'");
  }
  if (auto v = r.take("dt")) cfg.dynamics.dt = to_double("dt", *v);
  if (auto v = r.take("dt_obs")) cfg.dynamics.dt_obs = to_double("dt_obs", *v);
  if (auto v = r.take("process_noise_std")) cfg.dynamics.process_noise_std = to_double("process_noise_std", *v);

  const std::size_t n = cfg.dynamics.dimension();
  std::size_t d = n;
  if (auto v = r.take("obs_count")) d = to_size("obs_count", *v);
  NoiseKind kind = NoiseKind::gaussian;
  if (auto v = r.take("noise")) kind = noise_kind_from_string(*v);
  double theta = 1.0;
  if (auto v = r.take("theta")) theta = to_double("theta", *v);
  cfg.observation = ObservationSpec::strided(n, d, kind, theta);

  FilterConfig& f = cfg.filter;
  if (auto v = r.take("filter")) f.kind = filter_kind_from_string(*v);
  if (auto v = r.take("p")) f.p = static_cast<int>(to_size("p", *v));
  if (auto v = r.take("gamma")) f.gamma = to_double("gamma", *v);
  if (auto v = r.take("monotone_scope")) f.nonlinear_monotone = monotone_scope_from_string(*v);
  if (auto v = r.take("radius")) f.radius = to_optional_double("radius", *v);
  if (auto v = r.take("cutoff")) f.identity_cutoff = to_optional_size("cutoff", *v);
  if (auto v = r.take("inflation")) f.inflation = to_double("inflation", *v);
  if (auto v = r.take("enkf_radius")) f.enkf_radius = to_optional_double("enkf_radius", *v);
  if (auto v = r.take("topology")) f.topology = topology_from_string(*v);
  if (auto v = r.take("data_to_all")) f.data_to_all_components = to_bool("data_to_all", *v);
  if (auto v = r.take("reference_count")) f.reference_count = to_size("reference_count", *v);
  if (auto v = r.take("grid_points")) f.grid_points = to_size("grid_points", *v);
  if (auto v = r.take("execution")) {
    if (*v != "parallel" && *v != "serial") throw ArgumentError("execution: expected parallel or serial");
    f.execution = *v == "serial" ? Execution::serial : Execution::parallel;
  }

  if (auto v = r.take("ensemble_size")) cfg.ensemble_size = to_size("ensemble_size", *v);
  if (auto v = r.take("spinup_steps")) cfg.spinup_steps = to_size("spinup_steps", *v);
  if (auto v = r.take("test_steps")) cfg.test_steps = to_size("test_steps", *v);
  if (auto v = r.take("metric_window")) cfg.metric_window = to_size("metric_window", *v);
  if (auto v = r.take("spinup_inflation")) cfg.spinup_inflation = to_double("spinup_inflation", *v);
  if (auto v = r.take("seed")) cfg.seed = to_size("seed", *v);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (Error& e) {
    e.add_context(path);
    throw;
  }
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  if (const auto* l = std::get_if<Lorenz63>(&cfg.dynamics.model)) {
    o << "model = lorenz63\nsigma = " << number(l->sigma) << "\nrho = " << number(l->rho)
      << "\nbeta = " << number(l->beta) << '\n';
  } else {
    const auto& m = std::get<Lorenz96>(cfg.dynamics.model);
    o << "model = lorenz96\nn = " << m.n << "\nforcing = " << number(m.forcing) << '\n';
  }
  o << "dt = " << number(cfg.dynamics.dt) << "\ndt_obs = " << number(cfg.dynamics.dt_obs)
    << "\nprocess_noise_std = " << number(cfg.dynamics.process_noise_std) << '\n';
  o << "obs_count = " << cfg.observation.count() << "\nnoise = " << to_string(cfg.observation.noise.kind)
    << "\ntheta = " << number(cfg.observation.noise.theta) << '\n';
  const FilterConfig& f = cfg.filter;
  o << "filter = " << to_string(f.kind) << "\np = " << f.p << "\ngamma = " << number(f.gamma)
    << "\nmonotone_scope = " << to_string(f.nonlinear_monotone) << "\nradius = " << optional_text(f.radius)
    << "\ncutoff = " << optional_text(f.identity_cutoff) << "\ninflation = " << number(f.inflation)
    << "\nenkf_radius = " << optional_text(f.enkf_radius) << "\ntopology = " << to_string(f.topology)
    << "\ndata_to_all = " << (f.data_to_all_components ? "true" : "false")
    << "\nreference_count = " << f.reference_count << "\ngrid_points = " << f.grid_points
    << "\nexecution = " << (f.execution == Execution::serial ? "serial" : "parallel") << '\n';
  o << "ensemble_size = " << cfg.ensemble_size << "\nspinup_steps = " << cfg.spinup_steps
    << "\ntest_steps = " << cfg.test_steps << "\nmetric_window = " << cfg.metric_window
    << "\nspinup_inflation = " << number(cfg.spinup_inflation) << "\nseed = " << cfg.seed << '\n';
  return o.str();
}

SweepGrid parse_grid(std::istream& in) {
  Reader r(read_entries(in));
  SweepGrid g;
  auto list = [&](const std::string& key, auto&& convert, auto& target) {
    if (auto v = r.take(key)) {
      const auto items = split_list(*v);
      if (items.empty()) throw ArgumentError(key + ": empty list");
      for (const auto& item : items) target.push_back(convert(key, item));
    }
  };
  list("radius", to_optional_double, g.radius);
  list("cutoff", to_optional_size, g.identity_cutoff);
  list("inflation", to_double, g.inflation);
  list("enkf_radius", to_optional_double, g.enkf_radius);
  r.finish();
  return g;
}

SweepGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open grid file '" + path + "'");
  try {
    return parse_grid(in);
  } catch (Error& e) {
    e.add_context(path);
    throw;
  }
}

std::string summary_json(const ExperimentConfig& cfg, const Summary& summary) {
  nlohmann::json j = summary_object(summary);
  j["config"] = config_json(cfg);
  return j.dump(2);
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "radius,cutoff,inflation,enkf_radius,mean_rmse,median_rmse,mean_spread,coverage,mean_crps,diverged\n"
      << std::setprecision(17);
  for (const auto& row : sweep.rows) {
    const auto& s = row.summary;
    out << optional_text(row.filter.radius) << ',' << optional_text(row.filter.identity_cutoff) << ','
        << row.filter.inflation << ',' << optional_text(row.filter.enkf_radius) << ',' << s.mean_rmse << ','
        << s.median_rmse << ',' << s.mean_spread << ',' << s.coverage << ',' << s.mean_crps << ','
        << (s.diverged ? 1 : 0) << '\n';
  }
}

std::string best_json(const ExperimentConfig& base, const SweepResult& sweep) {
  const auto& row = sweep.rows.at(sweep.best);
  ExperimentConfig cfg = base;
  cfg.filter = row.filter;
  nlohmann::json j = summary_object(row.summary);
  j["radius"] = optional_json(row.filter.radius);
  j["cutoff"] = optional_json(row.filter.identity_cutoff);
  j["inflation"] = row.filter.inflation;
  j["enkf_radius"] = optional_json(row.filter.enkf_radius);
  j["config"] = config_json(cfg);
  return j.dump(2);
}

}  // namespace tmap
