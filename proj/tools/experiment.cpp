#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "mmfe/discretize.hpp"
#include "mmfe/errors.hpp"
#include "mmfe/linalg.hpp"
#include "mmfe/parallel.hpp"
#include "mmfe/random.hpp"
#include "mmfe/scenario_tree.hpp"
#include "mmfe/sweep.hpp"
#include "mmfe/tabular_dp.hpp"

namespace mmfe::cli {

namespace pt = boost::property_tree;

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"mode", "seed", "threads", "out"}},
      {"params",
       {"g", "rho", "kappa", "alpha", "tau", "mean_w", "mean_v", "sigma2", "sigma2_v", "gamma", "trunc_lag"}},
      {"sweep", {"panels", "resolution", "allow_nondefault_range", "gamma_range", "g_range", "rho_range",
                 "sigma2_range", "sigma2_v_range", "tau_range", "alpha_range", "kappa_range"}},
      {"sim", {"replications", "horizon", "trace_replication"}},
      {"validate", {"martingale_replications", "moment_draws", "value_replications", "grid_points", "dp_instances",
                    "tree_instances"}},
      {"dp", {"stages", "delta_atoms", "w_atoms", "f_atoms", "action_count", "action_step", "tree_instances"}},
  };
  return keys;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
  const auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  std::istringstream in(*node);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("cannot parse '" + path + "' from '" + *node + "'");
  return value;
}

template <>
std::string get<std::string>(const pt::ptree& tree, const std::string& path, std::string fallback) {
  const auto node = tree.get_optional<std::string>(path);
  return node ? *node : fallback;
}

bool get_bool(const pt::ptree& tree, const std::string& path, bool fallback) {
  const auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  if (*node == "true" || *node == "1" || *node == "yes") return true;
  if (*node == "false" || *node == "0" || *node == "no") return false;
  throw ConfigError("cannot parse boolean '" + path + "' from '" + *node + "'");
}

std::pair<double, double> parse_range(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  double lo = 0.0, hi = 0.0;
  in >> lo >> hi;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("range '" + key + "' must be two numbers 'lo hi'");
  return {lo, hi};
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  body(out);
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

void print_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
  const Eigen::IOFormat fmt(8, 0, "  ", "\n", "    ", "");
  os << name << " =\n" << m.format(fmt) << "\n";
}

int run_solve(const ExperimentConfig& cfg, std::ostream& report) {
  const energy::CostBreakdown c = energy::evaluate(cfg.params);
  print_matrix(report, "K_no_forecast (state W~, X~, Y)", c.no_forecast.k);
  print_matrix(report, "K_forecast (state W~, F~1, F~2, X~, Y)", c.forecast.k);
  print_matrix(report, "gain_no_forecast (a = -gain * state)", c.no_forecast.gain);
  print_matrix(report, "gain_forecast (a = -gain * state)", c.forecast.gain);
  const Eigen::Vector3d coef = energy::no_forecast_action_coefficients(cfg.params, c.no_forecast.k);
  char line[256];
  std::snprintf(line, sizeof line, "no-forecast action = %.8f W~ + %.8f X~ + %.8f Y\n", coef(0), coef(1), coef(2));
  report << line;
  std::snprintf(line, sizeof line, "cost_no_forecast = %.10f\ncost_forecast = %.10f\nD_percent = %.10f\n",
                c.cost_no_forecast, c.cost_forecast, c.d_percent);
  report << line;

  write_file(cfg.out / "solve.csv", [&](std::ostream& os) {
    os << "quantity,value\n";
    os << "cost_no_forecast," << num(c.cost_no_forecast) << "\n";
    os << "cost_forecast," << num(c.cost_forecast) << "\n";
    os << "D_percent," << num(c.d_percent) << "\n";
    os << "tau0," << num(cfg.params.tau0()) << "\n";
    os << "riccati_iterations_no_forecast," << c.no_forecast.iterations << "\n";
    os << "riccati_iterations_forecast," << c.forecast.iterations << "\n";
  });
  write_file(cfg.out / "K_no_forecast.csv", [&](std::ostream& os) { write_matrix_csv(os, c.no_forecast.k); });
  write_file(cfg.out / "K_forecast.csv", [&](std::ostream& os) { write_matrix_csv(os, c.forecast.k); });
  write_file(cfg.out / "gain_no_forecast.csv", [&](std::ostream& os) { write_matrix_csv(os, c.no_forecast.gain); });
  write_file(cfg.out / "gain_forecast.csv", [&](std::ostream& os) { write_matrix_csv(os, c.forecast.gain); });
  return 0;
}

int run_sweep(const ExperimentConfig& cfg, std::ostream& report, std::ostream& progress) {
  int failures = 0;
  for (std::size_t i = 0; i < cfg.panels.size(); ++i) {
    const SweepPanel& p = cfg.panels[i];
    const energy::SweepAxis a1{p.axis1, energy::linspace(p.lo1, p.hi1, cfg.resolution)};
    const energy::SweepAxis a2{p.axis2, energy::linspace(p.lo2, p.hi2, cfg.resolution)};
    const energy::SweepGrid grid = energy::sweep_grid(cfg.params, a1, a2);
    const std::string name = "sweep_" + p.axis1 + "_" + p.axis2 + ".csv";
    write_file(cfg.out / name, [&](std::ostream& os) { energy::write_sweep_csv(os, grid); });
    long invalid = 0, failed = 0;
    for (const auto& cell : grid.cells) {
      if (cell.status == "invalid") ++invalid;
      else if (!cell.ok()) ++failed;
    }
    failures += failed > 0;
    progress << "panel " << i + 1 << "/" << cfg.panels.size() << " " << p.axis1 << " x " << p.axis2 << ": "
             << grid.cells.size() << "/" << grid.cells.size() << " cells\n";
    report << name << ": " << grid.cells.size() << " cells, " << invalid << " invalid (rho >= g), " << failed
           << " failed\n";
  }
  return failures > 0 ? 3 : 0;
}

int run_simulate(const ExperimentConfig& cfg, std::ostream& report) {
  const energy::CostBreakdown c = energy::evaluate(cfg.params);
  sim::SimConfig sc;
  sc.replications = cfg.sim_replications;
  sc.horizon_periods = cfg.sim_horizon;
  sc.seed = cfg.seed;
  sc.discount = cfg.params.alpha;

  const energy::SystemBundle nf = energy::build_no_forecast(cfg.params);
  const auto init_nf =
      sim::InitialDistribution::from_second_moment(nf.initial_second_moment, 2, cfg.params.tau - cfg.params.tau0());
  const sim::CostEstimate est_nf = sim::simulate_discounted_cost(nf.lqr, init_nf, c.no_forecast.gain, sc);
  const sim::PairEstimate pair = sim::simulate_energy_pair(cfg.params, c.no_forecast.gain, c.forecast.gain, sc);

  struct Row {
    const char* name;
    double closed;
    const sim::CostEstimate* est;
  };
  const Row rows[] = {{"no_forecast_generic", c.cost_no_forecast, &est_nf},
                      {"no_forecast_common", c.cost_no_forecast, &pair.no_forecast},
                      {"forecast_common", c.cost_forecast, &pair.forecast},
                      {"difference_common", c.cost_no_forecast - c.cost_forecast, &pair.difference}};
  write_file(cfg.out / "simulate.csv", [&](std::ostream& os) {
    os << "estimate,closed_form,mean,std_error,z,replications,horizon,truncation_bias_bound\n";
    for (const Row& r : rows) {
      const double z = (r.est->mean - r.closed) / r.est->std_error;
      os << r.name << "," << num(r.closed) << "," << num(r.est->mean) << "," << num(r.est->std_error) << ","
         << num(z) << "," << r.est->replications << "," << r.est->horizon << "," << num(r.est->truncation_bias_bound)
         << "\n";
      char line[256];
      std::snprintf(line, sizeof line, "%-20s closed %12.6f  simulated %12.6f +- %.6f  (z = %+.2f)\n", r.name,
                    r.closed, r.est->mean, r.est->std_error, z);
      report << line;
    }
  });
  write_file(cfg.out / "simulate_trace.csv", [&](std::ostream& os) {
    sim::write_trace_csv(os, nf.lqr, init_nf, c.no_forecast.gain, sc, cfg.trace_replication);
  });
  return 0;
}

int run_validate(const ExperimentConfig& cfg, std::ostream& report, std::ostream& progress) {
  const auto results = validation::run_battery(cfg.params, cfg.scale, cfg.seed, [&](const validation::CheckResult& r) {
    report << validation::format_result(r) << std::flush;
    progress << "check " << r.name << " done\n";
  });
  bool all = true;
  write_file(cfg.out / "validate.csv", [&](std::ostream& os) {
    os << "check,subcheck,passed,detail\n";
    for (const auto& r : results) {
      all = all && r.passed();
      for (const auto& s : r.subchecks) {
        os << r.name << "," << csv_quote(s.name) << "," << (s.passed ? 1 : 0) << "," << csv_quote(s.detail) << "\n";
      }
    }
  });
  report << (all ? "all properties hold\n" : "some properties failed\n");
  return all ? 0 : kValidationFailure;
}

int run_dp_demo(const ExperimentConfig& cfg, std::ostream& report) {
  const energy::EnergyParams& p = cfg.params;
  const MmfeModel model = p.weather_model();
  dp::ToyControl control;
  control.rho = p.rho;
  control.kappa = p.kappa;
  control.tau = p.tau;
  control.mean_v = p.mean_v;
  control.sigma2_v = p.sigma2_v;
  control.actions = dp::default_actions(control, p.mean_w, cfg.dp.action_count, cfg.dp.action_step);

  const EpsilonArray frozen = sample_epsilon_array(model, {1, cfg.dp.stages + 2, 0}, cfg.seed);
  const dp::WeatherGrid wgrid = dp::default_weather_grid(model, control, cfg.dp.delta_atoms, cfg.dp.w_atoms);
  const dp::ForecastGrid fgrid =
      dp::default_forecast_grid(model, control, 1, cfg.dp.delta_atoms, cfg.dp.w_atoms, cfg.dp.f_atoms);

  struct Toy {
    std::string name;
    dp::TabularMdp mdp;
    int centre;
  };
  const int dc = cfg.dp.delta_atoms / 2;
  std::vector<Toy> toys;
  toys.push_back({"no-forecast (Delta, W)", dp::discretize_no_forecast(model, control, cfg.dp.stages, wgrid),
                  dc * cfg.dp.w_atoms + cfg.dp.w_atoms / 2});
  toys.push_back({"static forecast (Delta, W)",
                  dp::discretize_static_forecast(model, frozen, control, cfg.dp.stages, wgrid),
                  dc * cfg.dp.w_atoms + cfg.dp.w_atoms / 2});
  toys.push_back({"dynamic forecast r=1 (Delta, F1)",
                  dp::discretize_dynamic_forecast(model, control, cfg.dp.stages, fgrid),
                  dc * cfg.dp.f_atoms + cfg.dp.f_atoms / 2});
  toys.push_back({"static+dynamic r=1 (Delta, F1)",
                  dp::discretize_static_dynamic(model, frozen, control, cfg.dp.stages, fgrid),
                  dc * cfg.dp.f_atoms + cfg.dp.f_atoms / 2});

  report << "Quantized toy instances (" << cfg.dp.stages << " stages, " << control.actions.size()
         << " actions; value at the centre state):\n";
  write_file(cfg.out / "dp_demo_toy.csv", [&](std::ostream& os) {
    os << "instance,states,centre_state,centre_value\n";
    for (const Toy& t : toys) {
      const dp::Solution sol = dp::backward_induction(t.mdp);
      const double v = sol.values[0](t.centre);
      os << csv_quote(t.name) << "," << t.mdp.num_states() << "," << csv_quote(t.mdp.states[t.centre]) << ","
         << num(v) << "\n";
      char line[256];
      std::snprintf(line, sizeof line, "  %-34s %6d states  V0 = %.6f\n", t.name.c_str(), t.mdp.num_states(), v);
      report << line;
    }
  });

  report << "\nInformation monotonicity on common-noise scenario trees:\n";
  report << "  instance  no-forecast     forecast        gap  holds\n";
  int violations = 0;
  write_file(cfg.out / "dp_demo_trees.csv", [&](std::ostream& os) {
    os << "instance,no_forecast_value,forecast_value,gap,holds\n";
    for (int i = 0; i <= cfg.dp.tree_instances; ++i) {
      const dp::ScenarioInstance inst =
          i == 0 ? dp::ScenarioInstance{} : dp::random_scenario_instance(hash_words({cfg.seed, 0x64656d6fULL,
                                                                                      static_cast<std::uint64_t>(i)}));
      const auto cmp = dp::scenario_tree_comparison(inst);
      const double gap = cmp.no_forecast_value - cmp.forecast_value;
      const bool holds = gap >= -1e-12;
      violations += !holds;
      os << i << "," << num(cmp.no_forecast_value) << "," << num(cmp.forecast_value) << "," << num(gap) << ","
         << (holds ? 1 : 0) << "\n";
      char line[256];
      std::snprintf(line, sizeof line, "  %8d %12.6f %12.6f %10.6f  %s\n", i, cmp.no_forecast_value,
                    cmp.forecast_value, gap, holds ? "yes" : "NO");
      report << line;
    }
  });
  return violations == 0 ? 0 : kValidationFailure;
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::modes() {
  static const std::vector<std::string> m = {"solve", "sweep", "simulate", "validate", "dp-demo"};
  return m;
}

void ExperimentConfig::validate() const {
  if (std::find(modes().begin(), modes().end(), mode) == modes().end()) {
    throw ConfigError("unknown mode '" + mode + "'");
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (out.empty()) throw ConfigError("output directory must be set");
  params.validate();
  if (mode == "sweep") {
    if (resolution < 2) throw ConfigError("sweep resolution must be >= 2");
    if (panels.empty()) throw ConfigError("sweep needs at least one panel");
    for (const auto& p : panels) {
      if (!energy::is_sweep_axis(p.axis1) || !energy::is_sweep_axis(p.axis2)) {
        throw ConfigError("unknown sweep axis in panel " + p.axis1 + ":" + p.axis2);
      }
      if (p.axis1 == p.axis2) throw ConfigError("sweep axes must differ");
      if (!(p.lo1 < p.hi1) || !(p.lo2 < p.hi2)) throw ConfigError("sweep ranges must satisfy lo < hi");
      if (!allow_nondefault_range) {
        for (const auto& [axis, lo, hi] : {std::tuple{p.axis1, p.lo1, p.hi1}, std::tuple{p.axis2, p.lo2, p.hi2}}) {
          const double v = energy::axis_value(params, axis);
          if (v < lo || v > hi) {
            throw ConfigError("range of axis '" + axis + "' excludes its default value " + num(v) +
                              "; pass --allow-nondefault-range to override");
          }
        }
      }
    }
  }
  if (mode == "simulate") {
    sim::SimConfig sc;
    sc.replications = sim_replications;
    sc.horizon_periods = sim_horizon;
    sc.discount = params.alpha;
    sc.validate();
    if (trace_replication < 0 || trace_replication >= sim_replications) {
      throw ConfigError("trace_replication must index one of the replications");
    }
  }
  if (mode == "validate") {
    if (scale.martingale_replications < 100 || scale.moment_draws < 100 || scale.value_replications < 2 ||
        scale.grid_points < 2 || scale.dp_instances < 1 || scale.tree_instances < 1) {
      throw ConfigError("validation scale is too small");
    }
  }
  if (mode == "dp-demo") {
    if (dp.stages < 1 || dp.stages > 50) throw ConfigError("dp stages must lie in [1, 50]");
    if (dp.delta_atoms < 2 || dp.w_atoms < 2 || dp.f_atoms < 2) throw ConfigError("dp grids need >= 2 atoms");
    if (dp.action_count < 1 || !(dp.action_step > 0.0)) throw ConfigError("dp actions are misconfigured");
    if (dp.tree_instances < 0) throw ConfigError("tree_instances must be >= 0");
  }
}

std::vector<SweepPanel> default_panels(const energy::EnergyParams& params) {
  const std::pair<const char*, const char*> names[] = {
      {"gamma", "g"}, {"rho", "gamma"}, {"sigma2", "sigma2_v"}, {"tau", "gamma"}};
  std::vector<SweepPanel> out;
  for (const auto& [a1, a2] : names) {
    const auto [lo1, hi1] = energy::default_axis_range(a1, params);
    const auto [lo2, hi2] = energy::default_axis_range(a2, params);
    out.push_back({a1, a2, lo1, hi1, lo2, hi2});
  }
  return out;
}

ExperimentConfig parse_config(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
  ExperimentConfig cfg;
  cfg.mode = get<std::string>(tree, "run.mode", cfg.mode);
  cfg.seed = get<std::uint64_t>(tree, "run.seed", cfg.seed);
  cfg.threads = get<int>(tree, "run.threads", cfg.threads);
  cfg.out = get<std::string>(tree, "run.out", cfg.out.string());

  auto& p = cfg.params;
  p.g = get(tree, "params.g", p.g);
  p.rho = get(tree, "params.rho", p.rho);
  p.kappa = get(tree, "params.kappa", p.kappa);
  p.alpha = get(tree, "params.alpha", p.alpha);
  p.tau = get(tree, "params.tau", p.tau);
  p.mean_w = get(tree, "params.mean_w", p.mean_w);
  p.mean_v = get(tree, "params.mean_v", p.mean_v);
  p.sigma2 = get(tree, "params.sigma2", p.sigma2);
  p.sigma2_v = get(tree, "params.sigma2_v", p.sigma2_v);
  p.gamma = get(tree, "params.gamma", p.gamma);
  if (tree.get_optional<std::string>("params.trunc_lag")) p.trunc_lag = get<int>(tree, "params.trunc_lag", 0);

  cfg.resolution = get(tree, "sweep.resolution", cfg.resolution);
  cfg.allow_nondefault_range = get_bool(tree, "sweep.allow_nondefault_range", cfg.allow_nondefault_range);
  std::vector<std::pair<std::string, std::string>> pairs;
  {
    std::istringstream in(get<std::string>(tree, "sweep.panels", "gamma:g rho:gamma sigma2:sigma2_v tau:gamma"));
    for (std::string token; in >> token;) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ConfigError("panel '" + token + "' must read axis1:axis2");
      pairs.emplace_back(token.substr(0, colon), token.substr(colon + 1));
    }
  }
  auto range = [&](const std::string& axis) {
    if (!energy::is_sweep_axis(axis)) throw ConfigError("unknown sweep axis '" + axis + "'");
    const std::string key = "sweep." + axis + "_range";
    if (const auto text = tree.get_optional<std::string>(key)) return parse_range(*text, key);
    return energy::default_axis_range(axis, p);
  };
  for (const auto& [a1, a2] : pairs) {
    const auto [lo1, hi1] = range(a1);
    const auto [lo2, hi2] = range(a2);
    cfg.panels.push_back({a1, a2, lo1, hi1, lo2, hi2});
  }

  cfg.sim_replications = get(tree, "sim.replications", cfg.sim_replications);
  cfg.sim_horizon = get(tree, "sim.horizon", cfg.sim_horizon);
  cfg.trace_replication = get(tree, "sim.trace_replication", cfg.trace_replication);

  auto& s = cfg.scale;
  s.martingale_replications = get(tree, "validate.martingale_replications", s.martingale_replications);
  s.moment_draws = get(tree, "validate.moment_draws", s.moment_draws);
  s.value_replications = get(tree, "validate.value_replications", s.value_replications);
  s.grid_points = get(tree, "validate.grid_points", s.grid_points);
  s.dp_instances = get(tree, "validate.dp_instances", s.dp_instances);
  s.tree_instances = get(tree, "validate.tree_instances", s.tree_instances);

  auto& d = cfg.dp;
  d.stages = get(tree, "dp.stages", d.stages);
  d.delta_atoms = get(tree, "dp.delta_atoms", d.delta_atoms);
  d.w_atoms = get(tree, "dp.w_atoms", d.w_atoms);
  d.f_atoms = get(tree, "dp.f_atoms", d.f_atoms);
  d.action_count = get(tree, "dp.action_count", d.action_count);
  d.action_step = get(tree, "dp.action_step", d.action_step);
  d.tree_instances = get(tree, "dp.tree_instances", d.tree_instances);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(tree);
}

pt::ptree to_ptree(const ExperimentConfig& cfg) {
  pt::ptree t;
  t.put("run.mode", cfg.mode);
  t.put("run.seed", std::to_string(cfg.seed));
  t.put("run.threads", std::to_string(cfg.threads));
  t.put("run.out", cfg.out.string());

  const auto& p = cfg.params;
  t.put("params.g", num(p.g));
  t.put("params.rho", num(p.rho));
  t.put("params.kappa", num(p.kappa));
  t.put("params.alpha", num(p.alpha));
  t.put("params.tau", num(p.tau));
  t.put("params.mean_w", num(p.mean_w));
  t.put("params.mean_v", num(p.mean_v));
  t.put("params.sigma2", num(p.sigma2));
  t.put("params.sigma2_v", num(p.sigma2_v));
  t.put("params.gamma", num(p.gamma));
  if (p.trunc_lag) t.put("params.trunc_lag", std::to_string(*p.trunc_lag));

  std::string panels;
  std::map<std::string, std::pair<double, double>> ranges;
  for (const auto& pn : cfg.panels) {
    panels += (panels.empty() ? "" : " ") + pn.axis1 + ":" + pn.axis2;
    ranges[pn.axis1] = {pn.lo1, pn.hi1};
    ranges[pn.axis2] = {pn.lo2, pn.hi2};
  }
  t.put("sweep.panels", panels);
  t.put("sweep.resolution", std::to_string(cfg.resolution));
  t.put("sweep.allow_nondefault_range", cfg.allow_nondefault_range ? "true" : "false");
  for (const auto& [axis, r] : ranges) t.put("sweep." + axis + "_range", num(r.first) + " " + num(r.second));

  t.put("sim.replications", std::to_string(cfg.sim_replications));
  t.put("sim.horizon", std::to_string(cfg.sim_horizon));
  t.put("sim.trace_replication", std::to_string(cfg.trace_replication));

  const auto& s = cfg.scale;
  t.put("validate.martingale_replications", std::to_string(s.martingale_replications));
  t.put("validate.moment_draws", std::to_string(s.moment_draws));
  t.put("validate.value_replications", std::to_string(s.value_replications));
  t.put("validate.grid_points", std::to_string(s.grid_points));
  t.put("validate.dp_instances", std::to_string(s.dp_instances));
  t.put("validate.tree_instances", std::to_string(s.tree_instances));

  const auto& d = cfg.dp;
  t.put("dp.stages", std::to_string(d.stages));
  t.put("dp.delta_atoms", std::to_string(d.delta_atoms));
  t.put("dp.w_atoms", std::to_string(d.w_atoms));
  t.put("dp.f_atoms", std::to_string(d.f_atoms));
  t.put("dp.action_count", std::to_string(d.action_count));
  t.put("dp.action_step", num(d.action_step));
  t.put("dp.tree_instances", std::to_string(d.tree_instances));
  return t;
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) { pt::write_ini(out, to_ptree(cfg)); }

int run(const ExperimentConfig& cfg, std::ostream& report, std::ostream& progress) {
  cfg.validate();
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.out.string() + "': " + ec.message());
  write_file(cfg.out / "effective_config.ini", [&](std::ostream& os) { write_config(os, cfg); });

  if (cfg.mode == "solve") return run_solve(cfg, report);
  if (cfg.mode == "sweep") return run_sweep(cfg, report, progress);
  if (cfg.mode == "simulate") return run_simulate(cfg, report);
  if (cfg.mode == "validate") return run_validate(cfg, report, progress);
  return run_dp_demo(cfg, report);
}

int exit_code_for(const std::string& category) {
  if (category == "config" || category == "parameter" || category == "shape" || category == "size" ||
      category == "discretization" || category == "invalid-horizon") {
    return 2;
  }
  if (category == "non-convergence" || category == "instability") return 3;
  return 1;
}

}  // namespace mmfe::cli
