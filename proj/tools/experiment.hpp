#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "mmfe/energy_example.hpp"
#include "mmfe/sim_harness.hpp"
#include "mmfe/validation.hpp"

namespace mmfe::cli {

struct SweepPanel {
  std::string axis1;
  std::string axis2;
  double lo1 = 0.0, hi1 = 0.0;
  double lo2 = 0.0, hi2 = 0.0;
};

struct DpDemoConfig {
  int stages = 4;
  int delta_atoms = 15;
  int w_atoms = 41;
  int f_atoms = 21;
  int action_count = 5;
  double action_step = 1.0;
  int tree_instances = 10;
};

struct ExperimentConfig {
  std::string mode = "solve";
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 keeps the runtime default
  std::filesystem::path out = "out";

  energy::EnergyParams params;

  std::vector<SweepPanel> panels;
  int resolution = 25;
  bool allow_nondefault_range = false;

  long sim_replications = 100'000;
  int sim_horizon = 0;
  long trace_replication = 0;

  validation::Scale scale;
  DpDemoConfig dp;

  static const std::vector<std::string>& modes();

  /// Throws ConfigError or ParameterError on missing or inconsistent fields.
  void validate() const;
};

/// The four default panels over the default ranges of `params`.
std::vector<SweepPanel> default_panels(const energy::EnergyParams& params);

/// Reads an INI tree; absent keys keep their defaults.
ExperimentConfig parse_config(const boost::property_tree::ptree& tree);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved INI text; parse_config on it reproduces `cfg`.
boost::property_tree::ptree to_ptree(const ExperimentConfig& cfg);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

/// Writes effective_config.ini and the mode's artifacts under cfg.out, with a
/// human-readable report on `report`. Returns the process exit status; errors
/// propagate as mmfe::Error.
int run(const ExperimentConfig& cfg, std::ostream& report, std::ostream& progress);

/// 2 for configuration and parameter errors, 3 for non-convergence and
/// instability, 1 otherwise.
int exit_code_for(const std::string& category);

constexpr int kValidationFailure = 4;

}  // namespace mmfe::cli
