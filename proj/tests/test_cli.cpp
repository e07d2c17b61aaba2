#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "experiment.hpp"
#include "mmfe/errors.hpp"

using namespace mmfe;
using namespace mmfe::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mmfe_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig from_text(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_ini(in, tree);
  return parse_config(tree);
}

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace

TEST(Config, RoundTrip) {
  ExperimentConfig cfg = from_text("[run]\nmode = sweep\nseed = 12345678901234\n[params]\ng = 0.7\ntrunc_lag = 40\n"
                                   "[sweep]\npanels = gamma:g kappa:alpha\ngamma_range = 0.2 0.97\nresolution = 7\n");
  EXPECT_EQ(cfg.mode, "sweep");
  EXPECT_EQ(cfg.seed, 12345678901234ULL);
  EXPECT_EQ(cfg.params.g, 0.7);
  ASSERT_EQ(cfg.panels.size(), 2u);
  EXPECT_EQ(cfg.panels[0].lo1, 0.2);
  const std::string text = to_text(cfg);
  const ExperimentConfig again = from_text(text);
  EXPECT_EQ(to_text(again), text);
  EXPECT_EQ(again.params.trunc_lag, 40);
  EXPECT_EQ(again.resolution, 7);
}

TEST(Config, Errors) {
  EXPECT_THROW(from_text("[params]\ng = abc\n"), ConfigError);
  EXPECT_THROW(from_text("[params]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(from_text("[nowhere]\nx = 1\n"), ConfigError);
  ExperimentConfig cfg = from_text("[run]\nmode = fly\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(exit_code_for("config"), 2);
  EXPECT_EQ(exit_code_for("parameter"), 2);
  EXPECT_EQ(exit_code_for("non-convergence"), 3);
  EXPECT_EQ(exit_code_for("instability"), 3);
}

TEST(Config, SweepMustCoverDefault) {
  ExperimentConfig cfg = from_text("[run]\nmode = sweep\n[sweep]\npanels = gamma:g\ngamma_range = 0.2 0.5\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.allow_nondefault_range = true;
  EXPECT_NO_THROW(cfg.validate());
  cfg.resolution = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Run, SolveReportsNonnegativeD) {
  ExperimentConfig cfg;
  cfg.out = scratch("solve");
  std::ostringstream report, progress;
  EXPECT_EQ(run(cfg, report, progress), 0);
  EXPECT_NE(report.str().find("D_percent = 9.67"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(cfg.out / "effective_config.ini"));
  const ExperimentConfig echoed = load_config(cfg.out / "effective_config.ini");
  EXPECT_EQ(to_text(echoed), to_text(cfg));
}

TEST(Run, SweepWritesGrid) {
  ExperimentConfig cfg = from_text("[run]\nmode = sweep\n[sweep]\npanels = gamma:g\n");
  cfg.out = scratch("sweep");
  std::ostringstream report, progress;
  EXPECT_EQ(run(cfg, report, progress), 0);
  std::ifstream in(cfg.out / "sweep_gamma_g.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 626);
  EXPECT_NE(progress.str().find("625/625"), std::string::npos);
}
