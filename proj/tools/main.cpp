#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "mmfe/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MMFE forecast-value experiments"};
  std::string config_path, mode, out;
  std::uint64_t seed = 0;
  int threads = -1;
  bool allow_range = false;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "solve | sweep | simulate | validate | dp-demo");
  app.add_option("--seed", seed, "random seed (overrides [run] seed)");
  app.add_option("--threads", threads, "worker threads (0 = runtime default)");
  app.add_option("--out", out, "output directory");
  app.add_flag("--allow-nondefault-range", allow_range, "permit sweep ranges that exclude the default value");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  try {
    mmfe::cli::ExperimentConfig cfg =
        config_path.empty() ? mmfe::cli::ExperimentConfig{} : mmfe::cli::load_config(config_path);
    if (cfg.panels.empty()) cfg.panels = mmfe::cli::default_panels(cfg.params);
    if (!mode.empty()) cfg.mode = mode;
    if (app.count("--seed")) cfg.seed = seed;
    if (threads >= 0) cfg.threads = threads;
    if (!out.empty()) cfg.out = out;
    if (allow_range) cfg.allow_nondefault_range = true;
    const int status = mmfe::cli::run(cfg, std::cout, std::cerr);
    if (status == mmfe::cli::kValidationFailure) std::cerr << "error: validation: some properties failed\n";
    if (status == 3) std::cerr << "error: non-convergence: some sweep cells failed\n";
    return status;
  } catch (const mmfe::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return mmfe::cli::exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
