#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dcm/experiments.hpp"
#include "dcm/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dual cell method experiment driver"};
  app.footer("experiments: sparsity | eigen | cfl | waveguide | sphere");

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 20240901;

  app.add_option("experiment", experiment, "experiment to run")->required();
  app.add_option("--config", config_path, "configuration file (INI-style)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "worker threads (default: DCM_THREADS or hardware)");
  app.add_option("--seed", seed, "random seed for iterative solvers")->capture_default_str();
  app.add_option("--out", out_dir, "output directory (default: out/<experiment>)");

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) dcm::set_thread_count(threads);
  if (out_dir.empty()) out_dir = "out/" + experiment;

  try {
    dcm::Config config = dcm::Config::parse_file(config_path);
    dcm::run_experiment(experiment, config, out_dir, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote results to " << out_dir << " (version " << dcm::version()
            << ", threads " << dcm::thread_count() << ")\n";
  return 0;
}
