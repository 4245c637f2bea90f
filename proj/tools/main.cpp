#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bnslab/error.hpp"
#include "bnslab/harness.hpp"
#include "bnslab/parallel.hpp"

namespace {

using Command = int (*)(const bnslab::RunConfig&, std::ostream&);

const std::map<std::string, Command> kCommands{
    {"verify", bnslab::cmd_verify}, {"picard", bnslab::cmd_picard}, {"decay", bnslab::cmd_decay},
    {"split", bnslab::cmd_split},   {"norms", bnslab::cmd_norms},   {"solve", bnslab::cmd_solve},
};

constexpr int kUsageError = 64;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bnslab: Besov/Kato spectral laboratory for the periodic Navier-Stokes mild problem"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const auto& [name, _] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " scenario");
    sub->add_option("--config", config_path, "RunConfig JSON file");
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--threads", threads, "worker threads (default: BNSLAB_THREADS, else 1)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  bnslab::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = bnslab::load_run_config(config_path);
  } catch (const bnslab::Error& e) {
    std::cerr << "bnslab " << name << ": " << e.what() << "\n";
    return kUsageError;
  }
  cfg.scenario = name;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed) cfg.seed = *seed;
  if (threads) bnslab::set_thread_count(*threads);

  try {
    return kCommands.at(name)(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "bnslab " << name << ": " << e.what() << "\n";
    return 1;
  }
}
