// Command-line runner: loads a config, executes the task over the t-grid,
// writes <out>/<task>_summary.txt and _records.tsv.
//
// Exit codes: 0 task verdict pass, 1 verdict fail,
//             2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "diblab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"diblab: curvature laboratory for direct image bundles"};
  std::string config_path;
  std::string task_override;
  std::string out_override;
  long seed_override = -1;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "path to INI config")->required();
  app.add_option("--task", task_override,
                 "override run.task (curvature-compare, positivity-certify, "
                 "trace-constant, flatness-scan, convergence-sweep)");
  app.add_option("--out", out_override, "override run.out report directory");
  app.add_option("--seed", seed_override, "override run.seed");
  app.add_flag("-q,--quiet", quiet, "suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const diblab::ConfigFile file = diblab::ConfigFile::parse_file(config_path);
    diblab::RunConfig cfg = diblab::run_config_from(file);
    if (!task_override.empty()) cfg.task = diblab::task_from_name(task_override);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<unsigned>(seed_override);

    const diblab::RunReport rep = diblab::run_task(cfg);
    diblab::write_report(rep, cfg.out_dir);
    if (!quiet) std::fputs(rep.summary.c_str(), stdout);
    return diblab::exit_code_for(rep);
  } catch (const diblab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const diblab::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
