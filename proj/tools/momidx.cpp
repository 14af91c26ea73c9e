// momidx <command> --config <file|-> [--out dir] [--max-order N] [--seed S]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "momidx/errors.hpp"
#include "momidx/job.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Matrix indexes of moment matrices: Szego, density and bounded point evaluation tests"};
  app.set_version_flag("--version", momidx::kToolVersion);

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::size_t max_order = 0;
  std::uint64_t seed = 0;

  app.add_option("command", command, "indexes, szego, density, bpe, map, transform or moments")
      ->required()
      ->check(CLI::IsMember({"indexes", "szego", "density", "bpe", "map", "transform", "moments"}));
  app.add_option("--config", config_path, "JSON job config, or - for stdin")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir; default .)");
  auto* max_opt = app.add_option("--max-order", max_order, "cap on the section order")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized spot checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  momidx::Report report;
  std::string dir = out_dir;
  try {
    momidx::JobConfig config = momidx::load_config(config_path);
    if (momidx::to_string(config.command) != command)
      throw momidx::ConfigError("command", "config is for '" + momidx::to_string(config.command) +
                                               "' but the command line asks for '" + command + "'");
    if (dir.empty()) dir = config.output_dir.empty() ? "." : config.output_dir;
    momidx::RunOptions options;
    if (*max_opt) options.max_order = max_order;
    options.seed = seed;
    report = momidx::run(config, options);
  } catch (const momidx::Error& e) {
    report = momidx::error_report(command, e);
  }
  if (dir.empty()) dir = ".";

  try {
    momidx::write_report(report, dir);
  } catch (const std::exception& e) {
    std::cerr << "momidx: " << e.what() << '\n';
    return 1;
  }

  const auto& error = report.document["error"];
  if (!error.is_null()) std::cerr << "momidx: " << error["message"].get<std::string>() << '\n';
  for (const auto& w : report.document["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
  for (const auto& v : report.document["verdicts"])
    std::cout << v["question"].get<std::string>() << ": " << v["answer"].get<std::string>() << '\n';
  std::cout << "report: " << (std::filesystem::path(dir) / "report.json").string() << '\n';
  return report.exit_code;
}
