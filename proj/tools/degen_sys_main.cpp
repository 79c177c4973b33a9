#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "degensys/experiment.hpp"
#include "degensys/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"degen-sys: solver and estimate auditor for a coupled degenerate elliptic system"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  const auto add_workflow = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    return sub;
  };
  add_workflow("solve", "single coupled solve with automatic truncation levels");
  add_workflow("ladder", "bounded-data approximation ladder with per-rung audits");
  add_workflow("audit", "ladder plus the full estimate battery and flux table");
  add_workflow("mms", "manufactured-solution convergence studies");
  CLI::App* version = app.add_subcommand("version", "print version and convention fingerprint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (version->parsed()) {
    std::cout << degensys::version_string() << "\n";
    return 0;
  }
  return degensys::run_experiment_file(app.get_subcommands().front()->get_name(), config_path,
                                       out_dir);
}
