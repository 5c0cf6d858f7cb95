// Command-line front end; all work goes through the C API in slowfast.h.

#include <cstdio>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "slowfast.h"

int main(int argc, char** argv) {
  CLI::App app{
      "Slow-fast Hamiltonian laboratory: slow-manifold analysis, singular-"
      "curve tracing, isoenergetic reduction, and Painleve limit checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sf_version());

  std::string config;
  std::string out_dir = ".";
  unsigned long long seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "Locate and classify a slow-manifold point"},
      {"integrate", "Integrate the full system with the implicit midpoint rule"},
      {"trace-singular", "Continue the singular curve from a seed point"},
      {"reduce", "Limit-system coefficients from the isoenergetic reduction"},
      {"painleve", "Affine scalings onto the standard Painleve forms"},
      {"verify-fold", "Convergence study against the Painleve-I fold limit"},
      {"verify-cusp", "Convergence study against the Painleve-II cusp limit"},
      {"form-check", "Slow two-form determinant certificates at a point"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Run configuration file")->required();
    sub->add_option("-o,--out", out_dir, "Output directory (default: .)");
    sub->add_option("--seed", seed, "Seed for randomized diagnostics");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;  // usage errors share the config-error exit code
  }

  const std::string& command = app.get_subcommands().front()->get_name();
  int exit_code = 0;
  sf_status status = sf_run(command.c_str(), config.c_str(), out_dir.c_str(),
                            seed, &exit_code);
  if (status != SF_OK) std::fprintf(stderr, "slowfast: %s\n", sf_last_error());
  return exit_code;
}
