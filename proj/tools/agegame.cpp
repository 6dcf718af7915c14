// agegame: analytic tables, Monte Carlo ages, equilibria and the server's
// optimal sampling rate for gossip subscription games.
//
// Usage:
//   agegame analyze    --config run.cfg
//   agegame simulate   --config run.cfg --seed 7 --output ages.csv
//   agegame equilibria --config run.cfg --format json
//   agegame optimize   --config run.cfg
//   agegame sweep      --config run.cfg
//
// Exit codes: 0 success, 2 config error, 3 infeasible or divergent result,
// 4 enumeration cap exceeded.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "agegame/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace agegame::cli;

  CLI::App app{"Version-age gossip subscription games"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> format;

  for (const char* name : {"analyze", "simulate", "equilibria", "optimize", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (key = value)")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--output", output, "output path, overrides the config");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Outcome out;
  RunConfig cfg;
  try {
    auto kv = KeyValues::load(config_path);
    if (seed) kv.set("seed", std::to_string(*seed));
    if (output) kv.set("output.path", *output);
    if (format) kv.set("output.format", *format);
    cfg = build_run_config(kv);
    out = run_command(command, cfg);
  } catch (const agegame::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const agegame::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const agegame::CapExceeded& e) {
    std::cerr << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto text = render(command, out, cfg.format);
  if (cfg.output_path) {
    std::ofstream f(*cfg.output_path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write '" << *cfg.output_path << "'\n";
      return kExitConfig;
    }
    f << text;
  } else {
    std::cout << text;
  }
  for (const auto& note : out.notes) std::cerr << note << "\n";
  return out.exit_code;
}
