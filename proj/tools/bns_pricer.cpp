#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bns/commands.hpp"
#include "bns/config.hpp"
#include "bns/errors.hpp"

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

bns::RunConfig load(const Args& a) {
  bns::RunConfig c = bns::load_config(a.config);
  if (a.seed) c.mc.seed = *a.seed;
  if (a.out) c.out_dir = *a.out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"American option pricer for the BNS stochastic volatility model"};
  app.require_subcommand(1);
  Args args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config, "INI config file")->required();
    cmd->add_option("--seed", args.seed, "overrides mc.seed");
    cmd->add_option("--out", args.out, "output directory, overrides output.dir");
  };
  CLI::App* price = app.add_subcommand("price", "solve the IPDE and write surface and probe CSV");
  CLI::App* simulate = app.add_subcommand("simulate", "dump simulated paths as CSV");
  CLI::App* converge = app.add_subcommand("converge", "probe value over a grid ladder");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  for (CLI::App* cmd : {price, simulate, converge, verify}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bns::kExitConfig;
  }

  try {
    const bns::RunConfig c = load(args);
    if (price->parsed()) {
      bns::cmd_price(c, std::cout);
    } else if (simulate->parsed()) {
      bns::cmd_simulate(c, std::cout);
    } else if (converge->parsed()) {
      bns::cmd_converge(c, std::cout);
    } else {
      return bns::cmd_verify(c, std::cout);
    }
  } catch (const bns::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bns::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return bns::kExitNumerical;
  }
  return bns::kExitOk;
}
