#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bns/bns_dynamics.hpp"
#include "bns/grid.hpp"
#include "bns/ipde_solver.hpp"
#include "bns/mc_oracle.hpp"
#include "bns/payoff.hpp"
#include "bns/verify.hpp"

namespace bns {

struct SimulateSettings {
  std::size_t paths = 10;
  std::size_t times = 100;
};

/// Grid ladder: rung k has (n - 1) 2^k + 1 nodes in x and v and nt 2^k steps.
struct ConvergeSettings {
  std::size_t rungs = 3;
  std::size_t nx = 51;
  std::size_t nv = 26;
  std::size_t nt = 50;
};

struct RunConfig {
  LevyKernel kernel = LevyKernel::null();
  double tilt_gamma = 0.0;
  ModelParams params;
  double x0 = 0.0;
  double v0 = 0.04;
  Payoff payoff = Payoff::put(1.0);
  GridSpec grid;
  SolverOptions solver;
  McOptions mc;
  // Price also runs the Monte Carlo estimators.
  bool price_mc = false;
  std::vector<Probe> probes;
  SimulateSettings simulate;
  ConvergeSettings converge;
  SuiteSettings verify;
  std::string out_dir = ".";
  std::size_t surface_stride = 10;
  unsigned threads = 1;

  EmmTilt tilt() const;
  BnsModel model() const;
  /// Probes, or the single point (x0, v0, 0) when none are configured.
  std::vector<Probe> probe_points() const;
  SuiteSettings suite() const;
};

/// INI text with sections kernel, model, payoff, grid, solver, mc, probe,
/// simulate, converge, verify, output, runtime. Throws ConfigError on unknown
/// sections or keys, missing required keys, malformed values and any
/// parameter the model components reject.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace bns
