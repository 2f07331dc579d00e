#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bns/config.hpp"

namespace bns {

enum ExitCode { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

struct ProbeValue {
  Probe probe;
  double value = 0.0;
  double obstacle = 0.0;
  bool outside = false;
};

/// Solves on the configured grid (on {v >= delta} when grid.delta > 0) and
/// writes surface.csv and probes.csv; with mc.in_price also mc.csv.
std::vector<ProbeValue> cmd_price(const RunConfig& config, std::ostream& log);

/// paths.csv: path_id, t, V, V_star, X, Z_cum on simulate.times + 1 uniform times.
void cmd_simulate(const RunConfig& config, std::ostream& log);

struct ConvergeRow {
  std::size_t nx = 0;
  std::size_t nv = 0;
  std::size_t nt = 0;
  double value = 0.0;
  double runtime_ms = 0.0;
  // log2 of the ratio of successive increments (or errors against the
  // closed form when one exists); absent on the first rungs.
  std::optional<double> order;
  std::optional<double> error;
};

/// converge.csv: N_x, N_v, N_t, value_at_probe, runtime_ms, error, observed_order.
std::vector<ConvergeRow> cmd_converge(const RunConfig& config, std::ostream& log);

/// suite.csv; returns kExitOk iff no check failed.
int cmd_verify(const RunConfig& config, std::ostream& log);

/// Black-Scholes value for a Null kernel European put probe at t = 0, if applicable.
std::optional<double> closed_form_reference(const RunConfig& config, const Probe& probe);

}  // namespace bns
