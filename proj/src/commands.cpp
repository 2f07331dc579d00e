#include "bns/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "bns/black_scholes.hpp"
#include "bns/ipde_solver.hpp"
#include "bns/mc_oracle.hpp"
#include "bns/verify.hpp"

namespace bns {

namespace {

constexpr std::uint64_t kSimulateStream = 20;

std::string output_path(const RunConfig& c, const std::string& file) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / file).string();
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12);
  return out;
}

GridSpec full_spec(const RunConfig& c) {
  GridSpec s = c.grid;
  s.delta = 0.0;
  return s;
}

void write_mc_row(std::ostream& out, const char* method, const McEstimate& e, std::uint64_t seed) {
  out << method << ',' << e.value << ',' << e.std_error << ',' << e.n_paths << ','
      << e.n_exercise_dates << ',' << seed << ',' << e.wall_ms << '\n';
}

}  // namespace

std::optional<double> closed_form_reference(const RunConfig& c, const Probe& p) {
  if (!c.kernel.is_null() || c.solver.american || c.payoff.kind() != PayoffKind::kPut || p.t != 0.0) {
    return std::nullopt;
  }
  const BnsModel m = c.model();
  return black_scholes_put(std::exp(p.x), c.payoff.strike(), c.params.r, c.params.T,
                           p.v * m.eps(c.params.T));
}

std::vector<ProbeValue> cmd_price(const RunConfig& c, std::ostream& log) {
  const BnsModel model = c.model();
  const Grid grid = make_grid(full_spec(c), model, c.payoff, c.x0, c.v0);
  std::vector<std::pair<std::string, ValueSurface>> surfaces;
  surfaces.emplace_back("full", solve(grid, model, c.payoff, c.solver));
  if (c.grid.delta > 0.0) {
    surfaces.emplace_back("localized", solve_localized(grid, c.grid.delta, model, c.payoff, c.solver));
  }

  std::vector<ProbeValue> values;
  std::ofstream probes = open_csv(output_path(c, "probes.csv"));
  probes << "method,x,v,t,value,obstacle,outside\n";
  for (const auto& [method, u] : surfaces) {
    const std::string file = method == "full" ? "surface.csv" : "surface_localized.csv";
    write_surface_csv(u, output_path(c, file), c.surface_stride);
    log << method << ": " << grid.nx() << "x" << u.grid().nv() << "x" << grid.nt() << " in "
        << u.diagnostics.runtime_ms << " ms, extrapolated mass " << u.diagnostics.extrapolated_mass_fraction
        << "\n";
    if (u.diagnostics.extrapolated_mass_fraction > c.verify.mass_warning) {
      log << "warning: jump mass above v_max is " << u.diagnostics.extrapolated_mass_fraction
          << "; enlarge grid.v_max\n";
    }
    for (const Probe& p : c.probe_points()) {
      ProbeValue pv;
      pv.probe = p;
      pv.value = u.value(p.x, p.v, p.t, &pv.outside);
      pv.obstacle = c.payoff(p.x);
      probes << method << ',' << p.x << ',' << p.v << ',' << p.t << ',' << pv.value << ','
             << pv.obstacle << ',' << (pv.outside ? 1 : 0) << '\n';
      log << "  u(" << p.x << ", " << p.v << ", " << p.t << ") = " << pv.value << "\n";
      if (method == "full") values.push_back(pv);
    }
  }

  if (c.price_mc) {
    std::ofstream mc = open_csv(output_path(c, "mc.csv"));
    mc << "method,value,std_error,n_paths,n_dates,seed,wall_time\n";
    const McEstimate eu = price_european(model, c.payoff, c.x0, c.v0, c.mc);
    write_mc_row(mc, "european", eu, c.mc.seed);
    log << "  mc european " << eu.value << " +- " << eu.std_error << "\n";
    if (c.solver.american) {
      const AmericanResult am = price_american(model, c.payoff, c.x0, c.v0, c.mc);
      write_mc_row(mc, "lsmc", am.estimate, c.mc.seed);
      write_mc_row(mc, "lsmc_in_sample", am.in_sample, c.mc.seed);
      log << "  mc american " << am.estimate.value << " +- " << am.estimate.std_error << "\n";
    }
  }
  return values;
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  const BnsModel model = c.model();
  std::vector<double> times(c.simulate.times + 1);
  for (std::size_t k = 0; k <= c.simulate.times; ++k) {
    times[k] = c.simulate.times == 0 ? 0.0 : c.params.T * static_cast<double>(k) / static_cast<double>(c.simulate.times);
  }
  std::ofstream out = open_csv(output_path(c, "paths.csv"));
  out << std::setprecision(17);
  out << "path_id,t,V,V_star,X,Z_cum\n";
  for (std::size_t p = 0; p < c.simulate.paths; ++p) {
    Rng rng = make_stream(c.mc.seed, kSimulateStream, p);
    const PathSample s = simulate_path(model, c.x0, c.v0, times, rng);
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      out << p << ',' << s.t[k] << ',' << s.v[k] << ',' << s.v_star[k] << ',' << s.x[k] << ','
          << s.z_cum[k] << '\n';
    }
  }
  log << c.simulate.paths << " paths x " << times.size() << " times\n";
}

std::vector<ConvergeRow> cmd_converge(const RunConfig& c, std::ostream& log) {
  const BnsModel model = c.model();
  const Probe probe = c.probe_points().front();
  const std::optional<double> reference = c.grid.delta > 0.0 ? std::nullopt : closed_form_reference(c, probe);
  std::vector<ConvergeRow> rows;
  for (std::size_t k = 0; k < c.converge.rungs; ++k) {
    const std::size_t scale = std::size_t{1} << k;
    GridSpec spec = full_spec(c);
    spec.nx = (c.converge.nx - 1) * scale + 1;
    spec.nv = (c.converge.nv - 1) * scale + 1;
    spec.nt = c.converge.nt * scale;
    const Grid grid = make_grid(spec, model, c.payoff, c.x0, c.v0);
    const auto start = std::chrono::steady_clock::now();
    const ValueSurface u = c.grid.delta > 0.0 ? solve_localized(grid, c.grid.delta, model, c.payoff, c.solver)
                                              : solve(grid, model, c.payoff, c.solver);
    ConvergeRow row;
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    row.nx = spec.nx;
    row.nv = u.grid().nv();
    row.nt = spec.nt;
    row.value = u.value(probe.x, probe.v, probe.t);
    if (reference) {
      row.error = std::abs(row.value - *reference);
      if (!rows.empty() && *row.error > 0.0) row.order = std::log2(*rows.back().error / *row.error);
    } else if (rows.size() >= 2) {
      const double d1 = std::abs(rows[rows.size() - 1].value - rows[rows.size() - 2].value);
      const double d2 = std::abs(row.value - rows.back().value);
      if (d1 > 0.0 && d2 > 0.0) row.order = std::log2(d1 / d2);
    }
    log << row.nx << "x" << row.nv << "x" << row.nt << ": " << row.value << " (" << row.runtime_ms << " ms)\n";
    rows.push_back(row);
  }
  std::ofstream out = open_csv(output_path(c, "converge.csv"));
  out << "N_x,N_v,N_t,value_at_probe,runtime_ms,error,observed_order\n";
  for (const ConvergeRow& r : rows) {
    out << r.nx << ',' << r.nv << ',' << r.nt << ',' << r.value << ',' << r.runtime_ms << ',';
    if (r.error) out << *r.error;
    out << ',';
    if (r.order) out << *r.order;
    out << '\n';
  }
  return rows;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const std::vector<CheckReport> reports = run_suite(c.suite());
  write_suite_csv(reports, output_path(c, "suite.csv"));
  for (const CheckReport& r : reports) {
    log << std::left << std::setw(22) << r.name << std::setw(5) << to_string(r.status) << " measured "
        << r.measured << " bound " << r.bound << " budget " << r.budget.total() << "  " << r.detail
        << "\n";
  }
  return all_passed(reports) ? kExitOk : kExitVerifyFailed;
}

}  // namespace bns
