#include "bns/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bns/errors.hpp"

namespace bns {

namespace {

namespace pt = boost::property_tree;

// One INI section; remembers which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }
  bool has(const std::string& key) {
    used_.insert(key);
    return tree_ != nullptr && tree_->find(key) != tree_->not_found();
  }

  std::string text(const std::string& key) {
    if (!has(key)) throw ConfigError("missing key " + qualified(key));
    return boost::algorithm::trim_copy(tree_->get<std::string>(key));
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
  }

  double number(const std::string& key) { return to_double(key, text(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const std::string s = text(key);
    std::size_t pos = 0;
    long long n = 0;
    try {
      n = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || n < 0) throw ConfigError(qualified(key) + " must be a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(n);
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string s = boost::algorithm::to_lower_copy(text(key));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(qualified(key) + " must be true or false, got '" + s + "'");
  }

  std::vector<double> list(const std::string& key) {
    std::vector<std::string> parts;
    const std::string s = text(key);
    boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
    std::vector<double> out;
    for (std::string& p : parts) {
      boost::algorithm::trim(p);
      if (!p.empty()) out.push_back(to_double(key, p));
    }
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) throw ConfigError("unknown key " + qualified(key));
    }
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  double to_double(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw ConfigError(qualified(key) + " is not a number: '" + s + "'");
    return x;
  }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

LevyKernel read_kernel(Section& s) {
  const std::string kind = boost::algorithm::to_lower_copy(s.text("kind"));
  if (kind == "null") return LevyKernel::null();
  if (kind == "gamma" || kind == "gamma_ou") return LevyKernel::gamma_ou(s.number("a"), s.number("b"));
  if (kind == "ig" || kind == "inverse_gaussian" || kind == "inverse_gaussian_ou") {
    return LevyKernel::inverse_gaussian_ou(s.number("a"), s.number("b"));
  }
  throw ConfigError("kernel.kind must be null, gamma or ig, got '" + kind + "'");
}

Payoff read_payoff(Section& s) {
  const std::string kind = boost::algorithm::to_lower_copy(s.text("kind", "put"));
  if (kind == "put") return Payoff::put(s.number("strike"));
  if (kind == "capped_call") return Payoff::capped_call(s.number("strike"), s.number("cap"));
  if (kind == "call") return Payoff::call(s.number("strike"), s.flag("allow_non_lipschitz", false));
  if (kind == "constant") return Payoff::constant(s.number("value"));
  if (kind == "tabulated") return Payoff::tabulated(s.list("xs"), s.list("hs"));
  throw ConfigError("payoff.kind must be put, capped_call, call, constant or tabulated, got '" + kind + "'");
}

VAdvection read_v_advection(Section& s) {
  const std::string v = boost::algorithm::to_lower_copy(s.text("v_advection", "auto"));
  if (v == "auto") return VAdvection::kAuto;
  if (v == "first_order") return VAdvection::kFirstOrder;
  if (v == "second_order") return VAdvection::kSecondOrder;
  throw ConfigError("solver.v_advection must be auto, first_order or second_order, got '" + v + "'");
}

ObstacleMethod read_obstacle(Section& s) {
  const std::string m = boost::algorithm::to_lower_copy(s.text("obstacle", "penalty"));
  if (m == "penalty") return ObstacleMethod::kPenalty;
  if (m == "psor" || m == "projected_sor") return ObstacleMethod::kProjectedSor;
  throw ConfigError("solver.obstacle must be penalty or psor, got '" + m + "'");
}

std::vector<Probe> read_probes(Section& s) {
  if (!s.present()) return {};
  const std::vector<double> xs = s.list("x");
  const std::vector<double> vs = s.list("v");
  const std::vector<double> ts = s.has("t") ? s.list("t") : std::vector<double>{0.0};
  const std::size_t n = std::max({xs.size(), vs.size(), ts.size()});
  auto pick = [&](const std::vector<double>& a, const char* key, std::size_t k) {
    if (a.size() == 1) return a[0];
    if (a.size() != n) throw ConfigError(s.qualified(key) + " must have 1 or " + std::to_string(n) + " entries");
    return a[k];
  };
  std::vector<Probe> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back({pick(xs, "x", k), pick(vs, "v", k), pick(ts, "t", k)});
  return out;
}

RunConfig build(const pt::ptree& tree) {
  static const std::vector<std::string> kSections{"kernel", "model", "payoff",  "grid",   "solver", "mc",
                                                  "probe",  "simulate", "converge", "verify", "output", "runtime"};
  std::map<std::string, Section> sections;
  for (const std::string& name : kSections) {
    const auto it = tree.find(name);
    sections.emplace(name, Section(name, it == tree.not_found() ? nullptr : &it->second));
  }
  for (const auto& [name, child] : tree) {
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (!child.data().empty()) throw ConfigError("key " + name + " outside a section");
  }

  RunConfig c;
  Section& kernel = sections.at("kernel");
  c.kernel = read_kernel(kernel);

  Section& model = sections.at("model");
  c.params.lambda = model.number("lambda", c.params.lambda);
  c.params.rho = model.number("rho", c.params.rho);
  c.params.r = model.number("r", c.params.r);
  c.params.T = model.number("T", c.params.T);
  c.params.mu = model.number("mu", c.params.mu);
  c.params.beta = model.number("beta", c.params.beta);
  c.tilt_gamma = model.number("tilt_gamma", 0.0);
  c.x0 = model.number("x0", c.x0);
  c.v0 = model.number("v0", c.v0);

  Section& payoff = sections.at("payoff");
  c.payoff = read_payoff(payoff);

  Section& grid = sections.at("grid");
  c.grid.nx = grid.count("nx", c.grid.nx);
  c.grid.nv = grid.count("nv", c.grid.nv);
  c.grid.nt = grid.count("nt", c.grid.nt);
  c.grid.x_min = grid.number("x_min", c.grid.x_min);
  c.grid.x_max = grid.number("x_max", c.grid.x_max);
  c.grid.v_max = grid.number("v_max", c.grid.v_max);
  c.grid.v_stretch = grid.number("v_stretch", c.grid.v_stretch);
  c.grid.delta = grid.number("delta", c.grid.delta);
  c.grid.width_sd = grid.number("width_sd", c.grid.width_sd);

  Section& solver = sections.at("solver");
  c.solver.american = solver.flag("american", true);
  c.solver.obstacle = read_obstacle(solver);
  c.solver.penalty_scale = solver.number("penalty_scale", c.solver.penalty_scale);
  c.solver.penalty_tolerance = solver.number("penalty_tolerance", c.solver.penalty_tolerance);
  c.solver.theta = solver.number("theta", c.solver.theta);
  c.solver.rannacher_steps = static_cast<int>(solver.count("rannacher_steps", c.solver.rannacher_steps));
  c.solver.v_advection = read_v_advection(solver);
  c.solver.quadrature.xi = solver.number("xi", c.solver.quadrature.xi);

  Section& mc = sections.at("mc");
  c.mc.n_paths = mc.count("paths", c.mc.n_paths);
  c.mc.n_dates = mc.count("dates", c.mc.n_dates);
  c.mc.seed = mc.count("seed", c.mc.seed);
  c.mc.control_variate = mc.flag("control_variate", c.mc.control_variate);
  c.mc.basis.x_degree = static_cast<int>(mc.count("x_degree", c.mc.basis.x_degree));
  c.mc.basis.v_squared = mc.flag("v_squared", c.mc.basis.v_squared);
  c.mc.basis.itm_only = mc.flag("itm_only", c.mc.basis.itm_only);
  c.price_mc = mc.flag("in_price", false);

  c.probes = read_probes(sections.at("probe"));

  Section& sim = sections.at("simulate");
  c.simulate.paths = sim.count("paths", c.simulate.paths);
  c.simulate.times = sim.count("times", c.simulate.times);

  Section& conv = sections.at("converge");
  c.converge.rungs = conv.count("rungs", c.converge.rungs);
  c.converge.nx = conv.count("nx", c.converge.nx);
  c.converge.nv = conv.count("nv", c.converge.nv);
  c.converge.nt = conv.count("nt", c.converge.nt);

  Section& ver = sections.at("verify");
  SuiteSettings& v = c.verify;
  v.comparison_epsilon = ver.number("comparison_epsilon", v.comparison_epsilon);
  if (ver.has("deltas")) v.deltas = ver.list("deltas");
  v.dpp_epsilon = ver.number("dpp_epsilon", v.dpp_epsilon);
  v.dpp_paths = ver.count("dpp_paths", v.dpp_paths);
  v.closed_form_nv = ver.count("closed_form_nv", v.closed_form_nv);
  v.closed_form_paths = ver.count("closed_form_paths", v.closed_form_paths);
  v.martingale_paths = ver.count("martingale_paths", v.martingale_paths);
  v.identity_paths = ver.count("identity_paths", v.identity_paths);
  v.identity_times = ver.count("identity_times", v.identity_times);
  v.cumulant_draws = ver.count("cumulant_draws", v.cumulant_draws);
  if (ver.has("cumulant_thetas")) v.cumulant_thetas = ver.list("cumulant_thetas");
  v.lipschitz_stability = ver.number("lipschitz_stability", v.lipschitz_stability);
  v.mass_warning = ver.number("mass_warning", v.mass_warning);

  Section& out = sections.at("output");
  c.out_dir = out.text("dir", c.out_dir);
  c.surface_stride = out.count("surface_stride", c.surface_stride);

  Section& rt = sections.at("runtime");
  c.threads = static_cast<unsigned>(rt.count("threads", c.threads));
  c.solver.threads = c.threads;
  c.mc.threads = c.threads;
  c.verify.threads = c.threads;

  for (const auto& [name, s] : sections) s.reject_unknown();

  // Component invariants, re-checked at load.
  c.mc.basis.validate();
  const BnsModel m = c.model();
  const Grid g = make_grid(c.grid, m, c.payoff, c.x0, c.v0);
  g.validate();
  if (!(c.v0 >= 0.0)) throw std::invalid_argument("model.v0 must be >= 0");
  if (c.mc.n_dates == 0) throw std::invalid_argument("mc.dates must be >= 1");
  if (c.surface_stride == 0) throw std::invalid_argument("output.surface_stride must be >= 1");
  if (c.converge.rungs == 0) throw std::invalid_argument("converge.rungs must be >= 1");
  if (!(c.solver.theta >= 0.5 && c.solver.theta <= 1.0)) throw std::invalid_argument("solver.theta must lie in [0.5, 1]");
  for (const Probe& p : c.probe_points()) {
    if (!(p.t >= 0.0 && p.t < c.params.T)) throw std::invalid_argument("probe.t must lie in [0, T)");
  }
  return c;
}

}  // namespace

EmmTilt RunConfig::tilt() const {
  return tilt_gamma > 0.0 ? EmmTilt::exponential(tilt_gamma) : EmmTilt::identity();
}

BnsModel RunConfig::model() const { return BnsModel(params, kernel, tilt()); }

std::vector<Probe> RunConfig::probe_points() const {
  if (!probes.empty()) return probes;
  return {{x0, v0, 0.0}};
}

SuiteSettings RunConfig::suite() const {
  SuiteSettings s = verify;
  s.params = params;
  s.kernel = kernel;
  s.tilt = tilt();
  s.payoff = payoff;
  s.x0 = x0;
  s.v0 = v0;
  s.grid = grid;
  s.solver = solver;
  s.mc = mc;
  s.probes = probe_points();
  s.threads = threads;
  return s;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  try {
    return build(tree);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace bns
