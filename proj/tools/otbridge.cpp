// otbridge: reflected-kernel entropic transport workbench.
//
// Subcommands: kernel-table, ceta-convergence, solve, ldp-check, simulate,
// bounds.  Every run is a pure function of config + flags (flags win), so
// re-running a command reproduces its output files byte for byte.
// Exit codes: 0 success (warnings allowed), 1 config error, 2 numerical
// failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otb/domain.hpp"
#include "otb/eot.hpp"
#include "otb/errors.hpp"
#include "otb/io.hpp"
#include "otb/kernels.hpp"
#include "otb/ldp.hpp"
#include "otb/measure.hpp"
#include "otb/numerics.hpp"
#include "otb/skorokhod.hpp"
#include "otb/stats.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw otb::ConfigError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw otb::ConfigError("invalid JSON in " + path + ": " + std::string(e.what()));
  }
}

double get_number(const json& j, const std::string& key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number())
    throw otb::ConfigError("config field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

long get_integer(const json& j, const std::string& key, long def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number_integer())
    throw otb::ConfigError("config field '" + key + "' must be an integer");
  return j.at(key).get<long>();
}

bool get_bool(const json& j, const std::string& key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean())
    throw otb::ConfigError("config field '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& key,
                       const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string())
    throw otb::ConfigError("config field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::uint64_t get_seed(const json& j) {
  if (!j.contains("seed")) return 0;
  if (!j.at("seed").is_number_unsigned())
    throw otb::ConfigError("config field 'seed' must be a nonnegative integer");
  return j.at("seed").get<std::uint64_t>();
}

std::vector<double> get_number_list(const json& j, const std::string& key,
                                    std::vector<double> def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_array())
    throw otb::ConfigError("config field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw otb::ConfigError("config field '" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require_descending(const std::vector<double>& etas, const std::string& who) {
  if (etas.empty()) throw otb::ConfigError(who + ": eta ladder is empty");
  for (double e : etas)
    if (!(e > 0.0)) throw otb::ConfigError(who + ": eta values must be positive");
  for (std::size_t k = 1; k < etas.size(); ++k)
    if (!(etas[k] < etas[k - 1]))
      throw otb::ConfigError(who + ": eta ladder must be strictly decreasing");
}

std::optional<otb::Domain> parse_domain(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return otb::Domain::from_json(cfg.at(key));
}

otb::DiscreteMeasure parse_measure(const json& cfg, const std::string& key) {
  if (!cfg.contains(key))
    throw otb::ConfigError("config field '" + key + "' (marginal) is required");
  const auto& v = cfg.at(key);
  if (v.is_string()) return otb::DiscreteMeasure::from_json(load_json_file(v.get<std::string>()));
  return otb::DiscreteMeasure::from_json(v);
}

// Cost provider: either the plain quadratic cost (eta-independent) or a
// kernel cost family on a domain.
struct CostProvider {
  std::string kind = "quadratic";  // quadratic | free | box | half_line
  std::optional<otb::CostFamily> fam;

  otb::CostMatrix at(double eta, const otb::DiscreteMeasure& mu,
                     const otb::DiscreteMeasure& nu) const {
    if (kind == "quadratic") return otb::quadratic_cost(mu, nu);
    return otb::build_cost(*fam, eta, mu, nu);
  }
};

CostProvider parse_family(const json& cfg, const std::string& key, int dim) {
  CostProvider cp;
  if (!cfg.contains(key)) return cp;
  const auto& v = cfg.at(key);
  if (!v.is_object())
    throw otb::ConfigError("config field '" + key + "' must be an object");
  std::string kind = get_string(v, "kind", "quadratic");
  if (kind == "interval") kind = "box";
  if (kind == "quadratic") return cp;
  cp.kind = kind;
  otb::CostFamily fam;
  fam.free_dim = dim;
  fam.series_tol = get_number(v, "series_tol", 1e-14);
  if (kind == "free") {
    cp.fam = fam;
    return cp;
  }
  if (kind != "box" && kind != "half_line")
    throw otb::ConfigError("config field '" + key +
                           ".kind' must be one of quadratic, free, box, half_line");
  auto dom = parse_domain(v, "domain");
  if (!dom)
    throw otb::ConfigError("config field '" + key + ".domain' is required for kernel costs");
  if (dom->dim() != dim)
    throw otb::ConfigError("config field '" + key + ".domain' dimension mismatch");
  fam.dom = std::move(dom);
  cp.fam = fam;
  return cp;
}

std::vector<otb::Coupling> ladder_solve(const otb::DiscreteMeasure& mu,
                                        const otb::DiscreteMeasure& nu,
                                        const CostProvider& cp,
                                        const std::vector<double>& etas,
                                        const otb::SinkhornOptions& base) {
  otb::SinkhornOptions opt = base;
  std::vector<otb::Coupling> out;
  for (double eta : etas) {
    const otb::CostMatrix c = cp.at(eta, mu, nu);
    otb::Coupling cpl = otb::sinkhorn(mu, nu, c, eta, opt);
    opt.u0 = cpl.u;
    opt.v0 = cpl.v;
    out.push_back(std::move(cpl));
  }
  return out;
}

std::string point_str(const otb::Mat& pts, int row) {
  std::string s = otb::fmt17(pts(row, 0));
  for (int c = 1; c < pts.cols(); ++c) s += ";" + otb::fmt17(pts(row, c));
  return s;
}

void write_json_file(const std::string& path, const json& j) {
  otb::write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- commands

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::vector<double> ladder;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_ladder = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file");
  c.o_out = sub->add_option("--out", c.out, "output directory");
  c.o_seed = sub->add_option("--seed", c.seed, "RNG seed (overrides config)");
  c.o_ladder = sub->add_option("--eta-ladder", c.ladder,
                               "comma-separated eta values (overrides config)")
                   ->delimiter(',');
}

json load_cfg(const Common& c) {
  json cfg = c.config.empty() ? json::object() : load_json_file(c.config);
  get_seed(cfg);  // reject malformed seeds uniformly, even where unused
  return cfg;
}

fs::path out_dir(const Common& c, const json& cfg) {
  const std::string dir =
      c.o_out->count() ? c.out : get_string(cfg, "out", ".");
  fs::create_directories(dir);
  return fs::path(dir);
}

std::vector<double> pick_ladder(const Common& c, const json& cfg,
                                std::vector<double> def, const std::string& who) {
  std::vector<double> etas = c.o_ladder->count()
                                 ? c.ladder
                                 : get_number_list(cfg, "etas", std::move(def));
  require_descending(etas, who);
  return etas;
}

int run_kernel_table(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  const double eta = get_number(cfg, "eta", 1.0);
  const double t = get_number(cfg, "t", 1.0);
  const long grid_n = get_integer(cfg, "grid_n", 101);
  if (grid_n < 2 || grid_n > 2001)
    throw otb::ConfigError("config field 'grid_n' must be in [2, 2001]");
  otb::KernelSpec spec;
  spec.dom = parse_domain(cfg, "domain");
  spec.free_dim = 1;
  spec.eta = eta;
  spec.series_tol = get_number(cfg, "series_tol", 1e-14);
  if (spec.dom && spec.dom->dim() != 1)
    throw otb::ConfigError("kernel-table supports one-dimensional domains only");

  double lo = -3.0, hi = 3.0;
  if (spec.dom && spec.dom->kind() == otb::DomainKind::box) {
    lo = spec.dom->lower()[0];
    hi = spec.dom->upper()[0];
  } else if (spec.dom && spec.dom->kind() == otb::DomainKind::half_line) {
    lo = 0.0;
    hi = 3.0;
  }
  const auto range = get_number_list(cfg, "range", {lo, hi});
  if (range.size() != 2 || !(range[1] > range[0]))
    throw otb::ConfigError("config field 'range' must be [lo, hi] with lo < hi");

  const std::vector<double> grid =
      otb::linspace(range[0], range[1], static_cast<int>(grid_n));
  otb::CsvWriter csv((out / "kernel_table.csv").string(), {"x", "y", "density"});
  otb::Vec x(1), y(1);
  for (double gx : grid)
    for (double gy : grid) {
      x[0] = gx;
      y[0] = gy;
      csv.row({otb::fmt17(gx), otb::fmt17(gy), otb::fmt17(spec.density(t, x, y))});
    }
  csv.close();
  return 0;
}

int run_ceta_convergence(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  const auto etas = pick_ladder(c, cfg, {0.2, 0.1, 0.05, 0.02, 0.01}, "ceta-convergence");
  const long grid_n = get_integer(cfg, "grid_n", 201);
  if (grid_n < 2 || grid_n > 2001)
    throw otb::ConfigError("config field 'grid_n' must be in [2, 2001]");
  const double slice_x = get_number(cfg, "slice_x", 0.3);

  otb::CostFamily fam;
  fam.free_dim = 1;
  fam.series_tol = get_number(cfg, "series_tol", 1e-14);
  double lo = 0.0, hi = 1.0;
  if (cfg.contains("domain") && !cfg.at("domain").is_null()) {
    otb::Domain dom = otb::Domain::from_json(cfg.at("domain"));
    if (dom.kind() != otb::DomainKind::box || dom.dim() != 1)
      throw otb::ConfigError("ceta-convergence needs a one-dimensional box domain");
    lo = dom.lower()[0];
    hi = dom.upper()[0];
    fam.dom = std::move(dom);
  } else if (get_bool(cfg, "free", false)) {
    const auto range = get_number_list(cfg, "range", {0.0, 1.0});
    if (range.size() != 2 || !(range[1] > range[0]))
      throw otb::ConfigError("config field 'range' must be [lo, hi] with lo < hi");
    lo = range[0];
    hi = range[1];
  } else {
    fam.dom = otb::Domain::box(otb::Vec::Constant(1, 0.0), otb::Vec::Constant(1, 1.0));
  }
  if (slice_x < lo || slice_x > hi)
    throw otb::ConfigError("config field 'slice_x' must lie in the grid range");

  const std::vector<double> grid = otb::linspace(lo, hi, static_cast<int>(grid_n));
  std::vector<otb::Vec> pts;
  pts.reserve(grid.size());
  for (double g : grid) pts.push_back(otb::Vec::Constant(1, g));

  otb::CsvWriter summary((out / "ceta_summary.csv").string(),
                         {"eta", "shift", "sup_dev"});
  const otb::Vec sx = otb::Vec::Constant(1, slice_x);
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const otb::SupDeviation dev = otb::sup_deviation(fam, etas[k], pts, pts);
    summary.row({otb::fmt17(etas[k]), otb::fmt17(dev.shift), otb::fmt17(dev.sup)});
    otb::CsvWriter slice((out / ("ceta_slice_" + std::to_string(k) + ".csv")).string(),
                         {"y", "c_eta_shifted", "c_limit"});
    for (const auto& p : pts)
      slice.row({otb::fmt17(p[0]),
                 otb::fmt17(fam.cost(etas[k], sx, p) + dev.shift),
                 otb::fmt17(fam.limit(sx, p))});
    slice.close();
  }
  summary.close();
  return 0;
}

void write_plan_csv(const fs::path& path, const otb::DiscreteMeasure& mu,
                    const otb::DiscreteMeasure& nu, const otb::Mat& plan) {
  otb::CsvWriter csv(path.string(), {"i", "j", "x_i", "y_j", "mass"});
  for (int i = 0; i < plan.rows(); ++i)
    for (int j = 0; j < plan.cols(); ++j)
      csv.row({std::to_string(i), std::to_string(j), point_str(mu.points, i),
               point_str(nu.points, j), otb::fmt17(plan(i, j))});
  csv.close();
}

int run_solve(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  const otb::DiscreteMeasure mu = parse_measure(cfg, "mu");
  const otb::DiscreteMeasure nu = parse_measure(cfg, "nu");
  if (mu.dim() != nu.dim())
    throw otb::ConfigError("marginals 'mu' and 'nu' must share a dimension");
  const CostProvider cp = parse_family(cfg, "family", mu.dim());

  std::vector<double> etas;
  if (c.o_ladder->count())
    etas = c.ladder;
  else if (cfg.contains("etas"))
    etas = get_number_list(cfg, "etas", {});
  else
    etas = {get_number(cfg, "eta", 0.05)};
  require_descending(etas, "solve");

  otb::SinkhornOptions opt;
  opt.tol = get_number(cfg, "tol", 1e-9);
  opt.max_iter = get_integer(cfg, "max_iter", 1000000);

  const std::vector<otb::Coupling> plans = ladder_solve(mu, nu, cp, etas, opt);
  json meta;
  meta["cost_kind"] = cp.kind;
  meta["runs"] = json::array();
  bool warned = false;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& cpl = plans[k];
    write_plan_csv(out / ("plan_" + std::to_string(k) + ".csv"), mu, nu, cpl.plan);
    otb::CsvWriter duals((out / ("duals_" + std::to_string(k) + ".csv")).string(),
                         {"side", "index", "value"});
    for (int i = 0; i < cpl.u.size(); ++i)
      duals.row({"u", std::to_string(i), otb::fmt17(cpl.u[i])});
    for (int j = 0; j < cpl.v.size(); ++j)
      duals.row({"v", std::to_string(j), otb::fmt17(cpl.v[j])});
    duals.close();
    json run;
    run["eta"] = cpl.eta;
    run["iterations"] = cpl.iterations;
    run["marginal_error"] = cpl.marginal_error;
    run["converged"] = cpl.converged;
    meta["runs"].push_back(run);
    if (!cpl.converged && !warned) {
      std::cerr << "warning: solver did not reach tolerance " << opt.tol
                << " at eta=" << cpl.eta << " within " << opt.max_iter
                << " iterations\n";
      warned = true;
    }
  }
  write_json_file((out / "solve_meta.json").string(), meta);
  return 0;
}

int run_ldp_check(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  const otb::DiscreteMeasure mu = parse_measure(cfg, "mu");
  const otb::DiscreteMeasure nu = parse_measure(cfg, "nu");
  if (mu.dim() != nu.dim())
    throw otb::ConfigError("marginals 'mu' and 'nu' must share a dimension");
  const CostProvider cp = parse_family(cfg, "family", mu.dim());
  const auto etas =
      pick_ladder(c, cfg, {0.2, 0.1, 0.05, 0.02, 0.01, 0.005}, "ldp-check");

  if (!cfg.contains("sets") || !cfg.at("sets").is_array() || cfg.at("sets").empty())
    throw otb::ConfigError("config field 'sets' must be a nonempty array");
  std::vector<otb::IndexSet> sets;
  for (const auto& sj : cfg.at("sets")) {
    otb::IndexSet s;
    s.id = get_string(sj, "id", "set" + std::to_string(sets.size()));
    if (s.id.find(',') != std::string::npos)
      throw otb::ConfigError("set ids must not contain commas");
    if (!sj.contains("pairs") || !sj.at("pairs").is_array() || sj.at("pairs").empty())
      throw otb::ConfigError("config field 'sets[].pairs' must be a nonempty array");
    for (const auto& pj : sj.at("pairs")) {
      if (!pj.is_array() || pj.size() != 2 || !pj[0].is_number_integer() ||
          !pj[1].is_number_integer())
        throw otb::ConfigError("config field 'sets[].pairs' entries must be [i, j]");
      const int i = pj[0].get<int>(), j = pj[1].get<int>();
      if (i < 0 || i >= mu.size() || j < 0 || j >= nu.size())
        throw otb::ConfigError("config field 'sets[].pairs' index out of range");
      s.pairs.emplace_back(i, j);
    }
    sets.push_back(std::move(s));
  }

  // exact transport under the limit cost, then its rate function
  const otb::CostMatrix cq = otb::quadratic_cost(mu, nu);
  const otb::OtSolution sol = otb::exact_ot(mu, nu, cq);
  const otb::DualPotentials duals = otb::kantorovich_potentials(sol, cq);
  const otb::RateReport rates = otb::rate_report(cq, sol.support, duals);

  otb::SinkhornOptions opt;
  opt.tol = get_number(cfg, "tol", 1e-9);
  opt.max_iter = get_integer(cfg, "max_iter", 1000000);
  const std::vector<otb::Coupling> plans = ladder_solve(mu, nu, cp, etas, opt);
  const otb::LdpTable table = otb::ldp_table(plans, rates.i_dual, sets);

  otb::CsvWriter rate_csv((out / "rate.csv").string(),
                          {"i", "j", "x", "y", "I_dual", "I_enum_k2", "I_enum_k3"});
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      rate_csv.row({std::to_string(i), std::to_string(j), point_str(mu.points, i),
                    point_str(nu.points, j), otb::fmt17(rates.i_dual(i, j)),
                    otb::fmt17(rates.i_enum_k2(i, j)),
                    otb::fmt17(rates.i_enum_k3(i, j))});
  rate_csv.close();

  otb::CsvWriter tab_csv((out / "ldp_table.csv").string(),
                         {"eta", "set_id", "eta_log_prob", "neg_inf_rate", "gap"});
  for (const auto& row : table.rows)
    tab_csv.row({otb::fmt17(row.eta), row.set_id, otb::fmt17(row.eta_log_prob),
                 otb::fmt17(row.neg_inf_rate), otb::fmt17(row.gap)});
  tab_csv.close();

  json meta;
  meta["ot_value"] = sol.value;
  meta["dual_value"] = duals.dual_value;
  meta["support_components"] = duals.components;
  meta["support_pairs"] = json::array();
  for (const auto& [i, j] : sol.support.pairs)
    meta["support_pairs"].push_back({i, j});
  meta["extrapolated"] = json::object();
  for (const auto& [id, v] : table.extrapolated) meta["extrapolated"][id] = v;
  bool all_converged = true;
  for (const auto& p : plans) all_converged = all_converged && p.converged;
  meta["all_converged"] = all_converged;
  write_json_file((out / "ldp_meta.json").string(), meta);
  return 0;
}

int run_simulate(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  otb::Domain dom =
      cfg.contains("domain") && !cfg.at("domain").is_null()
          ? otb::Domain::from_json(cfg.at("domain"))
          : otb::Domain::box(otb::Vec::Constant(1, 0.0), otb::Vec::Constant(1, 1.0));

  otb::SdeConfig sde;
  sde.eta = get_number(cfg, "eta", 0.1);
  if (sde.eta < 0.0) throw otb::ConfigError("config field 'eta' must be >= 0");
  sde.n_steps = static_cast<int>(get_integer(cfg, "n_steps", 1000));
  sde.seed = c.o_seed->count() ? c.seed : get_seed(cfg);
  const long n_paths = get_integer(cfg, "n_paths", 100000);
  if (n_paths < 1 || n_paths > 10000000)
    throw otb::ConfigError("config field 'n_paths' must be in [1, 10^7]");
  const double t_end = get_number(cfg, "t_end", 1.0);

  if (cfg.contains("x0") && cfg.at("x0").is_array()) {
    const auto v = get_number_list(cfg, "x0", {});
    sde.x0 = otb::Vec(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) sde.x0[static_cast<int>(k)] = v[k];
  } else {
    sde.x0 = otb::Vec::Constant(dom.dim(), get_number(cfg, "x0", 0.3));
  }

  const std::string scheme = get_string(cfg, "scheme", "auto");
  if (scheme == "fold")
    sde.scheme = otb::ReflectionScheme::fold;
  else if (scheme == "projection")
    sde.scheme = otb::ReflectionScheme::projection;
  else if (scheme == "auto")
    sde.scheme = otb::ReflectionScheme::automatic;
  else
    throw otb::ConfigError("config field 'scheme' must be auto, fold or projection");

  const otb::Mat ends =
      otb::simulate_reflected_endpoints(dom, sde, static_cast<int>(n_paths), t_end);

  std::vector<std::string> header;
  for (int k = 0; k < dom.dim(); ++k) header.push_back("dim" + std::to_string(k));
  otb::CsvWriter csv((out / "endpoints.csv").string(), header);
  std::vector<std::string> cells(static_cast<std::size_t>(dom.dim()));
  for (int p = 0; p < ends.rows(); ++p) {
    for (int k = 0; k < dom.dim(); ++k)
      cells[static_cast<std::size_t>(k)] = otb::fmt17(ends(p, k));
    csv.row(cells);
  }
  csv.close();

  json rep;
  rep["eta"] = sde.eta;
  rep["seed"] = sde.seed;
  rep["n_paths"] = n_paths;
  rep["n_steps"] = sde.n_steps;
  rep["t_end"] = t_end;
  rep["scheme"] = scheme;
  const bool compare = get_bool(cfg, "compare", true) &&
                       dom.kind() == otb::DomainKind::box && dom.dim() == 1 &&
                       sde.eta > 0.0;
  rep["compared"] = compare;
  if (compare) {
    const long n_cells = get_integer(cfg, "cells", 50);
    if (n_cells < 1 || n_cells > 1000)
      throw otb::ConfigError("config field 'cells' must be in [1, 1000]");
    otb::KernelSpec spec;
    spec.dom = dom;
    spec.eta = sde.eta;
    spec.series_tol = get_number(cfg, "series_tol", 1e-14);
    const otb::Vec x0 = sde.x0;
    auto density = [&](double yv) {
      return spec.density(t_end, x0, otb::Vec::Constant(1, yv));
    };
    std::vector<double> samples(static_cast<std::size_t>(ends.rows()));
    for (int p = 0; p < ends.rows(); ++p)
      samples[static_cast<std::size_t>(p)] = ends(p, 0);
    const otb::HistogramReport hist = otb::compare_histogram(
        samples, dom.lower()[0], dom.upper()[0], static_cast<int>(n_cells), density);
    rep["cells"] = n_cells;
    rep["counts"] = hist.counts;
    rep["expected"] = hist.expected;
    rep["standardized"] = hist.standardized;
    rep["max_abs_standardized"] = hist.max_abs_standardized;
    rep["chi_square"] = hist.chi_square;
    rep["total_probability"] = hist.total_probability;
  }
  write_json_file((out / "histogram_report.json").string(), rep);
  return 0;
}

int run_bounds(const Common& c) {
  const json cfg = load_cfg(c);
  const fs::path out = out_dir(c, cfg);
  otb::Domain dom =
      cfg.contains("domain") && !cfg.at("domain").is_null()
          ? otb::Domain::from_json(cfg.at("domain"))
          : otb::Domain::box(otb::Vec::Constant(1, 0.0), otb::Vec::Constant(1, 1.0));
  const auto etas =
      pick_ladder(c, cfg, {1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01}, "bounds");
  const long grid_n = get_integer(cfg, "grid_n", 101);
  if (grid_n < 2 || grid_n > 2001)
    throw otb::ConfigError("config field 'grid_n' must be in [2, 2001]");
  const double delta = get_number(cfg, "delta", 0.1);
  const double eps = get_number(cfg, "eps", 0.2);
  const double series_tol = get_number(cfg, "series_tol", 1e-14);

  const otb::BoundReport upper =
      otb::check_upper_bound(dom, etas, static_cast<int>(grid_n), delta, series_tol);
  const otb::BoundReport lower =
      otb::check_lower_bound(dom, etas, static_cast<int>(grid_n), eps, series_tol);
  json rep;
  rep["upper"] = upper.to_json();
  rep["lower"] = lower.to_json();
  write_json_file((out / "bounds_report.json").string(), rep);
  if (!upper.stable)
    std::cerr << "warning: upper-bound constant not stable on this ladder\n";
  if (!lower.eta0_found)
    std::cerr << "warning: no eta with ratio >= 1/2 found on this ladder\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflected-kernel entropic transport workbench"};
  app.require_subcommand(1);

  Common ck, cc, cs, cl, cm, cb;
  CLI::App* kernel = app.add_subcommand("kernel-table", "transition-density table");
  add_common(kernel, ck);
  CLI::App* ceta = app.add_subcommand("ceta-convergence",
                                      "cost-family deviation from the quadratic limit");
  add_common(ceta, cc);
  CLI::App* solve = app.add_subcommand("solve", "entropic transport plans and duals");
  add_common(solve, cs);
  CLI::App* ldp = app.add_subcommand("ldp-check", "rate function and decay table");
  add_common(ldp, cl);
  CLI::App* sim = app.add_subcommand("simulate", "reflected-diffusion endpoints");
  add_common(sim, cm);
  CLI::App* bounds = app.add_subcommand("bounds", "two-sided kernel bound reports");
  add_common(bounds, cb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (kernel->parsed()) return run_kernel_table(ck);
    if (ceta->parsed()) return run_ceta_convergence(cc);
    if (solve->parsed()) return run_solve(cs);
    if (ldp->parsed()) return run_ldp_check(cl);
    if (sim->parsed()) return run_simulate(cm);
    if (bounds->parsed()) return run_bounds(cb);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const otb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const otb::KernelUnderflowError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const otb::ZeroEntryError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const otb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return 2;
  }
}
