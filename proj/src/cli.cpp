#include "compshop/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "compshop/equilibrium.hpp"
#include "compshop/monopoly.hpp"
#include "compshop/numerics.hpp"
#include "compshop/observable.hpp"
#include "compshop/oracle.hpp"

namespace compshop::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("malformed " + what + ": '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> descending(std::vector<double> g) {
  std::sort(g.begin(), g.end(), std::greater<>());
  return g;
}

struct Csv {
  std::ostringstream os;
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
  }
  Csv& cell(double v) { return raw(format_number(v)); }
  Csv& cell(const std::string& v) { return raw(v); }
  Csv& cell(bool v) { return raw(v ? "1" : "0"); }
  Csv& raw(const std::string& v) {
    os << (first_ ? "" : ",") << v;
    first_ = false;
    return *this;
  }
  void end() {
    os << '\n';
    first_ = true;
  }

 private:
  bool first_ = true;
};

json support_json(const std::vector<SupportPoint>& s) {
  json a = json::array();
  for (const auto& p : s) a.push_back({{"x", p.x}, {"y", p.y}, {"weight", p.weight}});
  return a;
}

json learning_json(const LearningSolution& l) {
  return {{"regime", to_string(l.regime)},
          {"kappa", l.kappa},
          {"omega", l.omega},
          {"lambda_star", l.lambda_star},
          {"log_gap", l.spread.log_gap},
          {"unconstrained_lambda", l.unconstrained_lambda},
          {"q", l.q},
          {"root_residual", l.root_residual},
          {"support", support_json(l.support)}};
}

json optimality_json(const OptimalityReport& r) {
  return {{"passed", r.passed},
          {"failures", r.failures},
          {"D_half", r.D_half},
          {"D_support", r.D_support},
          {"min_D_left", r.min_D_left},
          {"max_D_right", r.max_D_right},
          {"slope", r.slope},
          {"intercept", r.intercept},
          {"intercept_tie", r.intercept_tie},
          {"majorization_excess", r.majorization_excess},
          {"contact_gap", r.contact_gap},
          {"tie_gap", r.tie_gap},
          {"tangency_error", r.tangency_error},
          {"grid_points", r.grid_points}};
}

json pricing_report_json(const PricingReport& r) {
  return {{"passed", r.passed()},
          {"k", r.k},
          {"on_support_dev", r.on_support_dev},
          {"off_support_excess", r.off_support_excess},
          {"best_deviation", r.best_deviation},
          {"max_jump", r.max_jump},
          {"branch_form_mismatch", r.branch_form_mismatch}};
}

json distribution_json(const PriceDistribution& d) {
  const char* game = d.game == PricingGame::TwoPoint     ? "gamma"
                     : d.game == PricingGame::ThreePoint ? "phi"
                                                         : "custom";
  return {{"family", game}, {"lambda", d.lambda}, {"q", d.q}, {"p_min", d.p_min()},
          {"p_max", d.p_max()}};
}

json thresholds_json(const RegimeThresholds& t) {
  return {{"omega", t.omega},
          {"kappa_lo", t.kappa_lo},
          {"kappa_hi", t.kappa_hi},
          {"kappa_cheap_root", t.kappa_cheap_root},
          {"degenerate", t.degenerate},
          {"warning", t.warning}};
}

json equilibrium_json(const EquilibriumSolution& s) {
  return {{"kernel", s.kernel},
          {"kappa", s.kappa},
          {"omega", s.omega},
          {"regime", to_string(s.regime)},
          {"learning", learning_json(s.learning)},
          {"pricing", distribution_json(s.pricing)},
          {"expected_price", s.expected_price},
          {"consumer_welfare", s.consumer_welfare},
          {"firm_profit", s.firm_profit},
          {"pricing_report", pricing_report_json(s.pricing_report)},
          {"learning_report", optimality_json(s.learning_report)},
          {"coupling_feasible", s.coupling.feasible},
          {"coupling_residual", s.coupling.residual},
          {"verified", s.verified},
          {"failures", s.failures}};
}

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"se", e.se}, {"analytic", e.analytic}, {"z", e.z()}};
}

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) {
    std::string dir = cfg.out_dir;
    if (dir.empty()) {
      const char* env = std::getenv(kOutDirEnv);
      dir = env && *env ? env : ".";
    }
    dir_ = dir;
    stem_ = cfg.stem.empty() ? cfg.subcommand : cfg.stem;
  }
  fs::path path(const std::string& ext) const { return dir_ / (stem_ + ext); }
  void csv(const Csv& c, std::ostream& out) const { write(".csv", c.os.str(), out); }
  void json_doc(json doc, std::ostream& out) const {
    doc["schema_version"] = kSchemaVersion;
    write(".json", doc.dump(2) + "\n", out);
  }

 private:
  void write(const std::string& ext, const std::string& body, std::ostream& out) const {
    const auto p = path(ext);
    write_atomic(p, body);
    out << "wrote " << p.string() << '\n';
  }
  fs::path dir_;
  std::string stem_;
};

json config_echo(const RunConfig& cfg) {
  json j = {{"subcommand", cfg.subcommand}, {"kernel", cfg.kernel}, {"omega", cfg.omega}};
  if (cfg.kappa) j["kappa"] = *cfg.kappa;
  if (!cfg.kappa_grid.empty()) j["kappa_grid"] = cfg.kappa_grid;
  return j;
}

int status(bool ok) { return ok ? kExitOk : kExitVerification; }

CostKernel kernel_of(const RunConfig& cfg) {
  try {
    return kernel_by_name(cfg.kernel);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

double require_kappa(const RunConfig& cfg) {
  if (!cfg.kappa) throw InputError(cfg.subcommand + " needs --kappa");
  return *cfg.kappa;
}

std::vector<double> grid_or(const RunConfig& cfg, std::vector<double> fallback) {
  if (!cfg.kappa_grid.empty()) return cfg.kappa_grid;
  if (cfg.kappa) return {*cfg.kappa};
  return fallback;
}

Exec exec_of(const RunConfig& cfg) { return cfg.serial ? Exec::Serial : Exec::Parallel; }

int run_monopoly(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const auto grid = descending(grid_or(cfg, {1.0, 1e-1, 1e-2, 1e-3, 1e-4}));
  const auto sweep = monopoly_convergence_sweep(kernel, cfg.mu, grid);
  double worst_residual = 0.0;
  for (double kappa : grid) {
    const auto s = solve_monopoly(kernel, kappa, cfg.mu);
    worst_residual = std::max({worst_residual, std::fabs(s.m1_residual), std::fabs(s.m2_residual)});
  }
  Csv csv({"kappa", "x_lo", "x_hi", "expected_price", "consumer_welfare", "trade_failure_prob"});
  for (const auto& r : sweep.rows) {
    csv.cell(r.kappa).cell(r.x_lo).cell(r.x_hi).cell(r.expected_price).cell(r.consumer_welfare)
        .cell(r.trade_failure);
    csv.end();
  }
  const bool ok = worst_residual <= 1e-8 && (grid.size() < 2 || sweep.passed());
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)},
              {"mu", cfg.mu},
              {"limit_x_lo", sweep.limit},
              {"max_residual", worst_residual},
              {"x_hi_increasing", sweep.x_hi_increasing},
              {"x_lo_decreasing", sweep.x_lo_decreasing},
              {"G_probe_decreasing", sweep.probe_decreasing},
              {"passed", ok}},
             out);
  out << "monopoly: " << sweep.rows.size() << " rows, limit a=" << sweep.limit
      << (ok ? ", checks pass" : ", CHECKS FAIL") << '\n';
  return status(ok);
}

int run_pricing(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.lambda) throw InputError("pricing needs --lambda");
  const double l = *cfg.lambda;
  const bool three = cfg.q.has_value();
  const auto dist = three ? phi_distribution(l, *cfg.q) : gamma_distribution(l);
  const Valuation v = three ? Valuation{ThreePointValuation{l, *cfg.q}}
                            : Valuation{TwoPointValuation{l}};
  const auto report = verify_pricing_equilibrium(dist, v, cfg.grid);
  Csv csv({"price", "cdf", "pdf", "profit"});
  const auto prices = numerics::linspace(0.0, dist.p_max() + l, cfg.grid);
  for (double p : prices) {
    csv.cell(p).cell(dist.cdf(p)).cell(dist.pdf(p)).cell(expected_profit(p, dist, v));
    csv.end();
  }
  Outputs o(cfg);
  o.csv(csv, out);
  json doc = {{"distribution", distribution_json(dist)},
              {"expected_price", dist.mean()},
              {"report", pricing_report_json(report)}};
  if (three) {
    doc["closed_form_profit"] = phi_profit_closed_form(l, *cfg.q);
    doc["below_support_min_slope"] = phi_below_support_min_slope(l, *cfg.q);
  } else {
    doc["closed_form_profit"] = gamma_profit_closed_form(l);
  }
  o.json_doc(doc, out);
  out << "pricing: " << report.summary() << (report.passed() ? "" : " CHECKS FAIL") << '\n';
  return status(report.passed());
}

int run_learn(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const double kappa = require_kappa(cfg);
  const auto t = regime_thresholds(kernel, cfg.omega);
  const auto s = assemble_equilibrium(kernel, kappa, cfg.omega, t);
  const ValueFunction vf(s.pricing, CostModel(kernel, kappa));
  const auto trace = line_trace(s.learning, vf, std::max<std::size_t>(cfg.grid / 5, 21));
  Csv csv({"x", "value", "plane"});
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    csv.cell(trace.x[i]).cell(trace.value[i]).cell(trace.plane[i]);
    csv.end();
  }
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)},
              {"thresholds", thresholds_json(t)},
              {"learning", learning_json(s.learning)},
              {"report", optimality_json(s.learning_report)}},
             out);
  out << "learn: regime " << to_string(s.regime) << ", lambda*=" << s.learning.lambda_star
      << (s.learning_report.passed ? "" : ", CHECKS FAIL") << '\n';
  return status(s.learning_report.passed);
}

int run_solve(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const double kappa = require_kappa(cfg);
  const auto t = regime_thresholds(kernel, cfg.omega);
  const auto s = assemble_equilibrium(kernel, kappa, cfg.omega, t);
  Outputs o(cfg);
  o.json_doc({{"config", config_echo(cfg)},
              {"thresholds", thresholds_json(t)},
              {"equilibrium", equilibrium_json(s)}},
             out);
  out << "solve: regime " << to_string(s.regime) << ", lambda*=" << s.learning.lambda_star
      << ", welfare=" << s.consumer_welfare << ", profit=" << s.firm_profit
      << (s.verified ? ", checks pass" : ", CHECKS FAIL") << '\n';
  for (const auto& f : s.failures) out << "  " << f << '\n';
  return status(s.verified);
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const auto grid = cfg.kappa_grid.empty() ? parse_grid("log:1e-4:10:25") : cfg.kappa_grid;
  const auto w = welfare_sweep(kernel, cfg.omega, grid, exec_of(cfg));
  Csv csv({"kappa", "regime", "lambda_star", "q", "welfare", "profit", "ep", "checks_passed"});
  bool rows_ok = true;
  for (const auto& r : w.rows) {
    csv.cell(r.kappa).cell(r.regime).cell(r.lambda_star).cell(r.q).cell(r.welfare)
        .cell(r.profit).cell(r.ep).cell(r.checks_passed);
    csv.end();
    rows_ok = rows_ok && r.checks_passed;
  }
  const bool ok = rows_ok && w.passed();
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)},
              {"thresholds", thresholds_json(w.thresholds)},
              {"intermediate_decreasing", w.intermediate_decreasing},
              {"expensive_increasing", w.expensive_increasing},
              {"lambda_nonincreasing", w.lambda_nonincreasing},
              {"max_dW_error", w.max_dW_error},
              {"continuity_gap_hi", w.continuity_gap_hi},
              {"all_rows_certified", rows_ok},
              {"passed", ok}},
             out);
  out << "sweep: " << w.rows.size() << " rows, kappa_lo=" << w.thresholds.kappa_lo
      << " kappa_hi=" << w.thresholds.kappa_hi << (ok ? ", checks pass" : ", CHECKS FAIL")
      << '\n';
  return status(ok);
}

int run_limit(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const auto grid = descending(grid_or(cfg, {1e-1, 1e-2, 1e-3, 1e-4}));
  const auto table = efficiency_limit_check(kernel, cfg.omega, grid);
  Csv csv({"kappa", "cheap", "lambda_star", "log_gap", "q", "support_distance", "misallocation",
           "expost_misallocation", "monopoly_trade_failure", "checks_passed"});
  for (const auto& r : table.rows) {
    const auto m = solve_monopoly(kernel, r.kappa, cfg.mu);
    csv.cell(r.kappa).cell(r.cheap).cell(r.lambda_star).cell(r.log_gap).cell(r.q)
        .cell(r.support_distance).cell(r.misallocation).cell(r.expost_misallocation)
        .cell(m.trade_failure_probability()).cell(r.checks_passed);
    csv.end();
  }
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)},
              {"lambda_increasing", table.lambda_increasing},
              {"support_converging", table.support_converging},
              {"max_misallocation", table.max_misallocation},
              {"passed", table.passed()}},
             out);
  out << "limit: " << table.rows.size() << " rows"
      << (table.passed() ? ", checks pass" : ", CHECKS FAIL") << '\n';
  return status(table.passed());
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const double kappa = require_kappa(cfg);
  const auto s = assemble_equilibrium(kernel, kappa, cfg.omega,
                                      regime_thresholds(kernel, cfg.omega));
  const auto r = simulate_market(s, cfg.draws, *cfg.seed, exec_of(cfg));
  Outputs o(cfg);
  o.json_doc({{"config", config_echo(cfg)},
              {"draws", r.draws},
              {"seed", r.seed},
              {"regime", to_string(s.regime)},
              {"equilibrium_verified", s.verified},
              {"profit1", estimate_json(r.profit1)},
              {"profit2", estimate_json(r.profit2)},
              {"welfare", estimate_json(r.welfare)},
              {"share1", estimate_json(r.share1)},
              {"misallocation_rate", r.misallocation_rate},
              {"disadvantaged_purchases", r.disadvantaged_purchases},
              {"passed", r.passed}},
             out);
  out << "simulate: profit z=" << r.profit1.z() << "/" << r.profit2.z()
      << ", welfare z=" << r.welfare.z() << (r.passed ? ", checks pass" : ", CHECKS FAIL")
      << '\n';
  return status(r.passed);
}

int run_oracle(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const double kappa = require_kappa(cfg);
  const auto s = assemble_equilibrium(kernel, kappa, cfg.omega,
                                      regime_thresholds(kernel, cfg.omega));
  const Prior prior(cfg.omega);
  const auto grid = PosteriorGrid::build(cfg.resolution, prior);
  const CostModel cost(kernel, kappa);
  const ValueFunction vf(s.pricing, cost);
  const auto sol = oracle_solve(grid, prior, vf, cost, exec_of(cfg));
  const auto line = oracle_comparison_line_check(sol);
  const auto match = oracle_support_match(sol, s.learning.support);
  const double value_gap = std::fabs(sol.objective - s.consumer_welfare);
  const bool ok = line.passed && match.passed && value_gap <= 2.0 / cfg.resolution;
  Csv csv({"x", "y", "weight", "b00", "b01", "b10", "b11"});
  for (std::size_t i = 0; i < sol.support.size(); ++i) {
    const auto& b = sol.support_beliefs[i];
    csv.cell(sol.support_means[i].first).cell(sol.support_means[i].second)
        .cell(sol.support_weights[i]).cell(b[0]).cell(b[1]).cell(b[2]).cell(b[3]);
    csv.end();
  }
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)},
              {"resolution", cfg.resolution},
              {"grid_points", grid.size()},
              {"regime", to_string(s.regime)},
              {"objective", sol.objective},
              {"dual_objective", sol.dual_objective},
              {"analytic_welfare", s.consumer_welfare},
              {"max_dual_violation", sol.max_dual_violation},
              {"bayes_residual", sol.bayes_residual},
              {"line_distance", line.max_distance},
              {"line_tolerance", line.tolerance},
              {"support_offset", match.max_offset},
              {"support_uncovered", match.max_uncovered},
              {"passed", ok}},
             out);
  out << "oracle: objective " << sol.objective << " vs analytic " << s.consumer_welfare
      << ", line distance " << line.max_distance << (ok ? ", checks pass" : ", CHECKS FAIL")
      << '\n';
  return status(ok);
}

int run_observable(const RunConfig& cfg, std::ostream& out) {
  const auto kernel = kernel_of(cfg);
  const auto grid = grid_or(cfg, {1e-4, 1e-2, 1.0});
  const auto t = regime_thresholds(kernel, cfg.omega);
  Csv csv({"kappa", "public_welfare", "private_welfare", "private_regime", "degenerate",
           "max_support_offset"});
  bool ok = true;
  for (double kappa : grid) {
    const auto pub =
        observable_learning_optimum(CostModel(kernel, kappa), cfg.omega, cfg.resolution,
                                    exec_of(cfg));
    const auto priv = assemble_equilibrium(kernel, kappa, cfg.omega, t);
    csv.cell(kappa).cell(pub.certificate.objective).cell(priv.consumer_welfare)
        .cell(priv.verified ? to_string(priv.regime) : std::string("uncertified"))
        .cell(pub.degenerate).cell(pub.max_support_offset);
    csv.end();
    ok = ok && pub.degenerate;
  }
  Outputs o(cfg);
  o.csv(csv, out);
  o.json_doc({{"config", config_echo(cfg)}, {"all_degenerate", ok}, {"passed", ok}}, out);
  out << "observable: " << grid.size() << " rows"
      << (ok ? ", no learning at every kappa" : ", CHECKS FAIL") << '\n';
  return status(ok);
}

const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>>& handlers() {
  static const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>> h = {
      {"monopoly", run_monopoly}, {"pricing", run_pricing},   {"learn", run_learn},
      {"solve", run_solve},       {"sweep", run_sweep},       {"limit", run_limit},
      {"simulate", run_simulate}, {"oracle", run_oracle},     {"observable", run_observable}};
  return h;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"monopoly", "pricing", "learn",
                                                 "solve",    "sweep",   "limit",
                                                 "simulate", "oracle",  "observable"};
  return names;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  const auto parts = split(text, ':');
  if (parts.size() == 4 && (parts[0] == "log" || parts[0] == "lin")) {
    const double a = parse_double(parts[1], "grid start");
    const double b = parse_double(parts[2], "grid stop");
    const double n = parse_double(parts[3], "grid count");
    if (!(n >= 1) || n != std::floor(n) || n > 1e7) {
      throw InputError("grid count must be a positive integer: '" + parts[3] + "'");
    }
    if (parts[0] == "log") {
      if (!(a > 0 && b > 0)) throw InputError("log grid endpoints must be positive");
      g = numerics::logspace(std::log10(a), std::log10(b), static_cast<std::size_t>(n));
      g.front() = a;
      g.back() = b;
    } else {
      g = numerics::linspace(a, b, static_cast<std::size_t>(n));
    }
  } else if (parts.size() == 1) {
    for (const auto& tok : split(text, ',')) g.push_back(parse_double(tok, "grid value"));
  } else {
    throw InputError("malformed grid '" + text + "' (expected log:a:b:n, lin:a:b:n or a,b,c)");
  }
  if (g.empty()) throw InputError("empty grid");
  if (g.size() > 1) {
    const bool up = g[1] > g[0];
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (up ? !(g[i] > g[i - 1]) : !(g[i] < g[i - 1])) {
        throw InputError("grid '" + text + "' is not strictly monotone");
      }
    }
  }
  return g;
}

void apply_config_file(const fs::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("config file must hold a JSON object");
  try {
    for (const auto& [raw_key, v] : j.items()) {
      std::string key = raw_key;
      std::replace(key.begin(), key.end(), '-', '_');
      if (key == "subcommand") {
        cfg.subcommand = v.get<std::string>();
      } else if (key == "kernel") {
        cfg.kernel = v.get<std::string>();
      } else if (key == "kappa") {
        cfg.kappa = v.get<double>();
      } else if (key == "kappa_grid") {
        cfg.kappa_grid = v.is_string() ? parse_grid(v.get<std::string>())
                                       : v.get<std::vector<double>>();
      } else if (key == "omega") {
        cfg.omega = v.get<double>();
      } else if (key == "mu") {
        cfg.mu = v.get<double>();
      } else if (key == "lambda") {
        cfg.lambda = v.get<double>();
      } else if (key == "q") {
        cfg.q = v.get<double>();
      } else if (key == "resolution") {
        cfg.resolution = v.get<int>();
      } else if (key == "grid") {
        cfg.grid = v.get<std::size_t>();
      } else if (key == "draws") {
        cfg.draws = static_cast<std::size_t>(v.get<double>());
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "out_dir") {
        cfg.out_dir = v.get<std::string>();
      } else if (key == "output" || key == "stem") {
        cfg.stem = v.get<std::string>();
      } else if (key == "serial") {
        cfg.serial = v.get<bool>();
      } else {
        throw InputError("unknown config key '" + raw_key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InputError("config file " + path.string() + ": " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (std::find(subcommands().begin(), subcommands().end(), cfg.subcommand) ==
      subcommands().end()) {
    throw InputError("unknown subcommand '" + cfg.subcommand + "'");
  }
  kernel_of(cfg);
  if (!(cfg.omega > 0.0 && cfg.omega <= 0.4)) {
    std::ostringstream os;
    os << "omega=" << cfg.omega
       << " violates the prior assumption 0 < omega <= 2/5 (anti-diagonal mass)";
    throw InputError(os.str());
  }
  if (!(cfg.mu > 0.0 && cfg.mu < 1.0)) throw InputError("mu must lie in (0, 1)");
  if (cfg.kappa && !(*cfg.kappa > 0.0 && std::isfinite(*cfg.kappa))) {
    throw InputError("kappa must be a positive finite number");
  }
  for (double k : cfg.kappa_grid) {
    if (!(k > 0.0 && std::isfinite(k))) throw InputError("kappa grid values must be positive");
  }
  if (cfg.lambda && !(*cfg.lambda > 0.0)) throw InputError("lambda must be positive");
  if (cfg.q && !(*cfg.q > 0.0 && *cfg.q < 0.5)) throw InputError("q must lie in (0, 1/2)");
  if (cfg.resolution < 2 || cfg.resolution > 200) throw InputError("resolution must be in [2, 200]");
  if (cfg.grid < 2) throw InputError("grid must have at least 2 points");
  if (cfg.subcommand == "simulate") {
    if (!cfg.seed) throw InputError("simulate needs --seed (all randomness is seeded)");
    if (cfg.draws < 100000) throw InputError("simulate needs at least 1e5 draws");
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  const auto dir = path.parent_path();
  if (!dir.empty()) {
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

int run(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  return handlers().at(cfg.subcommand)(cfg, out);
}

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium solver for duopoly pricing with flexible consumer learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "compshop 1.0 (schema " + std::to_string(kSchemaVersion) + ")");

  // Raw flag values; applied over the config file only when given.
  std::string config_path, kernel, kappa_grid, out_dir, stem;
  double kappa = 0, omega = 0, mu = 0, lambda = 0, q = 0;
  int resolution = 0;
  std::size_t grid = 0, draws = 0;
  std::uint64_t seed = 0;
  bool serial = false;

  const std::map<std::string, std::string> about = {
      {"monopoly", "single-seller benchmark over a kappa grid"},
      {"pricing", "price distribution and no-deviation report for a valuation spread"},
      {"learn", "consumer learning strategy and its majorizing price function"},
      {"solve", "full equilibrium with verification reports"},
      {"sweep", "welfare and learning across a kappa grid"},
      {"limit", "cheap-information efficiency limit table"},
      {"simulate", "Monte Carlo market simulation"},
      {"oracle", "grid LP over posterior distributions"},
      {"observable", "public-learning benchmark vs private learning"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--kernel", kernel, "entropy | power | power:<p>");
    sub->add_option("--kappa", kappa, "cost scale");
    sub->add_option("--kappa-grid", kappa_grid, "log:a:b:n, lin:a:b:n or a,b,c");
    sub->add_option("--omega", omega, "prior mass on each anti-diagonal corner");
    sub->add_option("--mu", mu, "monopoly prior mean");
    sub->add_option("--lambda", lambda, "valuation spread (pricing)");
    sub->add_option("--q", q, "tie-complement probability; selects the three-point game");
    sub->add_option("--resolution", resolution, "oracle lattice resolution n");
    sub->add_option("--grid", grid, "points in verification and output grids");
    sub->add_option("--draws", draws, "Monte Carlo draws");
    sub->add_option("--seed", seed, "RNG seed (required by simulate)");
    sub->add_option("--out-dir", out_dir, std::string("output directory (default $") +
                                              kOutDirEnv + " or .)");
    sub->add_option("--output", stem, "output file stem (default: subcommand name)");
    sub->add_flag("--serial", serial, "use the serial reference kernels");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    auto* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (sub->count("--config")) apply_config_file(config_path, cfg);
    cfg.subcommand = sub->get_name();
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--kernel")) cfg.kernel = kernel;
    if (given("--kappa")) cfg.kappa = kappa;
    if (given("--kappa-grid")) cfg.kappa_grid = parse_grid(kappa_grid);
    if (given("--omega")) cfg.omega = omega;
    if (given("--mu")) cfg.mu = mu;
    if (given("--lambda")) cfg.lambda = lambda;
    if (given("--q")) cfg.q = q;
    if (given("--resolution")) cfg.resolution = resolution;
    if (given("--grid")) cfg.grid = grid;
    if (given("--draws")) cfg.draws = draws;
    if (given("--seed")) cfg.seed = seed;
    if (given("--out-dir")) cfg.out_dir = out_dir;
    if (given("--output")) cfg.stem = stem;
    if (given("--serial")) cfg.serial = serial;
    return run(cfg, std::cout);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerification;
  }
}

}  // namespace compshop::cli
