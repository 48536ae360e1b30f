// Batch runner: solve, sequence, index, bounds, bias, reproduce.
// Exit codes: 0 ok, 1 a reproduction check failed, 2 bad config or arguments,
// 3 solver did not converge (results still written), 4 refused (brute-force cap).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asp/config.hpp"
#include "asp/experiments.hpp"
#include "asp/indices.hpp"
#include "asp/saa.hpp"
#include "asp/sequencing.hpp"

namespace {

using namespace asp;
using experiments::fmt;

enum Exit { kOk = 0, kCheckFailed = 1, kBadConfig = 2, kNotConverged = 3, kRefused = 4 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::string out;
  std::vector<std::string> jobs;
  std::string cost;
  std::optional<double> tol;
  std::optional<std::uint64_t> max_iters;
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig cfg = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  if (!g.jobs.empty()) {
    cfg.jobs.clear();
    for (const auto& j : g.jobs) {
      parse_distribution(j);
      cfg.jobs.push_back(j);
    }
  }
  if (!g.cost.empty()) {
    parse_cost(g.cost);
    cfg.cost = g.cost;
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.samples) {
    if (*g.samples == 0) throw ParseError("samples must be at least 1", "0");
    cfg.samples = *g.samples;
  }
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw ParseError("tol must be positive", fmt(*g.tol));
    cfg.tol = *g.tol;
  }
  if (g.max_iters) cfg.max_iters = *g.max_iters;
  if (!g.out.empty()) cfg.out = g.out;
  return cfg;
}

void require_jobs(const ExperimentConfig& cfg, std::size_t min) {
  if (cfg.jobs.size() < min) {
    throw ParseError("need at least " + std::to_string(min) + " job(s); add job= lines or --job", "job");
  }
}

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  o.max_iters = cfg.max_iters;
  return o;
}

void emit(const ExperimentConfig& cfg, const CsvMeta& meta, const CsvTable& table) {
  const auto body = render_csv(meta, table);
  if (cfg.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + cfg.out);
  f << body;
}

CsvMeta meta_for(const ExperimentConfig& cfg) { return {cfg.seed, cfg.samples, config_hash(cfg), {}}; }

int cmd_solve(const ExperimentConfig& cfg, const std::string& trace_path) {
  require_jobs(cfg, 1);
  const auto jobs = cfg.distributions();
  const auto g = cfg.cost_function();
  CsvTable t{{"field", "value"}, {}};
  if (jobs.size() == 1) {
    t.rows = {{"objective", "0"}, {"std_error", "0"}, {"iterations", "0"}, {"converged", "1"}, {"s_1", "0"}};
    emit(cfg, meta_for(cfg), t);
    return kOk;
  }
  const auto sc = sample_matrix(jobs, cfg.samples, cfg.seed);
  auto opts = solver_options(cfg);
  opts.trace = !trace_path.empty();
  const auto res = solve_schedule(g, sc, opts);
  t.rows.push_back({"objective", fmt(res.value)});
  t.rows.push_back({"std_error", fmt(res.std_error)});
  t.rows.push_back({"iterations", std::to_string(res.iterations)});
  t.rows.push_back({"converged", res.converged ? "1" : "0"});
  t.rows.push_back({"s_1", "0"});
  for (std::size_t k = 0; k < res.schedule.size(); ++k) {
    t.rows.push_back({"s_" + std::to_string(k + 2), fmt(res.schedule.times()[k])});
  }
  emit(cfg, meta_for(cfg), t);
  if (opts.trace) {
    std::ofstream f(trace_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + trace_path);
    f << "iteration,objective\n";
    for (const auto& p : res.trace) f << p.iteration << "," << fmt(p.objective) << "\n";
  }
  if (!res.converged) {
    std::cerr << "solver did not converge within " << cfg.max_iters << " iterations; best iterate written\n";
    return kNotConverged;
  }
  return kOk;
}

std::vector<std::string> report_row(std::size_t rank, const std::vector<std::size_t>& perm,
                                    const SequencingReport& r) {
  return {std::to_string(rank),
          experiments::one_based(perm),
          fmt(r.est_cost),
          fmt(r.ci95.low),
          fmt(r.ci95.high),
          r.lower_bound ? fmt(*r.lower_bound) : "",
          r.upper_bound ? fmt(*r.upper_bound) : ""};
}

int cmd_sequence(const ExperimentConfig& cfg) {
  require_jobs(cfg, 1);
  const auto jobs = cfg.distributions();
  const auto g = cfg.cost_function();
  CsvTable t{{"rank", "permutation", "est_cost", "ci_low", "ci_high", "lower_bound", "upper_bound"}, {}};
  auto meta = meta_for(cfg);
  meta.extra.push_back({"method", cfg.method});
  bool converged = true;
  if (cfg.method == "brute") {
    const auto bf = brute_force_sequence(g, jobs, cfg.samples, cfg.seed, solver_options(cfg));
    std::size_t rank = 1;
    for (const auto& row : bf.table) {
      auto rep = detail::make_report(g, jobs, row.permutation, row.solve, SequencingMethod::brute_force);
      if (jobs.size() == 1) rep = bf.best;
      t.rows.push_back(report_row(rank++, row.permutation, rep));
      converged = converged && row.solve.converged;
    }
    if (bf.vs_runner_up) {
      meta.extra.push_back({"best_minus_runner_up", fmt(bf.vs_runner_up->mean_diff)});
      meta.extra.push_back({"diff_ci_low", fmt(bf.vs_runner_up->ci95.low)});
      meta.extra.push_back({"diff_ci_high", fmt(bf.vs_runner_up->ci95.high)});
    }
  } else {
    const auto rep = heuristic_report(g, jobs, cfg.samples, cfg.seed, solver_options(cfg));
    t.rows.push_back(report_row(1, rep.permutation, rep));
    converged = rep.solve.converged;
  }
  emit(cfg, meta, t);
  return converged ? kOk : kNotConverged;
}

int cmd_index(const ExperimentConfig& cfg) {
  require_jobs(cfg, 1);
  const auto jobs = cfg.distributions();
  const auto g = cfg.cost_function();
  double alpha = 1.0;
  double beta = 1.0;
  if (const auto* l1 = std::get_if<L1Cost>(&g.variant())) {
    alpha = l1->alpha;
    beta = l1->beta;
  }
  const std::uint64_t m = std::max<std::uint64_t>(cfg.samples, 1000);
  CsvTable t{{"job", "distribution", "I1", "I2", "Ig", "Ig_std_error", "Ig_argmin"}, {}};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto i1 = index_newsvendor(alpha, beta, jobs[i]);
    const auto i2 = index_variance(jobs[i]);
    const auto ig = index_general(g, jobs[i], m, rng::derive_seed(cfg.seed, i));
    t.rows.push_back({std::to_string(i + 1), format_distribution(jobs[i]), fmt(i1.value), fmt(i2.value),
                      fmt(ig.value), fmt(ig.std_error), fmt(ig.minimizing_s)});
  }
  auto meta = meta_for(cfg);
  meta.extra.push_back({"I1_alpha", fmt(alpha)});
  meta.extra.push_back({"I1_beta", fmt(beta)});
  emit(cfg, meta, t);
  return kOk;
}

int cmd_bounds(const ExperimentConfig& cfg) {
  require_jobs(cfg, 1);
  const auto jobs = cfg.distributions();
  const auto g = cfg.cost_function();
  int k = 0;
  double alpha = 1.0;
  double beta = 1.0;
  if (const auto* l1 = std::get_if<L1Cost>(&g.variant())) {
    k = 1;
    alpha = l1->alpha;
    beta = l1->beta;
  } else if (std::holds_alternative<L2Cost>(g.variant())) {
    k = 2;
  } else {
    throw ParseError("bounds are defined for l1 and l2 costs only", cfg.cost);
  }
  CsvTable t{{"n", "lower_bound", "upper_bound"}, {}};
  // One row per prefix of the configured order.
  for (std::size_t n = 1; n <= jobs.size(); ++n) {
    const auto b = bounds(k, alpha, beta, std::span(jobs).first(n));
    t.rows.push_back({std::to_string(n), fmt(b.lower), fmt(b.upper)});
  }
  auto meta = meta_for(cfg);
  meta.extra.push_back({"k", std::to_string(k)});
  emit(cfg, meta, t);
  return kOk;
}

int cmd_bias(const ExperimentConfig& cfg) {
  require_jobs(cfg, 2);
  if (cfg.m_grid.empty()) throw ParseError("bias needs m_grid (config key or --m-grid)", "m_grid");
  const auto jobs = cfg.distributions();
  const auto g = cfg.cost_function();
  std::vector<std::size_t> grid(cfg.m_grid.begin(), cfg.m_grid.end());
  const auto rows = bias_experiment(g, jobs, grid, cfg.replications, cfg.seed, solver_options(cfg));
  CsvTable t{{"m", "mean_optimum", "std_error", "unconverged"}, {}};
  bool converged = true;
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.m), fmt(r.mean_optimum), r.std_error ? fmt(*r.std_error) : "",
                      std::to_string(r.unconverged)});
    converged = converged && r.unconverged == 0;
  }
  auto meta = meta_for(cfg);
  meta.extra.push_back({"replications", std::to_string(cfg.replications)});
  emit(cfg, meta, t);
  return converged ? kOk : kNotConverged;
}

int cmd_reproduce(const std::string& name, const Globals& globals) {
  const auto& names = experiments::reproduction_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ParseError("unknown reproduction (expected fig3, fig4a, fig4b, fig5, ex5 or ex6)", name);
  }
  const auto r = experiments::reproduce(name);
  auto cfg = r.config;
  cfg.out = globals.out;
  auto meta = r.meta();
  meta.extra.push_back({"experiment", r.name});
  emit(cfg, meta, r.table);
  for (const auto& n : r.notes) std::cerr << "NOTE " << n << "\n";
  for (const auto& c : r.checks) std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  std::cerr << (r.passed() ? "PASS " : "FAIL ") << name << "\n";
  return r.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic appointment scheduling by sample average approximation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--samples", g.samples, "scenario count m");
  app.add_option("--out", g.out, "CSV output path (default stdout)");
  app.add_option("--job", g.jobs, "job distribution spec, repeatable; replaces the config's jobs");
  app.add_option("--cost", g.cost, "l1(alpha,beta) | l2 | tol(alpha,beta,Td,Ti)");
  app.add_option("--tol", g.tol, "relative solver tolerance");
  app.add_option("--max-iters", g.max_iters, "solver iteration cap");

  auto* solve = app.add_subcommand("solve", "optimal appointment times for the configured order");
  std::string trace_path;
  solve->add_option("--trace", trace_path, "write iteration,objective CSV here");

  auto* sequence = app.add_subcommand("sequence", "order jobs by index heuristic or brute force");
  std::string method;
  sequence->add_option("--method", method, "heuristic | brute")->check(CLI::IsMember({"heuristic", "brute"}));

  app.add_subcommand("index", "I1, I2 and I_g per job");
  app.add_subcommand("bounds", "lower and upper cost bounds for each prefix of the configured order");

  auto* bias = app.add_subcommand("bias", "mean SAA optimum over replications for each m");
  std::vector<std::uint64_t> m_grid;
  std::optional<std::uint64_t> replications;
  bias->add_option("--m-grid", m_grid, "ascending sample sizes")->delimiter(',');
  bias->add_option("--replications", replications, "replications per sample size");

  auto* reproduce = app.add_subcommand("reproduce", "rerun a published table, figure or example");
  std::string name;
  reproduce->add_option("name", name, "fig3 | fig4a | fig4b | fig5 | ex5 | ex6")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (reproduce->parsed()) return cmd_reproduce(name, g);
    auto cfg = resolve(g);
    if (!method.empty()) cfg.method = method;
    if (!m_grid.empty()) {
      for (auto m : m_grid) {
        if (m == 0) throw ParseError("m_grid entries must be at least 1", "0");
      }
      cfg.m_grid = m_grid;
    }
    if (replications) {
      if (*replications == 0) throw ParseError("replications must be at least 1", "0");
      cfg.replications = *replications;
    }
    if (solve->parsed()) return cmd_solve(cfg, trace_path);
    if (sequence->parsed()) return cmd_sequence(cfg);
    if (app.got_subcommand("index")) return cmd_index(cfg);
    if (app.got_subcommand("bounds")) return cmd_bounds(cfg);
    if (bias->parsed()) return cmd_bias(cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const RefusedError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  }
  return kBadConfig;
}
