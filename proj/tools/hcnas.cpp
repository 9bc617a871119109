// Command-line front end: constrained architecture search, the toy
// comparison, latency validation, projection, enumeration and synthetic
// instance generation. All randomness flows from one seed recorded in the
// run manifest; re-running a manifest reproduces the outputs byte for byte.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcnas/gen.hpp"
#include "hcnas/init.hpp"
#include "hcnas/io.hpp"
#include "hcnas/optimizer.hpp"
#include "hcnas/oracle.hpp"
#include "hcnas/project.hpp"

namespace {

using namespace hcnas;

constexpr const char* kToolVersion = "0.1.0";
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitDiverged = 3;

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  if (const char* env = std::getenv("HCNAS_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw Error(ErrorKind::Input, "HCNAS_SEED is not an integer");
    }
  }
  return cli_seed;
}

StepSchedule parse_schedule(const std::string& text, double* gamma) {
  if (text == "fw4") return StepSchedule::FwClassic;
  if (text == "fw2") return StepSchedule::Fw2;
  if (text.rfind("fixed:", 0) == 0) {
    *gamma = std::stod(text.substr(6));
    if (*gamma < 0.0 || *gamma > 1.0)
      throw Error(ErrorKind::Input, "fixed step size must lie in [0,1]");
    return StepSchedule::Fixed;
  }
  throw Error(ErrorKind::Input, "unknown schedule: " + text);
}

// Dimensions implied by a serialized parameter file, for commands invoked
// without --space. min_depth is read off the beta support.
SpaceSpec spec_from_params_json(const Json& j) {
  try {
    const auto& alpha = j.at("alpha");
    const auto& beta = j.at("beta");
    SpaceSpec spec;
    spec.num_stages = static_cast<Index>(alpha.size());
    spec.max_depth = static_cast<Index>(alpha.at(0).size());
    const Index num_configs = static_cast<Index>(alpha.at(0).at(0).size());
    for (Index c = 0; c < num_configs; ++c)
      spec.configs.push_back({static_cast<int>(c), {}});
    Index first_used = spec.max_depth - 1;
    for (const auto& stage : beta)
      for (std::size_t b = 0; b < stage.size(); ++b)
        if (stage.at(b).get<double>() > 0.0) {
          first_used = std::min(first_used, static_cast<Index>(b));
          break;
        }
    spec.min_depth = first_used + 1;
    check_spec(spec);
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("params: ") + e.what());
  }
}

void write_json(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

int cmd_search(const std::string& space_path, const std::string& table_path,
               const std::string& objective_path, double budget, int iters,
               std::uint64_t seed, const std::string& init_kind,
               const std::string& schedule_text, const std::string& block_rule,
               bool exact_mckp, const std::string& out_dir) {
  const SpaceSpec spec = load_space(space_path);
  const LatencyTabled table = load_table(table_path, spec);
  for (const auto& warning : monotonicity_warnings(table, spec))
    std::cerr << "warning: " << warning << "\n";
  const ObjectiveSpecd obj = load_objective(objective_path, spec);

  SolverConfig cfg;
  cfg.max_iters = iters;
  cfg.seed = seed;
  cfg.budget = budget;
  cfg.schedule = parse_schedule(schedule_text, &cfg.fixed_gamma);
  cfg.block_rule =
      block_rule == "alternate" ? BlockRule::Alternate : BlockRule::Random;

  const ArchParamsd start = init_kind == "lightest"
                                ? lightest_init(spec, table)
                                : balanced_init(spec, table, budget);
  const auto trace = bcsfw_search(start, spec, obj, table, cfg);
  const auto projected = project_credit(trace.final_params, spec, table, budget);

  std::filesystem::create_directories(out_dir);
  {
    std::ostringstream init_csv;
    init_csv << "block,stage,row,col,value\n";
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = 0; b < spec.max_depth; ++b)
        for (Index c = 0; c < spec.num_configs(); ++c)
          init_csv << "alpha," << s << ',' << b << ',' << c << ','
                   << format_double(start.alpha(spec.alpha_row(s, b), c)) << '\n';
    for (Index s = 0; s < spec.num_stages; ++s)
      for (Index b = 0; b < spec.max_depth; ++b)
        init_csv << "beta," << s << ',' << b << ",,"
                 << format_double(start.beta(s, b)) << '\n';
    write_text_file(out_dir + "/init_point.csv", init_csv.str());
  }
  write_json(out_dir + "/params.json",
             params_to_json(trace.final_params, spec));
  Json result = {{"version", 1},
                 {"arch", arch_to_json(projected.arch)},
                 {"latency_ms", projected.latency},
                 {"credit", projected.credit}};
  if (exact_mckp) {
    const DiscreteArch greedy =
        project_credit_greedy(trace.final_params, spec, table, budget);
    result["greedy_arch"] = arch_to_json(greedy);
    result["greedy_latency_ms"] = discrete_latency(greedy, table, spec);
    result["greedy_credit"] = credit_of(greedy, trace.final_params, spec);
  }
  write_json(out_dir + "/result.json", result);
  write_text_file(out_dir + "/trace.csv", trace_to_csv(trace));
  const Json manifest = {{"version", 1},
                         {"tool_version", kToolVersion},
                         {"seed", seed},
                         {"space", space_path},
                         {"latency_table", table_path},
                         {"objective", objective_path},
                         {"budget_ms", budget},
                         {"iters", iters},
                         {"init", init_kind},
                         {"schedule", schedule_text},
                         {"block_rule", block_rule},
                         {"exact_mckp", exact_mckp},
                         {"out", out_dir}};
  write_json(out_dir + "/manifest.json", manifest);
  std::cout << result.dump(2) << "\n";
  return kExitOk;
}

int cmd_toy(Index dim, int iters, const std::vector<double>& lambdas, double lr,
            std::uint64_t seed, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  Rng rng(seed);
  const Eigen::VectorXd start = toy_feasible_start<double>(dim, rng);

  std::ostringstream csv;
  csv << "method,lambda,iter,objective,constraint_residual\n";
  SolverConfig cfg;
  cfg.seed = seed;
  const auto fw = sfw_toy<double>(start, iters, cfg);
  for (const auto& row : fw.rows)
    csv << "fw,0," << row.iter << ',' << format_double(row.objective) << ','
        << format_double(row.residual) << '\n';
  bool diverged = false;
  for (double lambda : lambdas) {
    const auto gd = gd_penalty_toy<double>(start, lambda, lr, iters);
    for (const auto& row : gd.rows)
      csv << "gd," << format_double(lambda) << ',' << row.iter << ','
          << format_double(row.objective) << ',' << format_double(row.residual)
          << '\n';
    diverged = diverged || gd.diverged;
  }
  write_text_file(out_dir + "/fw_vs_gd.csv", csv.str());
  std::cout << "wrote " << out_dir << "/fw_vs_gd.csv\n";
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_validate_latency(const std::string& space_path,
                         const std::string& table_path, int samples,
                         int mc_samples, std::uint64_t seed,
                         const std::string& out_dir) {
  const SpaceSpec spec = load_space(space_path);
  const LatencyTabled table = load_table(table_path, spec);
  std::filesystem::create_directories(out_dir);
  Rng rng(seed);

  std::ostringstream csv;
  csv << "formula_ms,monte_carlo_ms\n";
  double sxy = 0.0, sxx = 0.0, sy = 0.0, syy = 0.0;
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < samples; ++i) {
    const ArchParamsd p = random_params(spec, rng);
    const double formula = expected_latency(p, table, spec);
    double mc = 0.0;
    for (int k = 0; k < mc_samples; ++k) {
      const auto s = gumbel_sample(p, spec, 1.0, SampleMode::Hard, rng);
      ArchParamsd hard{s.alpha_hat, s.beta_hat};
      mc += discrete_latency(to_discrete(hard, spec), table, spec);
    }
    mc /= mc_samples;
    pairs.emplace_back(formula, mc);
    csv << format_double(formula) << ',' << format_double(mc) << '\n';
    sxy += formula * mc;
    sxx += formula * formula;
    sy += mc;
    syy += mc * mc;
  }
  write_text_file(out_dir + "/latency_pairs.csv", csv.str());

  const double slope = sxy / sxx;  // fit through the origin, y = slope * x
  const double mean_y = sy / samples;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [x, y] : pairs) {
    ss_res += (y - slope * x) * (y - slope * x);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  const Json summary = {{"samples", samples},
                        {"mc_samples", mc_samples},
                        {"slope", slope},
                        {"r2", r2}};
  write_json(out_dir + "/latency_fit.json", summary);
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_project(const std::string& params_path, const std::string& table_path,
                double budget, const std::string& space_path, bool exact_mckp) {
  const Json params_json = parse_json_file(params_path);
  const SpaceSpec spec = space_path.empty() ? spec_from_params_json(params_json)
                                            : load_space(space_path);
  const ArchParamsd params = params_from_json(params_json, spec);
  const LatencyTabled table = load_table(table_path, spec);

  const auto projected = project_credit(params, spec, table, budget);
  const DiscreteArch argmax = project_argmax(params, spec);
  Json out = {{"arch", arch_to_json(projected.arch)},
              {"argmax_latency", discrete_latency(argmax, table, spec)},
              {"projected_latency", projected.latency},
              {"credit_argmax", credit_of(argmax, params, spec)},
              {"credit_projected", projected.credit}};
  if (exact_mckp) {
    const DiscreteArch greedy = project_credit_greedy(params, spec, table, budget);
    out["greedy_arch"] = arch_to_json(greedy);
    out["greedy_latency"] = discrete_latency(greedy, table, spec);
    out["credit_greedy"] = credit_of(greedy, params, spec);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_enumerate(const std::string& space_path, const std::string& table_path,
                  const std::string& objective_path, double budget,
                  const std::string& out_dir) {
  const SpaceSpec spec = load_space(space_path);
  const LatencyTabled table = load_table(table_path, spec);
  const ObjectiveSpecd obj = load_objective(objective_path, spec);
  const auto oracle = enumerate_space(spec, table, obj, budget);

  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  csv << "arch_json,latency_ms,score\n";
  for (std::size_t i = 0; i < oracle.archs.size(); ++i) {
    std::string arch = arch_to_json(oracle.archs[i]).dump();
    std::string quoted = "\"";
    for (char c : arch) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    quoted += '"';
    csv << quoted << ',' << format_double(oracle.latency(static_cast<Index>(i)))
        << ',' << format_double(oracle.score(static_cast<Index>(i))) << '\n';
  }
  write_text_file(out_dir + "/enumeration.csv", csv.str());

  Json summary = {{"count", oracle.archs.size()},
                  {"count_exact", count_space(spec).to_string()},
                  {"budget_ms", std::isfinite(budget) ? Json(budget) : Json()}};
  if (oracle.best_feasible >= 0) {
    summary["best_feasible"] = {
        {"arch", arch_to_json(
                     oracle.archs[static_cast<std::size_t>(oracle.best_feasible)])},
        {"latency_ms", oracle.latency(oracle.best_feasible)},
        {"score", oracle.score(oracle.best_feasible)}};
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_gen(const std::string& kind, std::uint64_t seed, Index stages,
            Index max_depth, Index configs, Index min_depth,
            const std::string& space_path, double noise,
            const std::string& obj_kind, double noise_sd, int batch_size,
            const std::string& out_path) {
  Json out;
  if (kind == "space") {
    out = space_to_json(gen_space(stages, max_depth, configs, min_depth));
  } else if (kind == "table") {
    if (space_path.empty())
      throw Error(ErrorKind::Input, "gen table needs --space");
    const SpaceSpec spec = load_space(space_path);
    out = table_to_json(gen_table(spec, seed, noise), spec);
  } else if (kind == "objective") {
    if (space_path.empty())
      throw Error(ErrorKind::Input, "gen objective needs --space");
    const SpaceSpec spec = load_space(space_path);
    out = objective_to_json(
        gen_objective(spec, seed, objective_kind_from_string(obj_kind), noise_sd,
                      batch_size),
        spec);
  } else {
    throw Error(ErrorKind::Input, "unknown gen kind: " + kind);
  }
  write_text_file(out_path, out.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hard-constrained differentiable architecture search"};
  app.require_subcommand(1);

  std::string space_path, table_path, objective_path, params_path;
  std::string out_dir = "out";
  std::string out_file = "out.json";
  std::string init_kind = "balanced";
  std::string schedule = "fw4";
  std::string block_rule = "alternate";
  std::string gen_kind = "table";
  std::string obj_kind = "linear_surrogate";
  double budget = kInf;
  std::uint64_t seed = 0;
  int iters = 500;
  Index dim = 10;
  std::vector<double> lambdas = {0.1, 1.0, 10.0, 100.0};
  double lr = 0.05;
  int samples = 100;
  int mc_samples = 100000;
  bool exact_mckp = false;
  Index stages = 2, max_depth = 3, configs = 3, min_depth = 2;
  double noise = 0.05, noise_sd = 0.01;
  int batch_size = 64;

  auto* search = app.add_subcommand("search", "run the constrained search");
  search->add_option("--space", space_path)->required();
  search->add_option("--latency-table", table_path)->required();
  search->add_option("--objective", objective_path)->required();
  search->add_option("--budget-ms", budget)->required();
  search->add_option("--iters", iters);
  search->add_option("--seed", seed);
  search->add_option("--init", init_kind)
      ->check(CLI::IsMember({"lightest", "balanced"}));
  search->add_option("--schedule", schedule);
  search->add_option("--block-rule", block_rule)
      ->check(CLI::IsMember({"random", "alternate"}));
  search->add_flag("--exact-mckp", exact_mckp);
  search->add_option("--out", out_dir);

  auto* toy = app.add_subcommand("toy", "toy FW vs penalty-GD comparison");
  toy->add_option("--dim", dim);
  toy->add_option("--iters", iters);
  toy->add_option("--lambdas", lambdas);
  toy->add_option("--lr", lr);
  toy->add_option("--seed", seed);
  toy->add_option("--out", out_dir);

  auto* validate =
      app.add_subcommand("validate-latency", "latency formula vs sampling");
  validate->add_option("--space", space_path)->required();
  validate->add_option("--latency-table", table_path)->required();
  validate->add_option("--samples", samples);
  validate->add_option("--mc-samples", mc_samples);
  validate->add_option("--seed", seed);
  validate->add_option("--out", out_dir);

  auto* project = app.add_subcommand("project", "discretize a continuous point");
  project->add_option("--params", params_path)->required();
  project->add_option("--latency-table", table_path)->required();
  project->add_option("--budget-ms,--budget", budget)->required();
  project->add_option("--space", space_path);
  project->add_flag("--exact-mckp", exact_mckp);

  auto* enumerate = app.add_subcommand("enumerate", "brute-force a small space");
  enumerate->add_option("--space", space_path)->required();
  enumerate->add_option("--latency-table", table_path)->required();
  enumerate->add_option("--objective", objective_path)->required();
  enumerate->add_option("--budget-ms", budget);
  enumerate->add_option("--out", out_dir);

  auto* gen = app.add_subcommand("gen", "write a synthetic instance");
  gen->add_option("kind", gen_kind)
      ->check(CLI::IsMember({"space", "table", "objective"}));
  gen->add_option("--seed", seed);
  gen->add_option("--stages", stages);
  gen->add_option("--max-depth", max_depth);
  gen->add_option("--configs", configs);
  gen->add_option("--min-depth", min_depth);
  gen->add_option("--space", space_path);
  gen->add_option("--noise", noise);
  gen->add_option("--objective-kind", obj_kind);
  gen->add_option("--noise-sd", noise_sd);
  gen->add_option("--batch-size", batch_size);
  gen->add_option("--out", out_file);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::uint64_t run_seed = effective_seed(seed);
    if (search->parsed())
      return cmd_search(space_path, table_path, objective_path, budget, iters,
                        run_seed, init_kind, schedule, block_rule, exact_mckp,
                        out_dir);
    if (toy->parsed())
      return cmd_toy(dim, iters, lambdas, lr, run_seed, out_dir);
    if (validate->parsed())
      return cmd_validate_latency(space_path, table_path, samples, mc_samples,
                                  run_seed, out_dir);
    if (project->parsed())
      return cmd_project(params_path, table_path, budget, space_path, exact_mckp);
    if (enumerate->parsed())
      return cmd_enumerate(space_path, table_path, objective_path, budget,
                           out_dir);
    if (gen->parsed())
      return cmd_gen(gen_kind, run_seed, stages, max_depth, configs, min_depth,
                     space_path, noise, obj_kind, noise_sd, batch_size, out_file);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what()
              << " (minimal achievable: " << e.minimal_cost() << " ms)\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
