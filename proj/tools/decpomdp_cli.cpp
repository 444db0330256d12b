#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "decpomdp/builtin.hpp"
#include "decpomdp/format.hpp"
#include "decpomdp/model.hpp"
#include "decpomdp/solver.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data (parse/validation/IO), 3 numeric
// or resource limits.
constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kNumericError = 3;

struct ModelSelection {
  std::string path;
  std::string builtin;
  double gamma_override = -1.0;  // negative means "use the file's discount"
};

void add_model_flags(CLI::App* cmd, ModelSelection* sel) {
  auto* model = cmd->add_option("--model", sel->path, "Path to a model file");
  auto* builtin =
      cmd->add_option("--builtin", sel->builtin, "Bundled model name (chain2, toy2agent)");
  model->excludes(builtin);
  cmd->add_option("--gamma", sel->gamma_override,
                  "Override the model's discount factor (must lie in (0,1))");
}

decpomdp::ModelDocument load_model(const ModelSelection& sel) {
  decpomdp::ModelDocument doc;
  if (!sel.builtin.empty()) {
    doc = decpomdp::parse_model_document(decpomdp::builtin_model_text(sel.builtin), sel.builtin);
  } else if (!sel.path.empty()) {
    std::ifstream in(sel.path, std::ios::binary);
    if (!in) throw decpomdp::ParseError(0, "cannot open '" + sel.path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    doc = decpomdp::parse_model_document(buffer.str(), sel.path);
  } else {
    throw CLI::ValidationError("one of --model or --builtin is required");
  }
  if (sel.gamma_override >= 0.0) {
    if (!(sel.gamma_override > 0.0 && sel.gamma_override < 1.0))
      throw CLI::ValidationError("--gamma must lie strictly inside (0,1)");
    doc.model.discount = sel.gamma_override;
  }
  return doc;
}

struct SolveFlags {
  ModelSelection model;
  std::string algo = "em";
  double epsilon = 0.1;
  int memory = 2;
  int iters = 100;
  std::uint64_t seed = 1;
  std::string trace_path;
  std::string policy_out;
  bool exact_j = false;
  std::string scheme = "random";
  double tol_j = 1e-8;
  double tol_policy = 1e-8;
  double lcap_mult = 4.0;
};

void add_solver_flags(CLI::App* cmd, SolveFlags* f) {
  add_model_flags(cmd, &f->model);
  cmd->add_option("--algo", f->algo, "Algorithm: em, bem or mbem")
      ->check(CLI::IsMember({"em", "bem", "mbem"}));
  cmd->add_option("--epsilon", f->epsilon, "E-step approximation bound (em/mbem)");
  cmd->add_option("--memory", f->memory, "Memory states per agent")->check(CLI::PositiveNumber);
  cmd->add_option("--iters", f->iters, "Outer iteration budget")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f->seed, "Policy initialization seed");
  cmd->add_flag("--exact-j", f->exact_j, "Measure J from an exact solve each iteration");
  cmd->add_option("--scheme", f->scheme, "Policy initialization: random or uniform")
      ->check(CLI::IsMember({"random", "uniform"}));
  cmd->add_option("--tol-j", f->tol_j, "Convergence tolerance on |ΔJ|");
  cmd->add_option("--tol-policy", f->tol_policy, "Convergence tolerance on policy change");
  cmd->add_option("--lcap-mult", f->lcap_mult, "mbem iteration cap as a multiple of T_max");
}

decpomdp::SolverConfig make_config(const SolveFlags& f, const decpomdp::DecPomdpModel& model,
                                   const std::string& algo) {
  decpomdp::SolverConfig cfg;
  if (algo == "em")
    cfg.algorithm = decpomdp::Algorithm::kEm;
  else if (algo == "bem")
    cfg.algorithm = decpomdp::Algorithm::kBem;
  else
    cfg.algorithm = decpomdp::Algorithm::kMbem;
  cfg.epsilon = f.epsilon;
  cfg.max_iterations = f.iters;
  cfg.j_tolerance = f.tol_j;
  cfg.policy_tolerance = f.tol_policy;
  cfg.memory_sizes.assign(model.num_agents, f.memory);
  cfg.seed = f.seed;
  cfg.init = f.scheme == "uniform" ? decpomdp::InitScheme::kUniform
                                   : decpomdp::InitScheme::kRandom;
  cfg.l_cap_multiplier = f.lcap_mult;
  cfg.exact_return = f.exact_j;
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw decpomdp::ParseError(0, "cannot write '" + path + "'");
  out << content;
}

int cmd_validate(const ModelSelection& sel) {
  decpomdp::DecPomdpModel model;
  if (!sel.builtin.empty()) {
    model = decpomdp::parse_model(decpomdp::builtin_model_text(sel.builtin), sel.builtin);
  } else {
    std::ifstream in(sel.path, std::ios::binary);
    if (!in) throw decpomdp::ParseError(0, "cannot open '" + sel.path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    model = decpomdp::parse_model(buffer.str(), sel.path);
  }
  const auto issues = decpomdp::validate_model(model);
  if (issues.empty()) {
    std::cout << "OK\n";
    return kOk;
  }
  for (const auto& issue : issues) std::cerr << issue << "\n";
  return kDataError;
}

int cmd_solve(const SolveFlags& f) {
  const decpomdp::ModelDocument doc = load_model(f.model);
  const decpomdp::SolverConfig cfg = make_config(f, doc.model, f.algo);
  const decpomdp::SolveResult result = decpomdp::run(doc.model, cfg);

  const std::string csv = decpomdp::write_trace_csv(result.trace);
  if (f.trace_path.empty())
    std::cout << csv;
  else
    write_file(f.trace_path, csv);
  if (!f.policy_out.empty()) write_file(f.policy_out, decpomdp::serialize_policy(result.policy));

  std::cerr << "algo=" << f.algo << " iterations=" << result.trace.size()
            << " J=" << result.trace.back().expected_return << "\n";
  return kOk;
}

int cmd_eval(const ModelSelection& sel, const std::string& policy_path) {
  const decpomdp::ModelDocument doc = load_model(sel);
  std::ifstream in(policy_path, std::ios::binary);
  if (!in) throw decpomdp::ParseError(0, "cannot open '" + policy_path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const decpomdp::JointPolicy policy = decpomdp::parse_policy(buffer.str());
  const auto issues = decpomdp::validate_policy(doc.model, policy);
  if (!issues.empty()) throw decpomdp::ParseError(0, issues.front());

  const decpomdp::JointChain chain = decpomdp::build_joint_chain(doc.model, policy);
  const decpomdp::EstepResult exact = decpomdp::bellman_solve(chain);
  std::cout << std::setprecision(17)
            << decpomdp::expected_return(chain, doc.model, policy, exact.frequency) << "\n";
  return kOk;
}

int cmd_bench(const SolveFlags& f, const std::string& prefix) {
  const decpomdp::ModelDocument doc = load_model(f.model);
  for (const std::string algo : {"em", "bem", "mbem"}) {
    const decpomdp::SolverConfig cfg = make_config(f, doc.model, algo);
    const decpomdp::SolveResult result = decpomdp::run(doc.model, cfg);
    const std::string path = prefix + algo + ".csv";
    write_file(path, decpomdp::write_trace_csv(result.trace));
    std::cerr << "algo=" << algo << " iterations=" << result.trace.size()
              << " J=" << result.trace.back().expected_return << " -> " << path << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite-horizon DEC-POMDP planning: EM, Bellman EM and modified Bellman EM"};
  app.require_subcommand(1);

  ModelSelection validate_sel;
  CLI::App* validate = app.add_subcommand("validate", "Lint a model file");
  add_model_flags(validate, &validate_sel);

  SolveFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "Run one algorithm and emit a trace");
  add_solver_flags(solve, &solve_flags);
  solve->add_option("--trace", solve_flags.trace_path, "Trace CSV path (stdout if omitted)");
  solve->add_option("--policy-out", solve_flags.policy_out, "Write the final policy here");

  ModelSelection eval_sel;
  std::string eval_policy;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy file exactly");
  add_model_flags(eval, &eval_sel);
  eval->add_option("--policy", eval_policy, "Policy file to evaluate")->required();

  SolveFlags bench_flags;
  std::string bench_prefix;
  CLI::App* bench = app.add_subcommand("bench", "Run em, bem and mbem; one CSV per algorithm");
  add_solver_flags(bench, &bench_flags);
  bench->add_option("--trace-prefix", bench_prefix, "Prefix for <prefix><algo>.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_sel);
    if (solve->parsed()) return cmd_solve(solve_flags);
    if (eval->parsed()) return cmd_eval(eval_sel, eval_policy);
    if (bench->parsed()) return cmd_bench(bench_flags, bench_prefix);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kUsageError;
  } catch (const decpomdp::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kDataError;
  } catch (const decpomdp::NumericError& e) {
    std::cerr << e.what() << "\n";
    return kNumericError;
  } catch (const decpomdp::ResourceError& e) {
    std::cerr << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kNumericError;
  }
  return kUsageError;
}
