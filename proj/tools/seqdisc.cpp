#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqdisc/commands.hpp"

namespace {

seqdisc::Index dimension_cap_from_env() {
  const char* raw = std::getenv("SEQDISC_DIM_CAP");
  if (raw == nullptr || *raw == '\0') return 64;
  try {
    std::size_t used = 0;
    const long long cap = std::stoll(raw, &used);
    if (used == std::string(raw).size() && cap > 0) return static_cast<seqdisc::Index>(cap);
  } catch (const std::exception&) {
  }
  std::cerr << "seqdisc: error: SEQDISC_DIM_CAP must be a positive integer, got \"" << raw
            << "\"\n";
  std::exit(seqdisc::kExitInputError);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace seqdisc;

  CLI::App app{"Optimal discrimination of quantum state ensembles and sequences"};
  app.set_version_flag("--version", SEQDISC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  ReportOptions report;
  for (int i = 1; i < argc; ++i) report.argv.emplace_back(argv[i]);
  app.add_flag("--json", report.json, "Emit the machine-readable report");
  app.add_flag("--timing", report.timing, "Include wall time in the report");

  const Index cap = dimension_cap_from_env();
  std::string paradigm = "min-error";
  const std::vector<std::string> paradigms{"min-error", "unambiguous"};

  SolveArgs solve;
  double solve_tol = 0.0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one ensemble");
  solve_cmd->add_option("--paradigm", paradigm)->check(CLI::IsMember(paradigms));
  solve_cmd->add_option("ensemble", solve.ensemble, "Ensemble file")->required();
  auto* emit_opt = solve_cmd->add_option("--emit-povm", "Write the optimal POVM to this path");
  auto* solve_tol_opt = solve_cmd->add_option("--tol", solve_tol, "Certificate tolerance");

  VerifyProductArgs verify;
  verify.direct_cap = cap;
  Index sample_tuples = 0;
  auto* verify_cmd = app.add_subcommand("verify-product", "Compare product of optima to a direct solve");
  verify_cmd->add_option("--paradigm", paradigm)->check(CLI::IsMember(paradigms));
  verify_cmd->add_option("components", verify.components, "Component ensemble files")
      ->required();
  verify_cmd->add_option("--tol", verify.tol, "Product comparison tolerance");
  verify_cmd->add_option("--direct-cap", verify.direct_cap, "Largest sequence dimension solved directly")
      ->check(CLI::PositiveNumber);
  auto* sample_opt = verify_cmd->add_option("--sample-tuples", sample_tuples,
                                            "Check the kernel decomposition on this many tuples")
                         ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify.seed, "Seed for tuple sampling");

  CheckUdArgs check;
  check.direct_cap = cap;
  std::vector<std::string> random_tokens;
  auto* check_cmd = app.add_subcommand("check-ud", "Unambiguous discrimination feasibility");
  check_cmd->add_option("components", check.components, "Component ensemble files");
  auto* random_opt = check_cmd->add_option("--random", random_tokens,
                                           "Random instances: d=D l=L k=K seed=S trials=T");
  check_cmd->add_option("--direct-cap", check.direct_cap)->check(CLI::PositiveNumber);

  SimulateArgs simulate;
  simulate.direct_cap = cap;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo run of the tensored optimal measurement");
  simulate_cmd->add_option("--paradigm", paradigm)->check(CLI::IsMember(paradigms));
  simulate_cmd->add_option("components", simulate.components, "Component ensemble files")
      ->required();
  simulate_cmd->add_option("--shots", simulate.shots)->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", simulate.seed)->required();

  CertifyArgs certify;
  auto* certify_cmd = app.add_subcommand("certify", "Decide optimality of a given measurement");
  certify_cmd->add_option("ensemble", certify.ensemble)->required();
  certify_cmd->add_option("povm", certify.povm)->required();
  certify_cmd->add_option("--tol", certify.tol, "Certificate tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve_cmd->parsed()) {
      solve.paradigm = parse_paradigm(paradigm);
      if (*emit_opt) solve.emit_povm = emit_opt->as<std::string>();
      if (*solve_tol_opt) solve.tol = solve_tol;
      return cmd_solve(solve, report, std::cout, std::cerr);
    }
    if (verify_cmd->parsed()) {
      verify.paradigm = parse_paradigm(paradigm);
      if (*sample_opt) verify.sample_tuples = sample_tuples;
      return cmd_verify_product(verify, report, std::cout, std::cerr);
    }
    if (check_cmd->parsed()) {
      if (*random_opt) check.random = parse_random_spec(random_tokens);
      if (!check.random && check.components.empty()) {
        std::cerr << "seqdisc: error: check-ud needs ensemble files or --random\n";
        return kExitInputError;
      }
      return cmd_check_ud(check, report, std::cout, std::cerr);
    }
    if (simulate_cmd->parsed()) {
      simulate.paradigm = parse_paradigm(paradigm);
      return cmd_simulate(simulate, report, std::cout, std::cerr);
    }
    if (certify_cmd->parsed()) return cmd_certify(certify, report, std::cout, std::cerr);
  } catch (const seqdisc::Error& e) {
    std::cerr << "seqdisc: error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
