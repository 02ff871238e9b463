#ifndef SEQDISC_COMMANDS_HPP
#define SEQDISC_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqdisc/ensemble.hpp"

namespace seqdisc {

enum class Paradigm { MinError, Unambiguous };

Paradigm parse_paradigm(const std::string& name);
std::string to_string(Paradigm p);

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitInputError = 2,
  kExitSolverFailure = 3,
};

/// Output settings shared by every command.
struct ReportOptions {
  bool json = false;
  bool timing = false;
  /// Original command line, echoed into the report.
  std::vector<std::string> argv;
};

struct SolveArgs {
  Paradigm paradigm = Paradigm::MinError;
  std::string ensemble;
  std::optional<std::string> emit_povm;
  /// Certificate tolerance; defaults to 1e-6 (min-error) or 1e-7 (unambiguous).
  std::optional<double> tol;
};

struct VerifyProductArgs {
  Paradigm paradigm = Paradigm::MinError;
  std::vector<std::string> components;
  double tol = 1e-5;
  Index direct_cap = 64;
  std::optional<Index> sample_tuples;
  std::uint64_t seed = 1;
};

struct RandomCheckSpec {
  Index dim = 2;
  Index count = 2;
  Index length = 2;
  std::uint64_t seed = 1;
  Index trials = 1;
};

/// Parses "d=3 l=3 k=2 seed=7 trials=10" style tokens.
RandomCheckSpec parse_random_spec(const std::vector<std::string>& tokens);

struct CheckUdArgs {
  std::vector<std::string> components;
  std::optional<RandomCheckSpec> random;
  Index direct_cap = 64;
};

struct SimulateArgs {
  Paradigm paradigm = Paradigm::MinError;
  std::vector<std::string> components;
  std::int64_t shots = 1000;
  std::uint64_t seed = 1;
  Index direct_cap = 64;
};

struct CertifyArgs {
  std::string ensemble;
  std::string povm;
  double tol = 1e-6;
};

/// Each command writes its report to `out` and returns an ExitCode. Errors
/// are reported on `err`: input problems give kExitInputError, solver
/// failures kExitSolverFailure.
int cmd_solve(const SolveArgs& args, const ReportOptions& report, std::ostream& out,
              std::ostream& err);
int cmd_verify_product(const VerifyProductArgs& args, const ReportOptions& report,
                       std::ostream& out, std::ostream& err);
int cmd_check_ud(const CheckUdArgs& args, const ReportOptions& report, std::ostream& out,
                 std::ostream& err);
int cmd_simulate(const SimulateArgs& args, const ReportOptions& report, std::ostream& out,
                 std::ostream& err);
int cmd_certify(const CertifyArgs& args, const ReportOptions& report, std::ostream& out,
                std::ostream& err);

/// Outcome of sampling a fixed measurement on a sequence of states.
struct SimulationResult {
  std::int64_t shots = 0;
  std::int64_t successes = 0;
  std::int64_t inconclusive = 0;
  /// Conclusive outcomes that named the wrong tuple.
  std::int64_t misidentified = 0;
  double analytic_p = 0.0;
  double empirical_p = 0.0;
  double standard_error = 0.0;
};

/// Draws `shots` tuples by prior and an outcome per tuple by Born weight,
/// using the tensored optimal local measurement of `paradigm`.
SimulationResult simulate_sequence(Paradigm paradigm, const std::vector<Ensemble>& components,
                                   std::int64_t shots, std::uint64_t seed,
                                   Index cap = kDefaultKronCap);

}  // namespace seqdisc

#endif  // SEQDISC_COMMANDS_HPP
