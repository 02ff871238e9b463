#ifndef SEQDISC_MINERROR_HPP
#define SEQDISC_MINERROR_HPP

#include <optional>
#include <string>
#include <vector>

#include "seqdisc/ensemble.hpp"
#include "seqdisc/sdp.hpp"

namespace seqdisc {

struct HelstromResult {
  double p = 0.0;
  Povm povm;
};

/// Closed-form optimum for two states: p = (1 + ||q1 rho1 - q2 rho2||_1) / 2.
/// Outcome 0 projects onto the nonnegative eigenspace of q1 rho1 - q2 rho2
/// (the null space goes to outcome 0), outcome 1 onto the negative one.
HelstromResult helstrom_two(const Ensemble& e, const Tolerances& tol = {});

struct MinErrorResult {
  double p = 0.0;
  Povm povm;
  /// Dual operator Z with Z >= q_j sigma_j for every j and Tr(Z) = p.
  CMatrix dual_z;
  SdpSolution sdp;
  /// Extra solves at tightened tolerances needed before the POVM certified.
  int refinements = 0;
};

/// Certificate tolerance solve_min_error guarantees for its POVM.
inline constexpr double kMinErrorCertificateTol = 1e-6;

/// maximize sum_i q_i Tr(sigma_i M_i)  s.t.  sum_i M_i = I, M_i PSD.
/// Throws NumericError if the solver does not reach optimal status. When
/// the returned POVM misses its certificate at kMinErrorCertificateTol, the
/// program is re-solved (up to three times) with tolerances 100x tighter.
MinErrorResult solve_min_error(const Ensemble& e, const SdpOptions& options = {});

/// The assembled real program solved by solve_min_error.
ConicProgram min_error_program(const Ensemble& e);

/// Optimality witnesses for a minimum-error measurement: for each j the
/// smallest eigenvalue of Gamma - q_j sigma_j with
/// Gamma = Herm(sum_i q_i sigma_i M_i). Passes iff every witness is at least
/// -tol * max(1, lambda_max).
struct HyklCertificate {
  std::vector<double> min_eigenvalues;
  bool pass = false;
  double tolerance = 0.0;
  /// Largest anti-Hermitian defect of sum_i q_i sigma_i M_i before symmetrizing.
  double asymmetry = 0.0;
};

HyklCertificate check_hykl_certificate(const Ensemble& e, const Povm& m, double tol = 1e-6);
/// Same check on a sequence ensemble, with Gamma assembled lazily by tuple.
HyklCertificate check_hykl_certificate(const SequenceEnsemble& e, const Povm& m,
                                       double tol = 1e-6);

struct ProductTheoremReport {
  std::vector<double> local_values;
  double product_value = 0.0;
  /// Optimum of the sequence ensemble solved directly; empty when skipped.
  std::optional<double> direct_value;
  std::optional<double> abs_diff;
  /// Certificates of each local optimal measurement on its own ensemble.
  std::vector<HyklCertificate> local_certificates;
  /// Certificate of the tensored local measurement on the sequence ensemble.
  std::optional<HyklCertificate> tensored_certificate;
  /// Value of the tensored local measurement on the sequence ensemble.
  std::optional<double> tensored_value;
  std::vector<SdpSolution> solver_runs;
  std::vector<std::string> notes;
  /// A stage ended in a numeric failure rather than a failed comparison.
  bool solver_failure = false;
  double tolerance = 1e-5;
  bool pass = false;
};

struct ProductCheckOptions {
  Index direct_cap = 64;
  double tol = 1e-5;
  double certificate_tol = 1e-6;
  SdpOptions sdp;
};

/// Solves each component, tensors the local optimal measurements, certifies
/// the tensored measurement on the sequence ensemble, and compares the
/// product of local optima against a direct solve (skipped past direct_cap).
ProductTheoremReport verify_product_min_error(const std::vector<Ensemble>& components,
                                              const ProductCheckOptions& options = {});

}  // namespace seqdisc

#endif  // SEQDISC_MINERROR_HPP
