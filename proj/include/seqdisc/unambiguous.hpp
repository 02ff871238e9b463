#ifndef SEQDISC_UNAMBIGUOUS_HPP
#define SEQDISC_UNAMBIGUOUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqdisc/ensemble.hpp"
#include "seqdisc/sdp.hpp"

namespace seqdisc {

/// Whether every state of an ensemble can be identified without error.
/// State j is identifiable iff removing it shrinks the joint support.
struct UdFeasibility {
  std::vector<bool> verdicts;
  bool overall = false;
  Index support_rank = 0;
  /// Rank of the joint support with state j removed (empty when not computed).
  std::vector<Index> removed_support_ranks;
  /// Projector distance between the full and the reduced supports.
  std::vector<double> distances;
  /// Component reports, filled by the per-component sequence mode.
  std::vector<UdFeasibility> components;
};

UdFeasibility check_ud_feasible(const Ensemble& e, const Tolerances& tol = {});

enum class FeasibilityMode { PerComponent, Direct };

/// Sequence feasibility with one verdict per tuple (lexicographic order).
/// PerComponent combines the component verdicts; Direct materializes the
/// sequence ensemble (up to `cap`) and checks it as a plain ensemble.
UdFeasibility check_sequence_ud_feasible(const std::vector<Ensemble>& components,
                                         FeasibilityMode mode, Index cap = 64,
                                         const Tolerances& tol = {});

/// An ensemble conjugated into the support of its average state.
struct RestrictedEnsemble {
  Ensemble ensemble;
  /// Orthonormal basis V of the joint support in the original space.
  Subspace support;
};

RestrictedEnsemble restrict_to_support(const Ensemble& e, const Tolerances& tol = {});

/// Intersection of the kernels of every state other than j, in the space the
/// ensemble lives in. Rank 0 means state j is never conclusively identified.
Subspace compute_theta(const Ensemble& e, Index j, const Tolerances& tol = {});
/// compute_theta for every j, sharing the kernel computations.
std::vector<Subspace> compute_thetas(const Ensemble& e, const Tolerances& tol = {});

/// compute_thetas on the joint-support restriction, lifted back to C^dim.
std::vector<Subspace> compute_supported_thetas(const Ensemble& e, const Tolerances& tol = {});

/// Constraint residuals of a candidate solution (thetas, deltas, Z):
///   primal:  sum_j Theta_j Delta_j Theta_j^+ <= I,  Delta_j >= 0
///   dual:    Z >= 0,  Theta_j^+ (Z - q_j sigma_j) Theta_j >= 0
/// Residuals are the largest violations (0 when satisfied).
struct UdResiduals {
  double primal_value = 0.0;
  /// Tr(Z)
  double dual_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// max over i != j of Tr(sigma_i M_j)
  double unambiguity = 0.0;
};

UdResiduals evaluate_ud_solution(const Ensemble& e, const std::vector<Subspace>& thetas,
                                 const std::vector<CMatrix>& deltas, const CMatrix& z);

struct UdSolution {
  double p = 0.0;
  /// Delta_j (r_j x r_j), empty for rank-0 thetas.
  std::vector<CMatrix> deltas;
  std::vector<Subspace> thetas;
  CMatrix dual_z;
  /// Conclusive effects Theta_j Delta_j Theta_j^+ followed by the inconclusive
  /// effect I - sum_j M_j.
  Povm povm;
  UdResiduals residuals;
  /// Solver run; empty when no solve was needed or the solution was built.
  std::optional<SdpSolution> sdp;
};

/// maximize sum_j q_j Tr(sigma_j Theta_j Delta_j Theta_j^+)
/// s.t. sum_j Theta_j Delta_j Theta_j^+ <= I, Delta_j >= 0,
/// solved on the joint support of the ensemble. Throws NumericError when the
/// solver does not reach optimal status.
UdSolution solve_unambiguous(const Ensemble& e, const SdpOptions& options = {},
                             const Tolerances& tol = {});

/// Tensor-product candidate for the sequence ensemble built from local
/// solutions. Throws NumericError when a local solution has primal or dual
/// residuals above `local_residual_tol`.
UdSolution build_product_ud_solution(const std::vector<Ensemble>& components,
                                     const std::vector<UdSolution>& local_solutions,
                                     Index cap = 64, double local_residual_tol = 1e-7);

struct KernelDecompositionCheck {
  bool equal = false;
  double distance = 0.0;
  Index direct_rank = 0;
  Index tensored_rank = 0;
};

/// Theta of one tuple computed twice: by intersecting the kernels of every
/// other sequence state, and by tensoring the component thetas.
KernelDecompositionCheck verify_kernel_decomposition(const std::vector<Ensemble>& components,
                                                     const SequenceTuple& tuple,
                                                     Index cap = 64, const Tolerances& tol = {});

struct UdProductReport {
  std::vector<double> local_values;
  double product_value = 0.0;
  std::optional<double> direct_value;
  std::optional<double> abs_diff;
  /// Residuals of the tensor-product candidate on the sequence program.
  std::optional<UdResiduals> constructed;
  /// Largest theta projector distance between the two routes, over checked tuples.
  std::optional<double> theta_max_distance;
  Index tuples_checked = 0;
  Index tuples_mismatched = 0;
  std::vector<SdpSolution> solver_runs;
  std::vector<std::string> notes;
  /// A stage ended in a numeric failure rather than a failed comparison.
  bool solver_failure = false;
  double tolerance = 1e-5;
  double construction_tol = 1e-7;
  bool pass = false;
};

struct UdProductOptions {
  Index direct_cap = 64;
  double tol = 1e-5;
  double construction_tol = 1e-7;
  /// Check the theta decomposition on this many tuples (all when empty),
  /// picked by a seeded shuffle.
  std::optional<Index> sample_tuples;
  std::uint64_t seed = 1;
  SdpOptions sdp;
  Tolerances tolerances;
};

UdProductReport verify_product_unambiguous(const std::vector<Ensemble>& components,
                                           const UdProductOptions& options = {});

}  // namespace seqdisc

#endif  // SEQDISC_UNAMBIGUOUS_HPP
