#ifndef SEQDISC_SDP_HPP
#define SEQDISC_SDP_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "seqdisc/linalg.hpp"

namespace seqdisc {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Relation { Equal, LessEqual };
enum class Sense { Maximize, Minimize };

/// Coefficient of one constraint on one PSD block. The matrix is stored in
/// full (both triangles) and must be symmetric.
struct BlockTerm {
  Index block = 0;
  SparseMatrix coefficient;
};

struct LinearConstraint {
  std::vector<BlockTerm> terms;
  double rhs = 0.0;
  Relation relation = Relation::Equal;
};

/// optimize  sum_b <C_b, X_b>
/// s.t.      sum_b <A_ib, X_b>  (= or <=)  b_i,   X_b PSD.
///
/// The dual is  optimize b^T y  s.t.  sum_i y_i A_ib - C_b = S_b PSD  (with
/// y_i >= 0 for inequality rows when maximizing).
struct ConicProgram {
  std::vector<Index> block_sizes;
  std::vector<RMatrix> objective;  // one per block
  std::vector<LinearConstraint> constraints;
  Sense sense = Sense::Maximize;

  /// Throws InvalidInput when any structural invariant fails.
  void validate() const;
};

struct SdpOptions {
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.95;
  double initial_scale = 1.0;
  double divergence_threshold = 1e10;
};

enum class SdpStatus { Optimal, Infeasible, NumericFailure };

std::string to_string(SdpStatus s);

struct IterateRecord {
  int iteration = 0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericFailure;
  double primal_value = 0.0;
  double dual_value = 0.0;
  /// X_b for the program's blocks (internal inequality slacks omitted).
  std::vector<RMatrix> primal_blocks;
  /// y, one multiplier per constraint.
  RVector dual_multipliers;
  /// S_b = sum_i y_i A_ib - C_b for the program's blocks.
  std::vector<RMatrix> dual_slack_blocks;
  /// |primal - dual| / max(1, |primal|)
  double gap = 0.0;
  /// max |A(X) - b| over equality rows, with slacks for inequality rows.
  double primal_residual = 0.0;
  /// max entry of |A^T y - S - C|.
  double dual_residual = 0.0;
  /// <X, S> / max(1, |primal|)
  double complementarity = 0.0;
  int iterations = 0;
  std::vector<IterateRecord> history;
  std::string message;

  bool optimal() const { return status == SdpStatus::Optimal; }
};

/// Primal-dual interior-point solve (HKM direction, Mehrotra
/// predictor-corrector). Deterministic for identical inputs and options.
SdpSolution solve_sdp(const ConicProgram& program, const SdpOptions& options = {});

/// Writes the program in SDPA sparse format (inequality rows are first
/// turned into equalities with 1x1 slack blocks; a minimizing program is
/// negated). Entries are printed with 17 significant digits.
void write_sdpa(std::ostream& os, const ConicProgram& program);

// ---------------------------------------------------------------------------
// Complex Hermitian <-> real symmetric embedding
// ---------------------------------------------------------------------------

/// [[Re H, -Im H], [Im H, Re H]]. PSD iff H is PSD, and
/// Tr(embed(A) embed(B)) = 2 Tr(A B) for Hermitian A, B.
template <typename Derived>
RMatrix embed_complex(const Eigen::MatrixBase<Derived>& h) {
  const Index d = h.rows();
  RMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = h.real();
  out.topRightCorner(d, d) = -h.imag();
  out.bottomLeftCorner(d, d) = h.imag();
  out.bottomRightCorner(d, d) = h.real();
  return out;
}

/// Inverse of embed_complex that averages the two copies of each part and
/// re-Hermitizes, so noise outside the embedded subspace cancels.
CMatrix unembed_complex(const RMatrix& x);

/// Orthonormal (trace inner product) basis of the d x d Hermitian matrices,
/// ordered: E_pp for each p, then for p < q the pairs
/// (E_pq + E_qp)/sqrt2 and i(E_pq - E_qp)/sqrt2.
std::vector<CMatrix> hermitian_basis(Index d);
/// Coordinates Tr(E_k H) in hermitian_basis(d).
RVector hermitian_coordinates(const CMatrix& h);
CMatrix from_hermitian_coordinates(const RVector& coords, Index d);

/// embed_complex(h) / 2 as a pruned sparse matrix.
SparseMatrix half_embedding(const CMatrix& h);

}  // namespace seqdisc

#endif  // SEQDISC_SDP_HPP
