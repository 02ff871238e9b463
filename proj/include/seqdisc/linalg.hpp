#ifndef SEQDISC_LINALG_HPP
#define SEQDISC_LINALG_HPP

#include <span>
#include <string>
#include <vector>

#include "seqdisc/types.hpp"

namespace seqdisc {

// ---------------------------------------------------------------------------
// Hermitian helpers
// ---------------------------------------------------------------------------

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Largest |H(i,j) - conj(H(j,i))|.
double hermiticity_defect(const CMatrix& h);

/// Throws InvalidInput if `h` is not square or not Hermitian within `tol`,
/// or if any entry is non-finite. `what` names the offending object.
void require_hermitian(const CMatrix& h, double tol, const std::string& what);

template <typename Derived>
typename Derived::PlainObject hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / 2;
}

struct EigenDecomposition {
  RVector values;   // descending
  CMatrix vectors;  // orthonormal columns, phase-fixed
};

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are returned in
/// descending order; each eigenvector is phase-fixed so that its first
/// component with modulus above 1e-10 is real and positive.
EigenDecomposition eig_hermitian(const CMatrix& h, double hermiticity_tol = 1e-12);

/// Eigenvalues only, descending.
RVector eigenvalues_hermitian(const CMatrix& h);

// ---------------------------------------------------------------------------
// Kronecker products
// ---------------------------------------------------------------------------

/// Kronecker product, entry [(i*rb+p), (j*cb+q)] = A(i,j)*B(p,q).
/// Throws CapacityError when either result dimension exceeds `cap`.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    Index cap = kDefaultKronCap) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (rows > cap || cols > cap) {
    throw CapacityError("Kronecker product of size " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " exceeds dimension cap " +
                        std::to_string(cap));
  }
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Left-to-right Kronecker product of a nonempty list.
CMatrix kron_all(std::span<const CMatrix> factors, Index cap = kDefaultKronCap);

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

/// A subspace of C^n stored as an orthonormal basis (n x rank).
class Subspace {
 public:
  Subspace() = default;

  /// Wraps `basis`, which must have orthonormal columns to 1e-10.
  explicit Subspace(CMatrix basis);

  static Subspace zero(Index ambient_dim);
  static Subspace full(Index ambient_dim);
  /// Orthonormal basis of the column span of `columns`.
  static Subspace span_of(const CMatrix& columns, double rank_tol = 1e-9);

  Index ambient_dim() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }
  const CMatrix& basis() const { return basis_; }
  CMatrix projector() const { return basis_ * basis_.adjoint(); }

  /// Lifts a subspace expressed in the coordinates of `embedding` (columns of
  /// an isometry into a larger space) back to the larger space.
  Subspace lifted(const CMatrix& embedding) const;

 private:
  CMatrix basis_ = CMatrix::Zero(0, 0);
};

/// Eigenspace of eigenvalues below rank_tol * lambda_max (all of C^n if
/// lambda_max <= 0).
Subspace kernel_basis(const CMatrix& rho, const Tolerances& tol = {});
/// Orthogonal complement of kernel_basis.
Subspace support_basis(const CMatrix& rho, const Tolerances& tol = {});

Subspace orthogonal_complement(const Subspace& s);
Subspace subspace_sum(std::span<const Subspace> spaces, double rank_tol = 1e-9);
Subspace subspace_sum(const Subspace& a, const Subspace& b, double rank_tol = 1e-9);
/// complement(sum(complements)).
Subspace subspace_intersection(std::span<const Subspace> spaces, double rank_tol = 1e-9);
Subspace subspace_intersection(const Subspace& a, const Subspace& b, double rank_tol = 1e-9);
/// Tensor product of subspaces (Kronecker product of orthonormal bases).
Subspace subspace_tensor(const Subspace& a, const Subspace& b, Index cap = kDefaultKronCap);
Subspace subspace_tensor(std::span<const Subspace> factors, Index cap = kDefaultKronCap);

/// Frobenius norm of the difference of the orthogonal projectors.
double projector_distance(const Subspace& a, const Subspace& b);
bool subspace_equal(const Subspace& a, const Subspace& b, double tol = 1e-8);
/// True when `inner` is contained in `outer`: ||(I - P_outer) B_inner||_F <= tol.
bool subspace_contains(const Subspace& outer, const Subspace& inner, double tol = 1e-8);
/// Norm of the component of v orthogonal to s.
double distance_to_subspace(const Subspace& s, const CVector& v);

// ---------------------------------------------------------------------------
// Spectral functions
// ---------------------------------------------------------------------------

/// Sum of absolute eigenvalues.
double trace_norm(const CMatrix& h);

struct PsdCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

/// psd iff lambda_min >= -tol * max(1, lambda_max).
PsdCheck is_psd(const CMatrix& h, double tol = 1e-9);

}  // namespace seqdisc

#endif  // SEQDISC_LINALG_HPP
