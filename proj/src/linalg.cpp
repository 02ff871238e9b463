#include "seqdisc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seqdisc {

void Tolerances::validate() const {
  if (!(rank_tol >= 0) || !(psd_tol >= 0) || !(subspace_eq_tol >= 0) ||
      !(hermiticity_tol >= 0)) {
    throw InvalidInput("tolerances must be nonnegative");
  }
}

double hermiticity_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(h - h.adjoint());
}

void require_hermitian(const CMatrix& h, double tol, const std::string& what) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw InvalidInput(what + ": expected a nonempty square matrix, got " +
                       std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
  }
  if (!h.allFinite()) throw InvalidInput(what + ": non-finite entry");
  const double defect = hermiticity_defect(h);
  if (defect > tol) {
    std::ostringstream os;
    os << what << ": not Hermitian (defect " << defect << " > " << tol << ")";
    throw InvalidInput(os.str());
  }
}

namespace {

void fix_phase(Eigen::Ref<CVector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-10) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(std::abs(v(i)), 0.0);
      return;
    }
  }
}

}  // namespace

EigenDecomposition eig_hermitian(const CMatrix& h, double hermiticity_tol) {
  require_hermitian(h, hermiticity_tol, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) {
    throw NumericError("eig_hermitian: no convergence after " +
                       std::to_string(Eigen::SelfAdjointEigenSolver<CMatrix>::m_maxIterations *
                                      h.rows()) +
                       " QR iterations (dimension " + std::to_string(h.rows()) + ")");
  }
  const Index n = h.rows();
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) fix_phase(out.vectors.col(j));
  return out;
}

RVector eigenvalues_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalues_hermitian: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

CMatrix kron_all(std::span<const CMatrix> factors, Index cap) {
  if (factors.empty()) throw InvalidInput("kron_all: empty factor list");
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i], cap);
  return out;
}

// ---------------------------------------------------------------------------

Subspace::Subspace(CMatrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() > basis_.rows()) {
    throw InvalidInput("Subspace: rank exceeds ambient dimension");
  }
  if (!basis_.allFinite()) throw InvalidInput("Subspace: non-finite basis entry");
  const CMatrix gram = basis_.adjoint() * basis_;
  if (max_abs(gram - CMatrix::Identity(rank(), rank())) > 1e-10) {
    throw InvalidInput("Subspace: basis columns are not orthonormal");
  }
}

Subspace Subspace::zero(Index ambient_dim) {
  Subspace s;
  s.basis_ = CMatrix::Zero(ambient_dim, 0);
  return s;
}

Subspace Subspace::full(Index ambient_dim) {
  Subspace s;
  s.basis_ = CMatrix::Identity(ambient_dim, ambient_dim);
  return s;
}

Subspace Subspace::span_of(const CMatrix& columns, double rank_tol) {
  const Index n = columns.rows();
  if (columns.cols() == 0) return zero(n);
  Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return zero(n);
  const double threshold = rank_tol * sv(0);
  Index r = 0;
  while (r < sv.size() && sv(r) > threshold) ++r;
  Subspace s;
  s.basis_ = svd.matrixU().leftCols(r);
  for (Index j = 0; j < r; ++j) fix_phase(s.basis_.col(j));
  return s;
}

Subspace Subspace::lifted(const CMatrix& embedding) const {
  if (embedding.cols() != ambient_dim()) {
    throw InvalidInput("Subspace::lifted: embedding has " + std::to_string(embedding.cols()) +
                       " columns, subspace ambient dimension is " +
                       std::to_string(ambient_dim()));
  }
  Subspace s;
  s.basis_ = embedding * basis_;
  return s;
}

namespace {

Subspace eigen_threshold_split(const CMatrix& rho, const Tolerances& tol, bool want_kernel) {
  const Index n = rho.rows();
  const EigenDecomposition eig = eig_hermitian(rho, tol.hermiticity_tol);
  const double lmax = eig.values.size() ? eig.values(0) : 0.0;
  if (lmax <= 0.0) return want_kernel ? Subspace::full(n) : Subspace::zero(n);
  const double threshold = tol.rank_tol * lmax;
  Index support_rank = 0;
  while (support_rank < n && eig.values(support_rank) >= threshold) ++support_rank;
  if (want_kernel) {
    return Subspace(eig.vectors.rightCols(n - support_rank));
  }
  return Subspace(eig.vectors.leftCols(support_rank));
}

void require_same_ambient(std::span<const Subspace> spaces, const char* what) {
  if (spaces.empty()) throw InvalidInput(std::string(what) + ": empty subspace list");
  const Index n = spaces.front().ambient_dim();
  for (const auto& s : spaces) {
    if (s.ambient_dim() != n) {
      throw InvalidInput(std::string(what) + ": ambient dimension mismatch (" +
                         std::to_string(n) + " vs " + std::to_string(s.ambient_dim()) + ")");
    }
  }
}

}  // namespace

Subspace kernel_basis(const CMatrix& rho, const Tolerances& tol) {
  return eigen_threshold_split(rho, tol, true);
}

Subspace support_basis(const CMatrix& rho, const Tolerances& tol) {
  return eigen_threshold_split(rho, tol, false);
}

Subspace orthogonal_complement(const Subspace& s) {
  const Index n = s.ambient_dim();
  if (s.rank() == 0) return Subspace::full(n);
  if (s.rank() == n) return Subspace::zero(n);
  const CMatrix residual = CMatrix::Identity(n, n) - s.projector();
  const EigenDecomposition eig = eig_hermitian(hermitian_part(residual), 1e-8);
  Index r = 0;
  while (r < n && eig.values(r) > 0.5) ++r;
  return Subspace(eig.vectors.leftCols(r));
}

Subspace subspace_sum(std::span<const Subspace> spaces, double rank_tol) {
  require_same_ambient(spaces, "subspace_sum");
  const Index n = spaces.front().ambient_dim();
  Index total = 0;
  for (const auto& s : spaces) total += s.rank();
  CMatrix columns(n, total);
  Index at = 0;
  for (const auto& s : spaces) {
    columns.middleCols(at, s.rank()) = s.basis();
    at += s.rank();
  }
  return Subspace::span_of(columns, rank_tol);
}

Subspace subspace_sum(const Subspace& a, const Subspace& b, double rank_tol) {
  const Subspace pair[] = {a, b};
  return subspace_sum(std::span<const Subspace>(pair), rank_tol);
}

Subspace subspace_intersection(std::span<const Subspace> spaces, double rank_tol) {
  require_same_ambient(spaces, "subspace_intersection");
  std::vector<Subspace> complements;
  complements.reserve(spaces.size());
  for (const auto& s : spaces) complements.push_back(orthogonal_complement(s));
  return orthogonal_complement(subspace_sum(complements, rank_tol));
}

Subspace subspace_intersection(const Subspace& a, const Subspace& b, double rank_tol) {
  const Subspace pair[] = {a, b};
  return subspace_intersection(std::span<const Subspace>(pair), rank_tol);
}

Subspace subspace_tensor(const Subspace& a, const Subspace& b, Index cap) {
  return Subspace(kron(a.basis(), b.basis(), cap));
}

Subspace subspace_tensor(std::span<const Subspace> factors, Index cap) {
  if (factors.empty()) throw InvalidInput("subspace_tensor: empty factor list");
  Subspace out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = subspace_tensor(out, factors[i], cap);
  return out;
}

double projector_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw InvalidInput("projector_distance: ambient dimension mismatch");
  }
  return (a.projector() - b.projector()).norm();
}

bool subspace_equal(const Subspace& a, const Subspace& b, double tol) {
  return a.rank() == b.rank() && projector_distance(a, b) <= tol;
}

bool subspace_contains(const Subspace& outer, const Subspace& inner, double tol) {
  if (outer.ambient_dim() != inner.ambient_dim()) {
    throw InvalidInput("subspace_contains: ambient dimension mismatch");
  }
  const CMatrix residual = inner.basis() - outer.basis() * (outer.basis().adjoint() * inner.basis());
  return residual.norm() <= tol;
}

double distance_to_subspace(const Subspace& s, const CVector& v) {
  if (s.ambient_dim() != v.size()) {
    throw InvalidInput("distance_to_subspace: dimension mismatch");
  }
  return (v - s.basis() * (s.basis().adjoint() * v)).norm();
}

double trace_norm(const CMatrix& h) {
  require_hermitian(h, 1e-12, "trace_norm");
  return eigenvalues_hermitian(h).cwiseAbs().sum();
}

PsdCheck is_psd(const CMatrix& h, double tol) {
  PsdCheck out;
  if (h.size() == 0) {
    out.psd = true;
    return out;
  }
  const RVector ev = eigenvalues_hermitian(h);
  out.max_eigenvalue = ev(0);
  out.min_eigenvalue = ev(ev.size() - 1);
  out.psd = out.min_eigenvalue >= -tol * std::max(1.0, out.max_eigenvalue);
  return out;
}

}  // namespace seqdisc
