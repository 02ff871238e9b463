// Reference computations for tests. Each routine takes a different numerical
// path from the library code it checks (SVD instead of eigensolvers, nullspace
// stacking instead of complement-of-sum, explicit index loops for Kronecker
// products, closed forms instead of SDP solves).
#ifndef SEQDISC_TESTS_ORACLES_HPP
#define SEQDISC_TESTS_ORACLES_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "seqdisc/ensemble.hpp"
#include "seqdisc/random.hpp"

namespace oracle {

using seqdisc::CMatrix;
using seqdisc::Complex;
using seqdisc::CVector;
using seqdisc::Index;

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index p = 0; p < b.rows(); ++p)
        for (Index q = 0; q < b.cols(); ++q)
          out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

inline double trace_norm(const CMatrix& h) {
  Eigen::JacobiSVD<CMatrix> svd(h);
  return svd.singularValues().sum();
}

inline double helstrom(double q1, const CMatrix& r1, double q2, const CMatrix& r2) {
  return 0.5 * (1.0 + trace_norm(q1 * r1 - q2 * r2));
}

/// Optimal unambiguous success for two pure states with overlap |s|.
inline double ud_two_pure(double q1, double q2, double overlap) {
  const double lo = std::min(q1, q2);
  const double hi = std::max(q1, q2);
  if (overlap <= std::sqrt(lo / hi)) return 1.0 - 2.0 * std::sqrt(q1 * q2) * overlap;
  return hi * (1.0 - overlap * overlap);
}

/// Orthogonal projector onto the column span of `columns` (SVD based).
inline CMatrix span_projector(const CMatrix& columns, double rel_tol = 1e-9) {
  const Index n = columns.rows();
  if (columns.cols() == 0) return CMatrix::Zero(n, n);
  Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  CMatrix p = CMatrix::Zero(n, n);
  for (Index i = 0; i < s.size(); ++i) {
    if (top > 0 && s(i) > rel_tol * top) p += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
  }
  return p;
}

/// Projector onto the common nullspace of the stacked matrices.
inline CMatrix common_null_projector(const std::vector<CMatrix>& mats, double rel_tol = 1e-9) {
  const Index n = mats.front().cols();
  CMatrix stacked(0, n);
  for (const auto& m : mats) {
    const double scale = m.norm();
    CMatrix next(stacked.rows() + m.rows(), n);
    next << stacked, (scale > 0 ? CMatrix(m / scale) : m);
    stacked = next;
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  CMatrix p = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const bool zero = i >= s.size() || top == 0.0 || s(i) <= rel_tol * top;
    if (zero) p += svd.matrixV().col(i) * svd.matrixV().col(i).adjoint();
  }
  return p;
}

inline double min_eig(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Square-root measurement M_i = rho^{-1/2} q_i sigma_i rho^{-1/2} on the
/// support of rho = sum_i q_i sigma_i (completed to the identity on outcome 0).
inline std::vector<CMatrix> square_root_measurement(const seqdisc::Ensemble& e) {
  const Index d = e.dim();
  CMatrix rho = CMatrix::Zero(d, d);
  for (Index i = 0; i < e.size(); ++i) rho += e.prior(i) * e.state(i);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  CMatrix inv_sqrt = CMatrix::Zero(d, d);
  CMatrix support = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam > 1e-12) {
      const CVector v = es.eigenvectors().col(k);
      inv_sqrt += (1.0 / std::sqrt(lam)) * v * v.adjoint();
      support += v * v.adjoint();
    }
  }
  std::vector<CMatrix> out;
  for (Index i = 0; i < e.size(); ++i) {
    out.push_back(inv_sqrt * (e.prior(i) * e.state(i)) * inv_sqrt);
  }
  out[0] += CMatrix::Identity(d, d) - support;
  return out;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

inline CMatrix random_hermitian(seqdisc::Rng& rng, Index d) {
  CMatrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return 0.5 * (g + g.adjoint());
}

inline CMatrix random_psd(seqdisc::Rng& rng, Index d, Index rank) {
  CMatrix g(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g * g.adjoint();
}

/// Random columns (not orthonormalized) spanning a generic subspace.
inline CMatrix random_columns(seqdisc::Rng& rng, Index d, Index rank) {
  CMatrix g(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g;
}

/// Random complete POVM with `n` effects: S^{-1/2} A_i S^{-1/2}, S = sum A_i.
inline std::vector<CMatrix> random_povm_effects(seqdisc::Rng& rng, Index d, Index n) {
  std::vector<CMatrix> a;
  CMatrix s = CMatrix::Zero(d, d);
  for (Index i = 0; i < n; ++i) {
    a.push_back(random_psd(rng, d, d));
    s += a.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  const CMatrix inv_sqrt = es.operatorInverseSqrt();
  std::vector<CMatrix> out;
  for (auto& x : a) {
    CMatrix m = inv_sqrt * x * inv_sqrt;
    out.push_back(0.5 * (m + m.adjoint()));
  }
  return out;
}

}  // namespace oracle

#endif  // SEQDISC_TESTS_ORACLES_HPP
