#include "seqdisc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace seqdisc {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_positive()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Index Rng::index(Index n) {
  if (n <= 0) throw InvalidInput("Rng::index: n must be positive");
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<Index>(x % bound);
}

namespace {

CMatrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  CMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace

CVector random_pure_vector(Rng& rng, Index d) {
  CVector v = gaussian_matrix(rng, d, 1).col(0);
  return v / v.norm();
}

CMatrix random_mixed_state(Rng& rng, Index d, Index rank) {
  const CMatrix g = gaussian_matrix(rng, d, std::clamp<Index>(rank, 1, d));
  const CMatrix w = g * g.adjoint();
  return hermitian_part(CMatrix(w / w.trace().real()));
}

CMatrix random_unitary(Rng& rng, Index d) {
  const CMatrix g = gaussian_matrix(rng, d, d);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

std::vector<double> random_priors(Rng& rng, Index n) {
  std::vector<double> q(static_cast<std::size_t>(n));
  for (auto& x : q) x = -std::log(rng.uniform_positive()) + 1e-12;
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  for (auto& x : q) x /= total;
  return q;
}

Ensemble random_ensemble(Rng& rng, const RandomEnsembleSpec& spec) {
  RawEnsemble raw;
  raw.priors = spec.equal_priors
                   ? std::vector<double>(static_cast<std::size_t>(spec.count),
                                         1.0 / static_cast<double>(spec.count))
                   : random_priors(rng, spec.count);
  for (Index j = 0; j < spec.count; ++j) {
    raw.states.push_back(spec.rank <= 1 ? pure_state(random_pure_vector(rng, spec.dim))
                                        : random_mixed_state(rng, spec.dim, spec.rank));
  }
  raw.label = "random";
  return Ensemble(std::move(raw));
}

std::vector<Index> shuffled_indices(Rng& rng, Index n) {
  std::vector<Index> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(rng.index(i + 1))]);
  }
  return out;
}

}  // namespace seqdisc
