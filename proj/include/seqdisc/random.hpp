#ifndef SEQDISC_RANDOM_HPP
#define SEQDISC_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "seqdisc/ensemble.hpp"

namespace seqdisc {

/// Seedable generator with platform-independent draws: 64-bit Mersenne
/// Twister, uniforms built from the top 53 bits, normals by Box-Muller.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  Index index(Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Unit vector from the unitarily invariant distribution.
CVector random_pure_vector(Rng& rng, Index d);
/// G G^+ / Tr(G G^+) with G a d x rank complex Gaussian matrix.
CMatrix random_mixed_state(Rng& rng, Index d, Index rank);
/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
CMatrix random_unitary(Rng& rng, Index d);
/// Flat sample from the open probability simplex.
std::vector<double> random_priors(Rng& rng, Index n);

struct RandomEnsembleSpec {
  Index dim = 2;
  Index count = 2;
  /// Rank of each state; 1 gives pure states. Clamped to [1, dim].
  Index rank = 1;
  bool equal_priors = false;
};

Ensemble random_ensemble(Rng& rng, const RandomEnsembleSpec& spec);

/// Deterministic Fisher-Yates shuffle of 0..n-1.
std::vector<Index> shuffled_indices(Rng& rng, Index n);

}  // namespace seqdisc

#endif  // SEQDISC_RANDOM_HPP
