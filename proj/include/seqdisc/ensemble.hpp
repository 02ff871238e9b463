#ifndef SEQDISC_ENSEMBLE_HPP
#define SEQDISC_ENSEMBLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "seqdisc/linalg.hpp"

namespace seqdisc {

/// Unvalidated ensemble description, as parsed from a file or built by hand.
struct RawEnsemble {
  std::vector<double> priors;
  std::vector<CMatrix> states;
  std::string label;
};

/// A validated list of (prior, density operator) pairs on C^dim.
///
/// Priors are strictly positive and sum to one within 1e-10, every state is
/// Hermitian, PSD within psd_tol, and has unit trace within 1e-10. At least
/// two states are required. Duplicate states are allowed.
class Ensemble {
 public:
  Ensemble() = default;
  /// Validates and throws InvalidInput listing every violated invariant.
  explicit Ensemble(RawEnsemble raw, const Tolerances& tol = {});

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(priors_.size()); }
  double prior(Index j) const { return priors_.at(static_cast<std::size_t>(j)); }
  const CMatrix& state(Index j) const { return states_.at(static_cast<std::size_t>(j)); }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<CMatrix>& states() const { return states_; }
  const std::string& label() const { return label_; }

  /// q_j * sigma_j
  CMatrix weighted_state(Index j) const { return prior(j) * state(j); }
  /// Sum of all weighted states.
  CMatrix average_state() const;

  RawEnsemble raw() const { return {priors_, states_, label_}; }

 private:
  Index dim_ = 0;
  std::vector<double> priors_;
  std::vector<CMatrix> states_;
  std::string label_;
};

/// Every violated invariant of `raw`, as human-readable messages. Empty when
/// the description is a valid ensemble.
std::vector<std::string> ensemble_violations(const RawEnsemble& raw, const Tolerances& tol = {});

/// Validated ensemble or InvalidInput with every violation. Never renormalizes.
Ensemble validate_ensemble(const RawEnsemble& raw, const Tolerances& tol = {});

/// Pure-state density operator |v><v| / <v|v>.
CMatrix pure_state(const CVector& v);

// ---------------------------------------------------------------------------
// Sequences of independently drawn states
// ---------------------------------------------------------------------------

using SequenceTuple = std::vector<Index>;

/// Product ensemble over k component ensembles. Tuples (x_1, ..., x_k) are
/// enumerated lexicographically with the last index varying fastest, which
/// matches the Kronecker ordering of the tuple states.
class SequenceEnsemble {
 public:
  SequenceEnsemble() = default;
  explicit SequenceEnsemble(std::vector<Ensemble> components);

  Index length() const { return static_cast<Index>(components_.size()); }
  const std::vector<Ensemble>& components() const { return components_; }
  const Ensemble& component(Index i) const { return components_.at(static_cast<std::size_t>(i)); }
  Index total_count() const { return total_count_; }
  Index total_dim() const { return total_dim_; }

  SequenceTuple tuple_of(Index flat) const;
  Index index_of(const SequenceTuple& tuple) const;

  double prior(const SequenceTuple& tuple) const;
  /// Kronecker product of the component states; throws CapacityError past `cap`.
  CMatrix state(const SequenceTuple& tuple, Index cap = kDefaultKronCap) const;

  bool materialized() const { return materialized_.has_value(); }
  /// The product ensemble as a plain Ensemble. Requires materialize().
  const Ensemble& as_ensemble() const;

  /// Builds every tuple state; throws CapacityError naming total_dim if it
  /// exceeds `cap`.
  void materialize(Index cap = kDefaultKronCap);

 private:
  std::vector<Ensemble> components_;
  Index total_count_ = 0;
  Index total_dim_ = 0;
  std::optional<Ensemble> materialized_;
};

SequenceEnsemble build_sequence_ensemble(std::vector<Ensemble> components, bool materialize,
                                         Index cap = kDefaultKronCap);

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

/// Effects are PSD within psd_tol and sum to the identity within 1e-9.
class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<CMatrix> effects, std::optional<Index> inconclusive_index = {},
                const Tolerances& tol = {}, double completeness_tol = 1e-9);

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(effects_.size()); }
  const CMatrix& effect(Index i) const { return effects_.at(static_cast<std::size_t>(i)); }
  const std::vector<CMatrix>& effects() const { return effects_; }
  std::optional<Index> inconclusive_index() const { return inconclusive_; }
  /// Number of effects other than the inconclusive one.
  Index conclusive_count() const { return size() - (inconclusive_ ? 1 : 0); }
  /// Effect indices in order, skipping the inconclusive one.
  std::vector<Index> conclusive_indices() const;

  /// max |sum(effects) - I| entrywise.
  double completeness_defect() const;

 private:
  Index dim_ = 0;
  std::vector<CMatrix> effects_;
  std::optional<Index> inconclusive_;
};

/// Effects of every Kronecker product M^1_{x_1} (x) ... (x) M^k_{x_k}, in
/// lexicographic tuple order. When any factor has an inconclusive effect the
/// result keeps only the all-conclusive products and appends a single
/// inconclusive effect I - sum(conclusive).
Povm tensor_povm(const std::vector<Povm>& povms, Index cap = kDefaultKronCap);

/// Sum over conclusive outcomes o of q_{a(o)} Tr(rho_{a(o)} M_o).
/// `assignment` is indexed by conclusive outcome, in effect order skipping the
/// inconclusive effect, and names the state each outcome announces. An empty
/// assignment means the c-th conclusive outcome announces state c.
double success_probability(const Ensemble& e, const Povm& m,
                           const std::vector<Index>& assignment = {});
double success_probability(const SequenceEnsemble& e, const Povm& m,
                           const std::vector<Index>& assignment = {});

/// Sum_{ij} q_i C_ij Tr(sigma_i M_j) over the conclusive effects.
double average_cost(const Ensemble& e, const Povm& m, const RMatrix& cost);

}  // namespace seqdisc

#endif  // SEQDISC_ENSEMBLE_HPP
