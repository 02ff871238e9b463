#include "seqdisc/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace seqdisc {

namespace {

constexpr double kPriorSumTol = 1e-10;
constexpr double kTraceTol = 1e-10;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

std::vector<std::string> ensemble_violations(const RawEnsemble& raw, const Tolerances& tol) {
  std::vector<std::string> issues;
  std::ostringstream os;
  os.precision(12);
  if (raw.priors.size() != raw.states.size()) {
    os << raw.priors.size() << " priors for " << raw.states.size() << " states";
    issues.push_back(os.str());
    return issues;
  }
  if (raw.states.size() < 2) {
    issues.push_back("an ensemble needs at least 2 states, got " +
                     std::to_string(raw.states.size()));
  }
  if (raw.states.empty()) return issues;

  const Index dim = raw.states.front().rows();
  double sum = 0.0;
  for (std::size_t j = 0; j < raw.priors.size(); ++j) {
    const double q = raw.priors[j];
    sum += q;
    if (!std::isfinite(q) || q <= 0.0 || q > 1.0) {
      os.str("");
      os << "prior " << j << " is " << q << ", expected a value in (0, 1]";
      issues.push_back(os.str());
    }
  }
  if (!(std::abs(sum - 1.0) <= kPriorSumTol)) {
    os.str("");
    os << "priors sum " << sum << " (expected 1 within " << kPriorSumTol << ")";
    issues.push_back(os.str());
  }

  for (std::size_t j = 0; j < raw.states.size(); ++j) {
    const CMatrix& rho = raw.states[j];
    const std::string name = "state " + std::to_string(j);
    if (rho.rows() != dim || rho.cols() != dim) {
      issues.push_back(name + " has shape " + std::to_string(rho.rows()) + "x" +
                       std::to_string(rho.cols()) + ", expected " + std::to_string(dim) + "x" +
                       std::to_string(dim));
      continue;
    }
    if (!rho.allFinite()) {
      issues.push_back(name + " has a non-finite entry");
      continue;
    }
    const double defect = hermiticity_defect(rho);
    if (defect > tol.hermiticity_tol) {
      os.str("");
      os << name << " is not Hermitian (defect " << defect << ")";
      issues.push_back(os.str());
      continue;
    }
    const PsdCheck psd = is_psd(rho, tol.psd_tol);
    if (!psd.psd) {
      os.str("");
      os << name << " is not PSD (min eigenvalue " << psd.min_eigenvalue << ")";
      issues.push_back(os.str());
    }
    const double tr = rho.trace().real();
    if (!(std::abs(tr - 1.0) <= kTraceTol)) {
      os.str("");
      os << name << " has trace " << tr << " (expected 1 within " << kTraceTol << ")";
      issues.push_back(os.str());
    }
  }
  return issues;
}

Ensemble validate_ensemble(const RawEnsemble& raw, const Tolerances& tol) {
  return Ensemble(raw, tol);
}

Ensemble::Ensemble(RawEnsemble raw, const Tolerances& tol) {
  const auto issues = ensemble_violations(raw, tol);
  if (!issues.empty()) {
    const std::string what = raw.label.empty() ? "ensemble" : "ensemble '" + raw.label + "'";
    throw InvalidInput(what + ": " + join(issues));
  }
  dim_ = raw.states.front().rows();
  priors_ = std::move(raw.priors);
  states_ = std::move(raw.states);
  for (auto& s : states_) s = hermitian_part(s);
  label_ = std::move(raw.label);
}

CMatrix Ensemble::average_state() const {
  CMatrix avg = CMatrix::Zero(dim_, dim_);
  for (Index j = 0; j < size(); ++j) avg += weighted_state(j);
  return avg;
}

CMatrix pure_state(const CVector& v) {
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw InvalidInput("pure_state: zero vector");
  return v * v.adjoint() / n2;
}

// ---------------------------------------------------------------------------

SequenceEnsemble::SequenceEnsemble(std::vector<Ensemble> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidInput("sequence ensemble needs at least one component");
  total_count_ = 1;
  total_dim_ = 1;
  for (const auto& c : components_) {
    if (c.size() == 0) throw InvalidInput("sequence component is empty");
    total_count_ *= c.size();
    total_dim_ *= c.dim();
  }
}

SequenceTuple SequenceEnsemble::tuple_of(Index flat) const {
  if (flat < 0 || flat >= total_count_) throw InvalidInput("sequence index out of range");
  SequenceTuple t(components_.size());
  for (std::size_t i = components_.size(); i-- > 0;) {
    const Index n = components_[i].size();
    t[i] = flat % n;
    flat /= n;
  }
  return t;
}

Index SequenceEnsemble::index_of(const SequenceTuple& tuple) const {
  if (tuple.size() != components_.size()) throw InvalidInput("sequence tuple has wrong length");
  Index flat = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const Index n = components_[i].size();
    if (tuple[i] < 0 || tuple[i] >= n) throw InvalidInput("sequence tuple entry out of range");
    flat = flat * n + tuple[i];
  }
  return flat;
}

double SequenceEnsemble::prior(const SequenceTuple& tuple) const {
  index_of(tuple);
  double p = 1.0;
  for (std::size_t i = 0; i < components_.size(); ++i) p *= components_[i].prior(tuple[i]);
  return p;
}

CMatrix SequenceEnsemble::state(const SequenceTuple& tuple, Index cap) const {
  index_of(tuple);
  if (total_dim_ > cap) {
    throw CapacityError("sequence state of dimension " + std::to_string(total_dim_) +
                        " exceeds dimension cap " + std::to_string(cap));
  }
  CMatrix out = components_[0].state(tuple[0]);
  for (std::size_t i = 1; i < components_.size(); ++i) {
    out = kron(out, components_[i].state(tuple[i]), cap);
  }
  return out;
}

const Ensemble& SequenceEnsemble::as_ensemble() const {
  if (!materialized_) throw InvalidInput("sequence ensemble has not been materialized");
  return *materialized_;
}

void SequenceEnsemble::materialize(Index cap) {
  if (materialized_) return;
  if (total_dim_ > cap) {
    throw CapacityError("cannot materialize sequence ensemble: total_dim " +
                        std::to_string(total_dim_) + " exceeds dimension cap " +
                        std::to_string(cap));
  }
  if (components_.size() == 1) {
    materialized_ = components_.front();
    return;
  }
  RawEnsemble raw;
  raw.priors.reserve(static_cast<std::size_t>(total_count_));
  raw.states.reserve(static_cast<std::size_t>(total_count_));
  for (Index flat = 0; flat < total_count_; ++flat) {
    const SequenceTuple t = tuple_of(flat);
    raw.priors.push_back(prior(t));
    raw.states.push_back(state(t, cap));
  }
  for (const auto& c : components_) {
    if (!raw.label.empty()) raw.label += " x ";
    raw.label += c.label().empty() ? "?" : c.label();
  }
  materialized_ = Ensemble(std::move(raw));
}

SequenceEnsemble build_sequence_ensemble(std::vector<Ensemble> components, bool materialize,
                                         Index cap) {
  SequenceEnsemble seq(std::move(components));
  if (materialize) seq.materialize(cap);
  return seq;
}

// ---------------------------------------------------------------------------

Povm::Povm(std::vector<CMatrix> effects, std::optional<Index> inconclusive_index,
           const Tolerances& tol, double completeness_tol)
    : effects_(std::move(effects)), inconclusive_(inconclusive_index) {
  if (effects_.empty()) throw InvalidInput("POVM has no effects");
  dim_ = effects_.front().rows();
  if (inconclusive_ && (*inconclusive_ < 0 || *inconclusive_ >= size())) {
    throw InvalidInput("POVM inconclusive index " + std::to_string(*inconclusive_) +
                       " out of range");
  }
  std::ostringstream os;
  os.precision(12);
  for (std::size_t i = 0; i < effects_.size(); ++i) {
    const std::string name = "POVM effect " + std::to_string(i);
    if (effects_[i].rows() != dim_) {
      throw InvalidInput(name + " has dimension " + std::to_string(effects_[i].rows()) +
                         ", expected " + std::to_string(dim_));
    }
    require_hermitian(effects_[i], std::max(tol.hermiticity_tol, 1e-10), name);
    effects_[i] = hermitian_part(effects_[i]);
    const PsdCheck psd = is_psd(effects_[i], tol.psd_tol);
    if (!psd.psd) {
      os << name << " is not PSD (min eigenvalue " << psd.min_eigenvalue << ")";
      throw InvalidInput(os.str());
    }
  }
  const double defect = completeness_defect();
  if (defect > completeness_tol) {
    os << "POVM effects do not sum to the identity (max deviation " << defect << " > "
       << completeness_tol << ")";
    throw InvalidInput(os.str());
  }
}

std::vector<Index> Povm::conclusive_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (!inconclusive_ || *inconclusive_ != i) out.push_back(i);
  }
  return out;
}

double Povm::completeness_defect() const {
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (const auto& m : effects_) sum += m;
  return max_abs(sum - CMatrix::Identity(dim_, dim_));
}

Povm tensor_povm(const std::vector<Povm>& povms, Index cap) {
  if (povms.empty()) throw InvalidInput("tensor_povm: empty POVM list");
  if (povms.size() == 1) return povms.front();

  Index total_dim = 1;
  bool any_inconclusive = false;
  std::vector<std::vector<Index>> outcome_lists;
  for (const auto& p : povms) {
    total_dim *= p.dim();
    if (total_dim > cap) {
      throw CapacityError("tensor_povm: product dimension " + std::to_string(total_dim) +
                          " exceeds dimension cap " + std::to_string(cap));
    }
    any_inconclusive = any_inconclusive || p.inconclusive_index().has_value();
    outcome_lists.push_back(p.conclusive_indices());
  }

  std::vector<CMatrix> effects{CMatrix::Ones(1, 1)};
  for (std::size_t i = 0; i < povms.size(); ++i) {
    std::vector<CMatrix> next;
    next.reserve(effects.size() * outcome_lists[i].size());
    for (const auto& acc : effects) {
      for (Index o : outcome_lists[i]) next.push_back(kron(acc, povms[i].effect(o), cap));
    }
    effects = std::move(next);
  }

  std::optional<Index> inconclusive;
  if (any_inconclusive) {
    CMatrix rest = CMatrix::Identity(total_dim, total_dim);
    for (const auto& m : effects) rest -= m;
    inconclusive = static_cast<Index>(effects.size());
    effects.push_back(hermitian_part(rest));
  }
  return Povm(std::move(effects), inconclusive, Tolerances{}, 1e-8);
}

namespace {

std::vector<Index> resolve_assignment(const Povm& m, Index state_count,
                                      const std::vector<Index>& assignment) {
  const auto outcomes = m.conclusive_indices();
  std::vector<Index> a = assignment;
  if (a.empty()) {
    if (static_cast<Index>(outcomes.size()) > state_count) {
      throw InvalidInput("POVM has " + std::to_string(outcomes.size()) +
                         " conclusive outcomes but only " + std::to_string(state_count) +
                         " states; an explicit assignment is required");
    }
    a.resize(outcomes.size());
    std::iota(a.begin(), a.end(), Index{0});
  }
  if (a.size() != outcomes.size()) {
    throw InvalidInput("assignment covers " + std::to_string(a.size()) + " outcomes, POVM has " +
                       std::to_string(outcomes.size()) + " conclusive outcomes");
  }
  for (Index s : a) {
    if (s < 0 || s >= state_count) {
      throw InvalidInput("assignment names state " + std::to_string(s) + " out of range");
    }
  }
  return a;
}

double clamp_probability(double p, const char* what) {
  if (p < -1e-9 || p > 1.0 + 1e-9) {
    throw NumericError(std::string(what) + ": value " + std::to_string(p) + " outside [0, 1]");
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double success_probability(const Ensemble& e, const Povm& m, const std::vector<Index>& assignment) {
  if (m.dim() != e.dim()) {
    throw InvalidInput("success_probability: POVM dimension " + std::to_string(m.dim()) +
                       " does not match ensemble dimension " + std::to_string(e.dim()));
  }
  const auto a = resolve_assignment(m, e.size(), assignment);
  const auto outcomes = m.conclusive_indices();
  double p = 0.0;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const Index j = a[c];
    p += e.prior(j) * (e.state(j) * m.effect(outcomes[c])).trace().real();
  }
  return clamp_probability(p, "success_probability");
}

double success_probability(const SequenceEnsemble& e, const Povm& m,
                           const std::vector<Index>& assignment) {
  if (m.dim() != e.total_dim()) {
    throw InvalidInput("success_probability: POVM dimension " + std::to_string(m.dim()) +
                       " does not match sequence dimension " + std::to_string(e.total_dim()));
  }
  if (e.materialized()) return success_probability(e.as_ensemble(), m, assignment);
  const auto a = resolve_assignment(m, e.total_count(), assignment);
  const auto outcomes = m.conclusive_indices();
  double p = 0.0;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const SequenceTuple t = e.tuple_of(a[c]);
    p += e.prior(t) * (e.state(t) * m.effect(outcomes[c])).trace().real();
  }
  return clamp_probability(p, "success_probability");
}

double average_cost(const Ensemble& e, const Povm& m, const RMatrix& cost) {
  if (m.dim() != e.dim()) throw InvalidInput("average_cost: dimension mismatch");
  const auto outcomes = m.conclusive_indices();
  const Index n = e.size();
  if (cost.rows() != n || cost.cols() != n || static_cast<Index>(outcomes.size()) != n) {
    throw InvalidInput("average_cost: cost matrix is " + std::to_string(cost.rows()) + "x" +
                       std::to_string(cost.cols()) + ", expected " + std::to_string(n) + "x" +
                       std::to_string(n) + " with " + std::to_string(n) +
                       " conclusive outcomes (POVM has " + std::to_string(outcomes.size()) + ")");
  }
  if (!cost.allFinite()) throw InvalidInput("average_cost: non-finite cost entry");
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      total += e.prior(i) * cost(i, j) * (e.state(i) * m.effect(outcomes[j])).trace().real();
    }
  }
  return total;
}

}  // namespace seqdisc
