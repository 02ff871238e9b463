#include "seqdisc/unambiguous.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqdisc/random.hpp"

namespace seqdisc {

namespace {

CMatrix sum_excluding(const Ensemble& e, Index skip) {
  CMatrix q = CMatrix::Zero(e.dim(), e.dim());
  for (Index i = 0; i < e.size(); ++i) {
    if (i != skip) q += e.weighted_state(i);
  }
  return q;
}

double min_eigenvalue(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  return eigenvalues_hermitian(hermitian_part(h)).minCoeff();
}

double max_eigenvalue(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  return eigenvalues_hermitian(hermitian_part(h)).maxCoeff();
}

CMatrix conclusive_effect(const Subspace& theta, const CMatrix& delta) {
  const Index d = theta.ambient_dim();
  if (theta.rank() == 0) return CMatrix::Zero(d, d);
  return hermitian_part(CMatrix(theta.basis() * delta * theta.basis().adjoint()));
}

Povm assemble_povm(const std::vector<Subspace>& thetas, const std::vector<CMatrix>& deltas,
                   Index d) {
  std::vector<CMatrix> effects;
  CMatrix rest = CMatrix::Identity(d, d);
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    effects.push_back(conclusive_effect(thetas[j], deltas[j]));
    rest -= effects.back();
  }
  effects.push_back(hermitian_part(rest));
  Tolerances loose;
  loose.psd_tol = 1e-7;
  return Povm(std::move(effects), static_cast<Index>(thetas.size()), loose, 1e-8);
}

}  // namespace

UdFeasibility check_ud_feasible(const Ensemble& e, const Tolerances& tol) {
  UdFeasibility out;
  const Subspace full = support_basis(e.average_state(), tol);
  out.support_rank = full.rank();
  out.overall = true;
  for (Index j = 0; j < e.size(); ++j) {
    const Subspace reduced = support_basis(sum_excluding(e, j), tol);
    const double dist = projector_distance(full, reduced);
    const bool equal = subspace_equal(full, reduced, tol.subspace_eq_tol);
    out.removed_support_ranks.push_back(reduced.rank());
    out.distances.push_back(dist);
    out.verdicts.push_back(!equal);
    out.overall = out.overall && !equal;
  }
  return out;
}

UdFeasibility check_sequence_ud_feasible(const std::vector<Ensemble>& components,
                                         FeasibilityMode mode, Index cap,
                                         const Tolerances& tol) {
  if (components.empty()) throw InvalidInput("check_sequence_ud_feasible: no components");
  if (mode == FeasibilityMode::Direct) {
    SequenceEnsemble seq(components);
    seq.materialize(cap);
    return check_ud_feasible(seq.as_ensemble(), tol);
  }

  UdFeasibility out;
  out.overall = true;
  out.support_rank = 1;
  for (const auto& c : components) {
    out.components.push_back(check_ud_feasible(c, tol));
    out.overall = out.overall && out.components.back().overall;
    out.support_rank *= out.components.back().support_rank;
  }
  const SequenceEnsemble seq(components);
  for (Index t = 0; t < seq.total_count(); ++t) {
    const SequenceTuple tuple = seq.tuple_of(t);
    bool verdict = true;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      verdict = verdict && out.components[i].verdicts[static_cast<std::size_t>(tuple[i])];
    }
    out.verdicts.push_back(verdict);
  }
  return out;
}

RestrictedEnsemble restrict_to_support(const Ensemble& e, const Tolerances& tol) {
  Subspace v = support_basis(e.average_state(), tol);
  RawEnsemble raw;
  raw.priors = e.priors();
  raw.label = e.label();
  for (const auto& s : e.states()) {
    CMatrix r = hermitian_part(CMatrix(v.basis().adjoint() * s * v.basis()));
    raw.states.push_back(r / r.trace().real());
  }
  return {Ensemble(std::move(raw), tol), std::move(v)};
}

std::vector<Subspace> compute_thetas(const Ensemble& e, const Tolerances& tol) {
  std::vector<Subspace> kernels;
  for (const auto& s : e.states()) kernels.push_back(kernel_basis(s, tol));
  std::vector<Subspace> out;
  for (Index j = 0; j < e.size(); ++j) {
    std::vector<Subspace> others;
    for (Index i = 0; i < e.size(); ++i) {
      if (i != j) others.push_back(kernels[static_cast<std::size_t>(i)]);
    }
    out.push_back(subspace_intersection(others, tol.rank_tol));
  }
  return out;
}

Subspace compute_theta(const Ensemble& e, Index j, const Tolerances& tol) {
  if (j < 0 || j >= e.size()) {
    throw InvalidInput("compute_theta: state index " + std::to_string(j) + " out of range");
  }
  std::vector<Subspace> others;
  for (Index i = 0; i < e.size(); ++i) {
    if (i != j) others.push_back(kernel_basis(e.state(i), tol));
  }
  return subspace_intersection(others, tol.rank_tol);
}

std::vector<Subspace> compute_supported_thetas(const Ensemble& e, const Tolerances& tol) {
  const RestrictedEnsemble r = restrict_to_support(e, tol);
  std::vector<Subspace> out;
  for (const auto& t : compute_thetas(r.ensemble, tol)) {
    out.push_back(t.lifted(r.support.basis()));
  }
  return out;
}

UdResiduals evaluate_ud_solution(const Ensemble& e, const std::vector<Subspace>& thetas,
                                 const std::vector<CMatrix>& deltas, const CMatrix& z) {
  const Index n = e.size();
  if (static_cast<Index>(thetas.size()) != n || static_cast<Index>(deltas.size()) != n) {
    throw InvalidInput("evaluate_ud_solution: need one theta and one delta per state");
  }
  if (z.rows() != e.dim() || z.cols() != e.dim()) {
    throw InvalidInput("evaluate_ud_solution: Z has the wrong dimension");
  }
  UdResiduals out;
  CMatrix total = CMatrix::Zero(e.dim(), e.dim());
  std::vector<CMatrix> effects;
  for (Index j = 0; j < n; ++j) {
    const auto& theta = thetas[static_cast<std::size_t>(j)];
    const auto& delta = deltas[static_cast<std::size_t>(j)];
    if (delta.rows() != theta.rank() || delta.cols() != theta.rank()) {
      throw InvalidInput("evaluate_ud_solution: delta " + std::to_string(j) +
                         " does not match its theta rank");
    }
    effects.push_back(conclusive_effect(theta, delta));
    total += effects.back();
    out.primal_residual = std::max(out.primal_residual, -min_eigenvalue(delta));
    if (theta.rank() > 0) {
      const CMatrix b = theta.basis();
      const CMatrix slack = b.adjoint() * (z - e.weighted_state(j)) * b;
      out.dual_residual = std::max(out.dual_residual, -min_eigenvalue(slack));
    }
  }
  out.primal_residual =
      std::max(out.primal_residual,
               max_eigenvalue(CMatrix(total - CMatrix::Identity(e.dim(), e.dim()))));
  out.dual_residual = std::max(out.dual_residual, -min_eigenvalue(z));

  for (Index j = 0; j < n; ++j) {
    out.primal_value += e.prior(j) * (e.state(j) * effects[static_cast<std::size_t>(j)]).trace().real();
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double leak = std::abs((e.state(i) * effects[static_cast<std::size_t>(j)]).trace().real());
      out.unambiguity = std::max(out.unambiguity, leak);
    }
  }
  out.dual_value = z.trace().real();
  return out;
}

UdSolution solve_unambiguous(const Ensemble& e, const SdpOptions& options,
                             const Tolerances& tol) {
  const Index d = e.dim();
  const RestrictedEnsemble r = restrict_to_support(e, tol);
  const Ensemble& er = r.ensemble;
  const CMatrix& v = r.support.basis();
  const Index s = er.dim();
  const std::vector<Subspace> local_thetas = compute_thetas(er, tol);

  UdSolution out;
  std::vector<Index> active;
  for (Index j = 0; j < er.size(); ++j) {
    out.thetas.push_back(local_thetas[static_cast<std::size_t>(j)].lifted(v));
    out.deltas.push_back(CMatrix::Zero(local_thetas[static_cast<std::size_t>(j)].rank(),
                                       local_thetas[static_cast<std::size_t>(j)].rank()));
    if (local_thetas[static_cast<std::size_t>(j)].rank() > 0) active.push_back(j);
  }

  if (active.empty()) {
    out.p = 0.0;
    out.dual_z = CMatrix::Zero(d, d);
    out.povm = assemble_povm(out.thetas, out.deltas, d);
    out.residuals = evaluate_ud_solution(e, out.thetas, out.deltas, out.dual_z);
    return out;
  }

  ConicProgram prog;
  prog.sense = Sense::Maximize;
  prog.block_sizes.push_back(2 * s);
  prog.objective.push_back(RMatrix::Zero(2 * s, 2 * s));
  for (Index j : active) {
    const CMatrix& b = local_thetas[static_cast<std::size_t>(j)].basis();
    prog.block_sizes.push_back(2 * b.cols());
    prog.objective.push_back(
        embed_complex(hermitian_part(CMatrix(b.adjoint() * er.weighted_state(j) * b))) / 2);
  }
  for (const CMatrix& ek : hermitian_basis(s)) {
    LinearConstraint con;
    con.rhs = ek.trace().real();
    con.terms.push_back({0, half_embedding(ek)});
    for (std::size_t a = 0; a < active.size(); ++a) {
      const CMatrix& b = local_thetas[static_cast<std::size_t>(active[a])].basis();
      con.terms.push_back({static_cast<Index>(a + 1),
                           half_embedding(hermitian_part(CMatrix(b.adjoint() * ek * b)))});
    }
    prog.constraints.push_back(std::move(con));
  }

  SdpSolution sol = solve_sdp(prog, options);
  if (!sol.optimal()) {
    std::ostringstream os;
    os << "solve_unambiguous: SDP solve ended with status " << to_string(sol.status) << " ("
       << sol.message << ") after " << sol.iterations << " iterations; gap " << sol.gap
       << ", primal residual " << sol.primal_residual << ", dual residual " << sol.dual_residual;
    throw NumericError(os.str());
  }
  for (std::size_t a = 0; a < active.size(); ++a) {
    out.deltas[static_cast<std::size_t>(active[a])] = unembed_complex(sol.primal_blocks[a + 1]);
  }
  out.dual_z = hermitian_part(
      CMatrix(v * from_hermitian_coordinates(sol.dual_multipliers, s) * v.adjoint()));
  out.p = sol.primal_value;
  out.povm = assemble_povm(out.thetas, out.deltas, d);
  out.residuals = evaluate_ud_solution(e, out.thetas, out.deltas, out.dual_z);
  out.sdp = std::move(sol);
  return out;
}

UdSolution build_product_ud_solution(const std::vector<Ensemble>& components,
                                     const std::vector<UdSolution>& local_solutions,
                                     Index cap, double local_residual_tol) {
  if (components.empty() || components.size() != local_solutions.size()) {
    throw InvalidInput("build_product_ud_solution: need one local solution per component");
  }
  if (components.size() == 1) return local_solutions.front();

  for (std::size_t i = 0; i < local_solutions.size(); ++i) {
    const UdResiduals& res = local_solutions[i].residuals;
    if (res.primal_residual > local_residual_tol || res.dual_residual > local_residual_tol) {
      std::ostringstream os;
      os << "build_product_ud_solution: local solution " << i << " has primal residual "
         << res.primal_residual << " and dual residual " << res.dual_residual << " (limit "
         << local_residual_tol << ")";
      throw NumericError(os.str());
    }
    if (static_cast<Index>(local_solutions[i].thetas.size()) != components[i].size()) {
      throw InvalidInput("build_product_ud_solution: local solution " + std::to_string(i) +
                         " does not match its component");
    }
  }

  SequenceEnsemble seq(components);
  seq.materialize(cap);
  const Index dim = seq.total_dim();

  UdSolution out;
  out.p = 1.0;
  std::vector<CMatrix> zs;
  for (const auto& loc : local_solutions) {
    out.p *= loc.p;
    zs.push_back(loc.dual_z);
  }
  out.dual_z = kron_all(zs, cap);

  for (Index t = 0; t < seq.total_count(); ++t) {
    const SequenceTuple tuple = seq.tuple_of(t);
    std::vector<Subspace> thetas;
    std::vector<CMatrix> deltas;
    bool empty = false;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      const auto x = static_cast<std::size_t>(tuple[i]);
      thetas.push_back(local_solutions[i].thetas[x]);
      deltas.push_back(local_solutions[i].deltas[x]);
      empty = empty || thetas.back().rank() == 0;
    }
    if (empty) {
      out.thetas.push_back(Subspace::zero(dim));
      out.deltas.push_back(CMatrix::Zero(0, 0));
    } else {
      out.thetas.push_back(subspace_tensor(thetas, cap));
      out.deltas.push_back(kron_all(deltas, cap));
    }
  }
  out.povm = assemble_povm(out.thetas, out.deltas, dim);
  out.residuals = evaluate_ud_solution(seq.as_ensemble(), out.thetas, out.deltas, out.dual_z);
  return out;
}

namespace {

std::vector<Subspace> tensored_thetas(const SequenceEnsemble& seq,
                                      const std::vector<std::vector<Subspace>>& local,
                                      const std::vector<Index>& flat_tuples) {
  std::vector<Subspace> out;
  for (Index t : flat_tuples) {
    const SequenceTuple tuple = seq.tuple_of(t);
    std::vector<Subspace> factors;
    bool empty = false;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      factors.push_back(local[i][static_cast<std::size_t>(tuple[i])]);
      empty = empty || factors.back().rank() == 0;
    }
    out.push_back(empty ? Subspace::zero(seq.total_dim()) : subspace_tensor(factors));
  }
  return out;
}

}  // namespace

KernelDecompositionCheck verify_kernel_decomposition(const std::vector<Ensemble>& components,
                                                     const SequenceTuple& tuple, Index cap,
                                                     const Tolerances& tol) {
  SequenceEnsemble seq(components);
  const Index flat = seq.index_of(tuple);
  seq.materialize(cap);

  const RestrictedEnsemble r = restrict_to_support(seq.as_ensemble(), tol);
  const Subspace direct = compute_theta(r.ensemble, flat, tol).lifted(r.support.basis());

  std::vector<std::vector<Subspace>> local;
  for (const auto& c : components) local.push_back(compute_supported_thetas(c, tol));
  const Subspace tensored = tensored_thetas(seq, local, {flat}).front();

  KernelDecompositionCheck out;
  out.direct_rank = direct.rank();
  out.tensored_rank = tensored.rank();
  out.distance = projector_distance(direct, tensored);
  out.equal = subspace_equal(direct, tensored, tol.subspace_eq_tol);
  return out;
}

UdProductReport verify_product_unambiguous(const std::vector<Ensemble>& components,
                                           const UdProductOptions& options) {
  if (components.empty()) throw InvalidInput("verify_product_unambiguous: no components");
  UdProductReport report;
  report.tolerance = options.tol;
  report.construction_tol = options.construction_tol;

  std::vector<UdSolution> locals;
  report.product_value = 1.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    try {
      locals.push_back(solve_unambiguous(components[i], options.sdp, options.tolerances));
    } catch (const Error& err) {
      report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
      report.notes.push_back("component " + std::to_string(i) + " solve failed: " + err.what());
      report.pass = false;
      return report;
    }
    report.local_values.push_back(locals.back().p);
    report.product_value *= locals.back().p;
    if (locals.back().sdp) report.solver_runs.push_back(*locals.back().sdp);
  }

  bool ok = true;
  if (components.size() == 1) {
    report.direct_value = report.local_values.front();
    report.abs_diff = 0.0;
    report.constructed = locals.front().residuals;
    report.theta_max_distance = 0.0;
    report.tuples_checked = components.front().size();
    const UdResiduals& res = locals.front().residuals;
    report.pass = res.primal_residual <= options.construction_tol &&
                  res.dual_residual <= options.construction_tol;
    return report;
  }

  SequenceEnsemble seq(components);
  if (seq.total_dim() > options.direct_cap) {
    report.notes.push_back("direct branch skipped (capacity): total_dim " +
                           std::to_string(seq.total_dim()) + " exceeds cap " +
                           std::to_string(options.direct_cap));
    report.pass = true;
    return report;
  }
  seq.materialize(options.direct_cap);

  // Theta decomposition by two routes, before any values are compared.
  try {
    const std::vector<Subspace> direct =
        compute_supported_thetas(seq.as_ensemble(), options.tolerances);
    std::vector<std::vector<Subspace>> local;
    for (const auto& loc : locals) local.push_back(loc.thetas);

    std::vector<Index> tuples(static_cast<std::size_t>(seq.total_count()));
    for (Index t = 0; t < seq.total_count(); ++t) tuples[static_cast<std::size_t>(t)] = t;
    if (options.sample_tuples && *options.sample_tuples < seq.total_count()) {
      Rng rng(options.seed);
      tuples = shuffled_indices(rng, seq.total_count());
      tuples.resize(static_cast<std::size_t>(std::max<Index>(*options.sample_tuples, 0)));
      std::sort(tuples.begin(), tuples.end());
    }
    const std::vector<Subspace> tensored = tensored_thetas(seq, local, tuples);
    double worst = 0.0;
    for (std::size_t a = 0; a < tuples.size(); ++a) {
      const Subspace& lhs = direct[static_cast<std::size_t>(tuples[a])];
      worst = std::max(worst, projector_distance(lhs, tensored[a]));
      if (!subspace_equal(lhs, tensored[a], options.tolerances.subspace_eq_tol)) {
        ++report.tuples_mismatched;
      }
    }
    report.tuples_checked = static_cast<Index>(tuples.size());
    report.theta_max_distance = worst;
    ok = ok && report.tuples_mismatched == 0;
    if (report.tuples_mismatched > 0) {
      report.notes.push_back(std::to_string(report.tuples_mismatched) +
                             " tuple(s) with mismatched theta subspaces");
    }
  } catch (const Error& err) {
    report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
    report.notes.push_back(std::string("theta decomposition stage failed: ") + err.what());
    ok = false;
  }

  try {
    const UdSolution built =
        build_product_ud_solution(components, locals, options.direct_cap, options.construction_tol);
    report.constructed = built.residuals;
    const UdResiduals& res = built.residuals;
    const double ctol = options.construction_tol;
    ok = ok && res.primal_residual <= ctol && res.dual_residual <= ctol &&
         std::abs(res.primal_value - report.product_value) <= ctol &&
         std::abs(res.dual_value - report.product_value) <= ctol;
  } catch (const Error& err) {
    report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
    report.notes.push_back(std::string("product construction failed: ") + err.what());
    ok = false;
  }

  try {
    UdSolution direct = solve_unambiguous(seq.as_ensemble(), options.sdp, options.tolerances);
    report.direct_value = direct.p;
    report.abs_diff = std::abs(direct.p - report.product_value);
    if (direct.sdp) report.solver_runs.push_back(std::move(*direct.sdp));
    ok = ok && *report.abs_diff <= options.tol;
  } catch (const Error& err) {
    report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
    report.notes.push_back(std::string("direct solve failed: ") + err.what());
    ok = false;
  }
  report.pass = ok;
  return report;
}

}  // namespace seqdisc
