#include "seqdisc/minerror.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace seqdisc {

HelstromResult helstrom_two(const Ensemble& e, const Tolerances& tol) {
  if (e.size() != 2) {
    throw InvalidInput("helstrom_two needs exactly 2 states, got " + std::to_string(e.size()));
  }
  const Index d = e.dim();
  const CMatrix gamma = e.weighted_state(0) - e.weighted_state(1);
  const EigenDecomposition eig = eig_hermitian(gamma, 1e-10);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  const double threshold = -tol.rank_tol * scale;

  CMatrix first = CMatrix::Zero(d, d);
  CMatrix second = CMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    const CVector v = eig.vectors.col(j);
    if (eig.values(j) >= threshold) {
      first += v * v.adjoint();
    } else {
      second += v * v.adjoint();
    }
  }
  HelstromResult out;
  out.p = 0.5 * (1.0 + eig.values.cwiseAbs().sum());
  out.povm = Povm({first, second}, std::nullopt, tol);
  return out;
}

ConicProgram min_error_program(const Ensemble& e) {
  const Index d = e.dim();
  const Index n = e.size();
  ConicProgram prog;
  prog.sense = Sense::Maximize;
  for (Index i = 0; i < n; ++i) {
    prog.block_sizes.push_back(2 * d);
    prog.objective.push_back(embed_complex(e.weighted_state(i)) / 2);
  }
  const auto basis = hermitian_basis(d);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    LinearConstraint con;
    con.rhs = basis[k].trace().real();
    const SparseMatrix coef = half_embedding(basis[k]);
    for (Index i = 0; i < n; ++i) con.terms.push_back({i, coef});
    prog.constraints.push_back(std::move(con));
  }
  return prog;
}

namespace {

std::string describe_failure(const SdpSolution& sol) {
  std::ostringstream os;
  os << "SDP solve ended with status " << to_string(sol.status) << " (" << sol.message
     << ") after " << sol.iterations << " iterations; gap " << sol.gap << ", primal residual "
     << sol.primal_residual << ", dual residual " << sol.dual_residual;
  return os.str();
}

}  // namespace

namespace {

MinErrorResult extract_min_error(const Ensemble& e, SdpSolution sol) {
  std::vector<CMatrix> effects;
  effects.reserve(sol.primal_blocks.size());
  for (const auto& x : sol.primal_blocks) effects.push_back(unembed_complex(x));

  MinErrorResult out;
  out.povm = Povm(std::move(effects), std::nullopt, Tolerances{}, 1e-8);
  out.dual_z = from_hermitian_coordinates(sol.dual_multipliers, e.dim());
  out.p = sol.primal_value;
  out.sdp = std::move(sol);
  return out;
}

}  // namespace

MinErrorResult solve_min_error(const Ensemble& e, const SdpOptions& options) {
  const ConicProgram program = min_error_program(e);
  SdpSolution sol = solve_sdp(program, options);
  if (!sol.optimal()) throw NumericError("solve_min_error: " + describe_failure(sol));
  MinErrorResult out = extract_min_error(e, std::move(sol));

  // On ill-conditioned instances the certificate witnesses lag the objective,
  // so re-solve with tighter tolerances until the returned POVM certifies.
  SdpOptions tight = options;
  for (int round = 0; round < 3; ++round) {
    if (check_hykl_certificate(e, out.povm, kMinErrorCertificateTol).pass) break;
    tight.gap_tol *= 1e-2;
    tight.feas_tol = std::min(tight.feas_tol, tight.gap_tol);
    tight.max_iterations = std::max(tight.max_iterations, 100);
    SdpSolution again = solve_sdp(program, tight);
    if (!again.optimal()) break;
    out = extract_min_error(e, std::move(again));
    ++out.refinements;
  }
  return out;
}

namespace {

HyklCertificate certify_gamma(const CMatrix& raw_gamma, Index count,
                              const std::function<CMatrix(Index)>& weighted_state, double tol) {
  HyklCertificate cert;
  cert.tolerance = tol;
  cert.asymmetry = max_abs(raw_gamma - raw_gamma.adjoint());
  const CMatrix gamma = hermitian_part(raw_gamma);
  cert.pass = true;
  for (Index j = 0; j < count; ++j) {
    const PsdCheck c = is_psd(hermitian_part(CMatrix(gamma - weighted_state(j))), tol);
    cert.min_eigenvalues.push_back(c.min_eigenvalue);
    cert.pass = cert.pass && c.psd;
  }
  return cert;
}

void require_one_effect_per_state(const Povm& m, Index dim, Index count) {
  if (m.dim() != dim) {
    throw InvalidInput("check_hykl_certificate: POVM dimension " + std::to_string(m.dim()) +
                       " does not match ensemble dimension " + std::to_string(dim));
  }
  if (m.inconclusive_index() || m.size() != count) {
    throw InvalidInput("check_hykl_certificate: need exactly one effect per state (" +
                       std::to_string(count) + ") and no inconclusive outcome, POVM has " +
                       std::to_string(m.size()) + " effects");
  }
}

}  // namespace

HyklCertificate check_hykl_certificate(const Ensemble& e, const Povm& m, double tol) {
  require_one_effect_per_state(m, e.dim(), e.size());
  CMatrix gamma = CMatrix::Zero(e.dim(), e.dim());
  for (Index i = 0; i < e.size(); ++i) gamma += e.weighted_state(i) * m.effect(i);
  return certify_gamma(gamma, e.size(), [&](Index j) { return e.weighted_state(j); }, tol);
}

HyklCertificate check_hykl_certificate(const SequenceEnsemble& e, const Povm& m, double tol) {
  if (e.materialized()) return check_hykl_certificate(e.as_ensemble(), m, tol);
  require_one_effect_per_state(m, e.total_dim(), e.total_count());
  CMatrix gamma = CMatrix::Zero(e.total_dim(), e.total_dim());
  for (Index t = 0; t < e.total_count(); ++t) {
    const SequenceTuple tuple = e.tuple_of(t);
    gamma += e.prior(tuple) * e.state(tuple) * m.effect(t);
  }
  return certify_gamma(
      gamma, e.total_count(),
      [&](Index j) {
        const SequenceTuple tuple = e.tuple_of(j);
        return CMatrix(e.prior(tuple) * e.state(tuple));
      },
      tol);
}

ProductTheoremReport verify_product_min_error(const std::vector<Ensemble>& components,
                                              const ProductCheckOptions& options) {
  if (components.empty()) throw InvalidInput("verify_product_min_error: no components");
  ProductTheoremReport report;
  report.tolerance = options.tol;
  bool ok = true;

  std::vector<Povm> local_povms;
  report.product_value = 1.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    try {
      MinErrorResult r = solve_min_error(components[i], options.sdp);
      report.local_values.push_back(r.p);
      report.product_value *= r.p;
      report.local_certificates.push_back(
          check_hykl_certificate(components[i], r.povm, options.certificate_tol));
      ok = ok && report.local_certificates.back().pass;
      local_povms.push_back(std::move(r.povm));
      report.solver_runs.push_back(std::move(r.sdp));
    } catch (const Error& err) {
      report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
      report.notes.push_back("component " + std::to_string(i) + " solve failed: " + err.what());
      report.pass = false;
      return report;
    }
  }

  if (components.size() == 1) {
    report.direct_value = report.local_values.front();
    report.abs_diff = 0.0;
    report.tensored_certificate = report.local_certificates.front();
    report.tensored_value = report.local_values.front();
    report.pass = ok;
    return report;
  }

  SequenceEnsemble seq(components);
  if (seq.total_dim() > options.direct_cap) {
    report.notes.push_back("direct branch skipped (capacity): total_dim " +
                           std::to_string(seq.total_dim()) + " exceeds cap " +
                           std::to_string(options.direct_cap));
    report.pass = ok;
    return report;
  }

  try {
    seq.materialize(options.direct_cap);
    const Povm tensored = tensor_povm(local_povms);
    report.tensored_certificate = check_hykl_certificate(seq, tensored, options.certificate_tol);
    report.tensored_value = success_probability(seq, tensored);
    ok = ok && report.tensored_certificate->pass;
  } catch (const Error& err) {
    report.solver_failure = report.solver_failure || err.kind() == ErrorKind::Numeric;
    report.notes.push_back(std::string("tensored measurement stage failed: ") + err.what());
    ok = false;
  }

  try {
    MinErrorResult direct = solve_min_error(seq.as_ensemble(), options.sdp);
    report.direct_value = direct.p;
    report.abs_diff = std::abs(direct.p - report.product_value);
    report.solver_runs.push_back(std::move(direct.sdp));
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
