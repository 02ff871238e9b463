#include "seqdisc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace seqdisc {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::NumericFailure: return "numeric-failure";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  if (block_sizes.empty()) throw InvalidInput("conic program has no blocks");
  for (Index n : block_sizes) {
    if (n <= 0) throw InvalidInput("conic program block sizes must be positive");
  }
  if (objective.size() != block_sizes.size()) {
    throw InvalidInput("conic program has " + std::to_string(objective.size()) +
                       " objective blocks for " + std::to_string(block_sizes.size()) + " blocks");
  }
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    const Index n = block_sizes[b];
    const RMatrix& c = objective[b];
    if (c.rows() != n || c.cols() != n) {
      throw InvalidInput("objective block " + std::to_string(b) + " has wrong shape");
    }
    if (!c.allFinite() || max_abs(c - c.transpose()) > 1e-12) {
      throw InvalidInput("objective block " + std::to_string(b) + " is not finite symmetric");
    }
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& con = constraints[i];
    if (!std::isfinite(con.rhs)) {
      throw InvalidInput("constraint " + std::to_string(i) + " has non-finite rhs");
    }
    for (const auto& term : con.terms) {
      if (term.block < 0 || term.block >= static_cast<Index>(block_sizes.size())) {
        throw InvalidInput("constraint " + std::to_string(i) + " references block " +
                           std::to_string(term.block) + " out of range");
      }
      const Index n = block_sizes[static_cast<std::size_t>(term.block)];
      if (term.coefficient.rows() != n || term.coefficient.cols() != n) {
        throw InvalidInput("constraint " + std::to_string(i) + " coefficient on block " +
                           std::to_string(term.block) + " has wrong shape");
      }
      const SparseMatrix asym = term.coefficient - SparseMatrix(term.coefficient.transpose());
      for (Index k = 0; k < asym.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(asym, k); it; ++it) {
          if (std::abs(it.value()) > 1e-12) {
            throw InvalidInput("constraint " + std::to_string(i) + " coefficient on block " +
                               std::to_string(term.block) + " is not symmetric");
          }
        }
      }
    }
  }
}

namespace {

// A constraint coefficient restricted to one block, as flat triplets.
struct Coefficient {
  Index constraint = 0;
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> vals;
  bool dense = false;
  RMatrix dense_matrix;
};

struct BlockData {
  Index size = 0;
  RMatrix objective;
  std::vector<Coefficient> coefficients;
};

// Equality-only maximization form with inequality slacks as 1x1 blocks.
struct StandardForm {
  std::vector<BlockData> blocks;
  RVector rhs;
  Index user_blocks = 0;
  double sign = 1.0;  // -1 when the caller asked to minimize
};

StandardForm to_standard_form(const ConicProgram& p) {
  StandardForm sf;
  sf.sign = p.sense == Sense::Maximize ? 1.0 : -1.0;
  sf.user_blocks = static_cast<Index>(p.block_sizes.size());
  for (std::size_t b = 0; b < p.block_sizes.size(); ++b) {
    BlockData bd;
    bd.size = p.block_sizes[b];
    bd.objective = sf.sign * p.objective[b];
    sf.blocks.push_back(std::move(bd));
  }
  const Index m = static_cast<Index>(p.constraints.size());
  sf.rhs.resize(m);
  for (Index i = 0; i < m; ++i) {
    const auto& con = p.constraints[static_cast<std::size_t>(i)];
    sf.rhs(i) = con.rhs;
    for (const auto& term : con.terms) {
      Coefficient c;
      c.constraint = i;
      for (Index k = 0; k < term.coefficient.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(term.coefficient, k); it; ++it) {
          if (it.value() == 0.0) continue;
          c.rows.push_back(static_cast<int>(it.row()));
          c.cols.push_back(static_cast<int>(it.col()));
          c.vals.push_back(it.value());
        }
      }
      if (c.vals.empty()) continue;
      auto& bd = sf.blocks[static_cast<std::size_t>(term.block)];
      c.dense = static_cast<Index>(c.vals.size()) > 4 * bd.size;
      if (c.dense) c.dense_matrix = RMatrix(term.coefficient);
      bd.coefficients.push_back(std::move(c));
    }
    if (con.relation == Relation::LessEqual) {
      BlockData slack;
      slack.size = 1;
      slack.objective = RMatrix::Zero(1, 1);
      Coefficient c;
      c.constraint = i;
      c.rows = {0};
      c.cols = {0};
      c.vals = {1.0};
      slack.coefficients.push_back(std::move(c));
      sf.blocks.push_back(std::move(slack));
    }
  }
  return sf;
}

using Blocks = std::vector<RMatrix>;

// <A, M> for a symmetric coefficient A.
double inner(const Coefficient& c, const RMatrix& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.vals.size(); ++k) s += c.vals[k] * m(c.rows[k], c.cols[k]);
  return s;
}

RVector apply_a(const StandardForm& sf, const Blocks& x) {
  RVector out = RVector::Zero(sf.rhs.size());
  for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
    for (const auto& c : sf.blocks[b].coefficients) out(c.constraint) += inner(c, x[b]);
  }
  return out;
}

Blocks apply_at(const StandardForm& sf, const RVector& y) {
  Blocks out;
  out.reserve(sf.blocks.size());
  for (const auto& bd : sf.blocks) {
    RMatrix m = RMatrix::Zero(bd.size, bd.size);
    for (const auto& c : bd.coefficients) {
      const double w = y(c.constraint);
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < c.vals.size(); ++k) m(c.rows[k], c.cols[k]) += w * c.vals[k];
    }
    out.push_back(std::move(m));
  }
  return out;
}

double block_inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].cwiseProduct(b[i]).sum();
  return s;
}

// H_ij += Tr(A_i X A_j Y) for every pair of coefficients on this block.
void accumulate_schur(const BlockData& bd, const RMatrix& x, const RMatrix& y, RMatrix& h) {
  const auto& cs = bd.coefficients;
  const Index n = bd.size;
  const double* xp = x.data();
  const double* yp = y.data();
  for (std::size_t jj = 0; jj < cs.size(); ++jj) {
    const Coefficient& cj = cs[jj];
    if (cj.dense) {
      const RMatrix g = x * cj.dense_matrix * y;
      for (std::size_t ii = 0; ii < cs.size(); ++ii) {
        const Coefficient& ci = cs[ii];
        if (ci.dense && ii > jj) continue;
        double v = 0.0;
        for (std::size_t k = 0; k < ci.vals.size(); ++k) v += ci.vals[k] * g(ci.cols[k], ci.rows[k]);
        h(ci.constraint, cj.constraint) += v;
        if (ii != jj) h(cj.constraint, ci.constraint) += v;
      }
      continue;
    }
    for (std::size_t ii = 0; ii <= jj; ++ii) {
      const Coefficient& ci = cs[ii];
      if (ci.dense) continue;
      double v = 0.0;
      for (std::size_t a = 0; a < ci.vals.size(); ++a) {
        const int s = ci.rows[a];
        const int t = ci.cols[a];
        const double va = ci.vals[a];
        for (std::size_t b = 0; b < cj.vals.size(); ++b) {
          // A_i[s,t] X[t,r] A_j[r,c] Y[c,s]
          v += va * cj.vals[b] * xp[t + cj.rows[b] * n] * yp[cj.cols[b] + s * n];
        }
      }
      h(ci.constraint, cj.constraint) += v;
      if (ii != jj) h(cj.constraint, ci.constraint) += v;
    }
  }
}

// Largest alpha <= cap with X + alpha*dX PSD, given the Cholesky factor of X.
double max_step(const Eigen::LLT<RMatrix>& chol, const RMatrix& dx, double cap) {
  const auto& l = chol.matrixL();
  RMatrix m = l.solve(dx);
  m = l.solve(m.transpose()).transpose();
  const RMatrix sym = (m + m.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return cap;
  return std::min(cap, -1.0 / lmin);
}

struct Residuals {
  RVector rp;   // b - A(X)
  Blocks rd;    // A^T y - S - C
  double pres = 0.0;
  double dres = 0.0;
};

Residuals residuals(const StandardForm& sf, const Blocks& x, const RVector& y, const Blocks& s) {
  Residuals r;
  r.rp = sf.rhs - apply_a(sf, x);
  r.rd = apply_at(sf, y);
  r.pres = r.rp.size() ? r.rp.cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
    r.rd[b] -= s[b] + sf.blocks[b].objective;
    r.dres = std::max(r.dres, max_abs(r.rd[b]));
  }
  return r;
}

}  // namespace

SdpSolution solve_sdp(const ConicProgram& program, const SdpOptions& options) {
  program.validate();
  const StandardForm sf = to_standard_form(program);
  const std::size_t nb = sf.blocks.size();
  const Index m = sf.rhs.size();
  Index total_dim = 0;
  for (const auto& bd : sf.blocks) total_dim += bd.size;

  Blocks x, s;
  for (const auto& bd : sf.blocks) {
    x.push_back(options.initial_scale * RMatrix::Identity(bd.size, bd.size));
    s.push_back(options.initial_scale * RMatrix::Identity(bd.size, bd.size));
  }
  RVector y = RVector::Zero(m);

  SdpSolution sol;
  auto finish = [&](SdpStatus status, const std::string& msg, const Residuals& r, double pobj,
                    double dobj, int iters) {
    sol.status = status;
    sol.message = msg;
    sol.iterations = iters;
    sol.primal_value = sf.sign * pobj;
    sol.dual_value = sf.sign * dobj;
    sol.gap = std::abs(pobj - dobj) / std::max(1.0, std::abs(pobj));
    sol.primal_residual = r.pres;
    sol.dual_residual = r.dres;
    sol.complementarity = block_inner(x, s) / std::max(1.0, std::abs(pobj));
    sol.primal_blocks.assign(x.begin(), x.begin() + sf.user_blocks);
    sol.dual_slack_blocks.assign(s.begin(), s.begin() + sf.user_blocks);
    sol.dual_multipliers = sf.sign * y;
    return sol;
  };

  double prev_step = 1.0;
  int stalled = 0;
  for (int iter = 0;; ++iter) {
    const Residuals r = residuals(sf, x, y, s);
    double pobj = 0.0;
    for (std::size_t b = 0; b < nb; ++b) pobj += sf.blocks[b].objective.cwiseProduct(x[b]).sum();
    const double dobj = sf.rhs.dot(y);
    const double xs = block_inner(x, s);
    const double scale = std::max(1.0, std::abs(pobj));
    const double gap = std::abs(pobj - dobj) / scale;

    IterateRecord rec;
    rec.iteration = iter;
    rec.primal_value = sf.sign * pobj;
    rec.dual_value = sf.sign * dobj;
    rec.primal_residual = r.pres;
    rec.dual_residual = r.dres;
    rec.complementarity = xs;
    sol.history.push_back(rec);

    if (r.pres <= options.feas_tol && r.dres <= options.feas_tol && gap <= options.gap_tol &&
        xs / scale <= options.gap_tol) {
      return finish(SdpStatus::Optimal, "converged", r, pobj, dobj, iter);
    }
    double xmax = 0.0;
    for (const auto& xb : x) xmax = std::max(xmax, max_abs(xb));
    const double ymax = m ? y.cwiseAbs().maxCoeff() : 0.0;
    if (xmax > options.divergence_threshold || ymax > options.divergence_threshold) {
      return finish(SdpStatus::Infeasible,
                    xmax > options.divergence_threshold ? "primal iterates diverge (dual infeasible)"
                                                        : "dual iterates diverge (primal infeasible)",
                    r, pobj, dobj, iter);
    }
    if (iter >= options.max_iterations) {
      return finish(SdpStatus::NumericFailure,
                    "iteration limit " + std::to_string(options.max_iterations) + " reached", r,
                    pobj, dobj, iter);
    }
    if (stalled >= 8) {
      return finish(SdpStatus::NumericFailure, "step lengths stalled", r, pobj, dobj, iter);
    }

    const double mu = xs / static_cast<double>(total_dim);

    Blocks sinv(nb);
    std::vector<Eigen::LLT<RMatrix>> xchol(nb), schol(nb);
    bool ok = true;
    for (std::size_t b = 0; b < nb; ++b) {
      schol[b].compute(s[b]);
      xchol[b].compute(x[b]);
      if (schol[b].info() != Eigen::Success || xchol[b].info() != Eigen::Success) {
        ok = false;
        break;
      }
      sinv[b] = schol[b].solve(RMatrix::Identity(sf.blocks[b].size, sf.blocks[b].size));
      sinv[b] = (sinv[b] + sinv[b].transpose()) / 2;
    }
    if (!ok) return finish(SdpStatus::NumericFailure, "iterate left the PSD cone", r, pobj, dobj, iter);

    RMatrix h = RMatrix::Zero(m, m);
    for (std::size_t b = 0; b < nb; ++b) accumulate_schur(sf.blocks[b], x[b], sinv[b], h);
    Eigen::LLT<RMatrix> hchol(h);
    Eigen::LDLT<RMatrix> hldlt;
    const bool use_llt = hchol.info() == Eigen::Success;
    if (!use_llt) {
      hldlt.compute(h);
      if (hldlt.info() != Eigen::Success) {
        return finish(SdpStatus::NumericFailure, "Schur complement factorization failed", r, pobj,
                      dobj, iter);
      }
    }
    auto solve_h = [&](const RVector& rhs) -> RVector {
      return use_llt ? RVector(hchol.solve(rhs)) : RVector(hldlt.solve(rhs));
    };

    // X Rd S^{-1} is shared by the predictor and corrector right-hand sides.
    Blocks xrdy(nb);
    for (std::size_t b = 0; b < nb; ++b) xrdy[b] = x[b] * r.rd[b] * sinv[b];

    auto direction = [&](double mu_target, const Blocks* corr, RVector& dy, Blocks& ds,
                         Blocks& dx) {
      Blocks t(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        t[b] = mu_target * sinv[b] - xrdy[b];
        if (corr) t[b] -= (*corr)[b] * sinv[b];
      }
      const RVector rhs = apply_a(sf, t) - sf.rhs;
      dy = solve_h(rhs);
      ds = apply_at(sf, dy);
      dx.resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        ds[b] += r.rd[b];
        RMatrix d = mu_target * sinv[b] - x[b] - x[b] * ds[b] * sinv[b];
        if (corr) d -= (*corr)[b] * sinv[b];
        dx[b] = (d + d.transpose()) / 2;
      }
    };
    auto steps = [&](const Blocks& dx, const Blocks& ds, double cap) {
      double ap = cap, ad = cap;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(xchol[b], dx[b], cap));
        ad = std::min(ad, max_step(schol[b], ds[b], cap));
      }
      return std::pair{ap, ad};
    };

    RVector dy_a;
    Blocks ds_a, dx_a;
    direction(0.0, nullptr, dy_a, ds_a, dx_a);
    const auto [ap_a, ad_a] = steps(dx_a, ds_a, 1.0);
    double xs_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      xs_aff += (x[b] + ap_a * dx_a[b]).cwiseProduct(s[b] + ad_a * ds_a[b]).sum();
    }
    const double sigma = std::clamp(std::pow(std::max(xs_aff, 0.0) / xs, 3.0), 0.0, 1.0);

    Blocks corr(nb);
    for (std::size_t b = 0; b < nb; ++b) corr[b] = dx_a[b] * ds_a[b];
    RVector dy;
    Blocks ds, dx;
    direction(sigma * mu, &corr, dy, ds, dx);
    auto [ap, ad] = steps(dx, ds, std::numeric_limits<double>::infinity());
    ap = std::min(1.0, options.step_fraction * ap);
    ad = std::min(1.0, options.step_fraction * ad);

    for (std::size_t b = 0; b < nb; ++b) {
      x[b] += ap * dx[b];
      s[b] += ad * ds[b];
      x[b] = (x[b] + x[b].transpose()) / 2;
      s[b] = (s[b] + s[b].transpose()) / 2;
    }
    y += ad * dy;
    sol.history.back().step_primal = ap;
    sol.history.back().step_dual = ad;

    const double step = std::min(ap, ad);
    stalled = (step < 1e-8 && prev_step < 1e-8) ? stalled + 1 : 0;
    prev_step = step;
  }
}

void write_sdpa(std::ostream& os, const ConicProgram& program) {
  program.validate();
  const StandardForm sf = to_standard_form(program);
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "\"seqdisc conic program: maximize <C,X> s.t. <A_i,X> = b_i, X PSD\"\n";
  os << sf.rhs.size() << " = mDIM\n";
  os << sf.blocks.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
    os << (b ? " " : "") << sf.blocks[b].size;
  }
  os << " = bLOCKsTRUCT\n";
  for (Index i = 0; i < sf.rhs.size(); ++i) os << (i ? " " : "") << sf.rhs(i);
  os << "\n";
  // Matrix 0 is the objective; upper-triangular entries, 1-based indices.
  for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
    const RMatrix& c = sf.blocks[b].objective;
    for (Index p = 0; p < c.rows(); ++p) {
      for (Index q = p; q < c.cols(); ++q) {
        if (c(p, q) != 0.0) os << 0 << ' ' << b + 1 << ' ' << p + 1 << ' ' << q + 1 << ' ' << c(p, q) << "\n";
      }
    }
  }
  for (Index i = 0; i < sf.rhs.size(); ++i) {
    for (std::size_t b = 0; b < sf.blocks.size(); ++b) {
      for (const auto& c : sf.blocks[b].coefficients) {
        if (c.constraint != i) continue;
        for (std::size_t k = 0; k < c.vals.size(); ++k) {
          if (c.rows[k] > c.cols[k]) continue;
          os << i + 1 << ' ' << b + 1 << ' ' << c.rows[k] + 1 << ' ' << c.cols[k] + 1 << ' '
             << c.vals[k] << "\n";
        }
      }
    }
  }
  os.flags(flags);
  os.precision(prec);
}

// ---------------------------------------------------------------------------

CMatrix unembed_complex(const RMatrix& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0) {
    throw InvalidInput("unembed_complex: expected an even square matrix");
  }
  const Index d = x.rows() / 2;
  const RMatrix re = (x.topLeftCorner(d, d) + x.bottomRightCorner(d, d)) / 2;
  const RMatrix im = (x.bottomLeftCorner(d, d) - x.topRightCorner(d, d)) / 2;
  CMatrix h(d, d);
  h.real() = re;
  h.imag() = im;
  return hermitian_part(h);
}

std::vector<CMatrix> hermitian_basis(Index d) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  const double r = 1.0 / std::sqrt(2.0);
  for (Index p = 0; p < d; ++p) {
    CMatrix e = CMatrix::Zero(d, d);
    e(p, p) = 1.0;
    basis.push_back(std::move(e));
  }
  for (Index p = 0; p < d; ++p) {
    for (Index q = p + 1; q < d; ++q) {
      CMatrix re = CMatrix::Zero(d, d);
      re(p, q) = r;
      re(q, p) = r;
      basis.push_back(std::move(re));
      CMatrix im = CMatrix::Zero(d, d);
      im(p, q) = Complex(0.0, r);
      im(q, p) = Complex(0.0, -r);
      basis.push_back(std::move(im));
    }
  }
  return basis;
}

RVector hermitian_coordinates(const CMatrix& h) {
  const Index d = h.rows();
  RVector out(d * d);
  Index k = 0;
  const double s2 = std::sqrt(2.0);
  for (Index p = 0; p < d; ++p) out(k++) = h(p, p).real();
  for (Index p = 0; p < d; ++p) {
    for (Index q = p + 1; q < d; ++q) {
      // Tr(E h) for E = (E_pq + E_qp)/sqrt2 and i(E_pq - E_qp)/sqrt2.
      out(k++) = s2 * h(q, p).real();
      out(k++) = -s2 * h(q, p).imag();
    }
  }
  return out;
}

CMatrix from_hermitian_coordinates(const RVector& coords, Index d) {
  if (coords.size() != d * d) throw InvalidInput("from_hermitian_coordinates: wrong length");
  CMatrix h = CMatrix::Zero(d, d);
  Index k = 0;
  const double r = 1.0 / std::sqrt(2.0);
  for (Index p = 0; p < d; ++p) h(p, p) = coords(k++);
  for (Index p = 0; p < d; ++p) {
    for (Index q = p + 1; q < d; ++q) {
      const double a = coords(k++);
      const double b = coords(k++);
      h(p, q) += Complex(a * r, b * r);
      h(q, p) += Complex(a * r, -b * r);
    }
  }
  return h;
}

SparseMatrix half_embedding(const CMatrix& h) {
  const RMatrix e = embed_complex(h) / 2;
  return e.sparseView(1.0, 1e-15);
}

}  // namespace seqdisc
