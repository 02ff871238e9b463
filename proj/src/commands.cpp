#include "seqdisc/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "seqdisc/io.hpp"
#include "seqdisc/minerror.hpp"
#include "seqdisc/random.hpp"
#include "seqdisc/unambiguous.hpp"

namespace seqdisc {

using Report = nlohmann::ordered_json;

Paradigm parse_paradigm(const std::string& name) {
  if (name == "min-error") return Paradigm::MinError;
  if (name == "unambiguous") return Paradigm::Unambiguous;
  throw InvalidInput("unknown paradigm \"" + name + "\" (expected min-error or unambiguous)");
}

std::string to_string(Paradigm p) {
  return p == Paradigm::MinError ? "min-error" : "unambiguous";
}

RandomCheckSpec parse_random_spec(const std::vector<std::string>& tokens) {
  RandomCheckSpec spec;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("--random: expected key=value, got \"" + tok + "\"");
    }
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    long long n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InvalidInput("--random: value of " + key + " is not an integer: \"" + value + "\"");
    }
    if (key == "seed") {
      if (n < 0) throw InvalidInput("--random: seed must be nonnegative");
      spec.seed = static_cast<std::uint64_t>(n);
      continue;
    }
    if (n < 1) throw InvalidInput("--random: " + key + " must be positive");
    if (key == "d") {
      spec.dim = n;
    } else if (key == "l") {
      spec.count = n;
    } else if (key == "k") {
      spec.length = n;
    } else if (key == "trials") {
      spec.trials = n;
    } else {
      throw InvalidInput("--random: unknown key \"" + key + "\" (expected d, l, k, seed, trials)");
    }
  }
  if (spec.count < 2) throw InvalidInput("--random: l must be at least 2");
  return spec;
}

namespace {

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string scalar_text(const Report& v) {
  if (v.is_null()) return "none";
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool is_scalar(const Report& v) { return !v.is_object() && !v.is_array(); }

bool is_flat_array(const Report& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const Report& x) {
           return is_scalar(x) || (x.is_array() && std::all_of(x.begin(), x.end(), is_scalar));
         });
}

std::string flat_text(const Report& v) {
  if (is_scalar(v)) return scalar_text(v);
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += flat_text(v[i]);
  }
  return s + "]";
}

void render_text(const Report& v, int indent, std::ostream& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object()) {
    for (const auto& [key, value] : v.items()) {
      if (is_scalar(value) || is_flat_array(value)) {
        out << pad << key << ": " << flat_text(value) << "\n";
      } else {
        out << pad << key << ":\n";
        render_text(value, indent + 2, out);
      }
    }
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (is_scalar(item) || is_flat_array(item)) {
        out << pad << "- " << flat_text(item) << "\n";
      } else {
        out << pad << "-\n";
        render_text(item, indent + 2, out);
      }
    }
  } else {
    out << pad << scalar_text(v) << "\n";
  }
}

Report report_header(const std::string& command, const ReportOptions& ro) {
  Report r;
  r["command"] = command;
  r["version"] = SEQDISC_VERSION;
  r["arguments"] = ro.argv;
  return r;
}

Report input_digest(const std::string& path) {
  return Report{{"path", path}, {"sha256", sha256_hex(read_text_file(path))}};
}

Report inputs_json(const std::vector<std::string>& paths) {
  Report a = Report::array();
  for (const auto& p : paths) a.push_back(input_digest(p));
  return a;
}

Report tolerance_json(const Tolerances& tol, const SdpOptions& sdp) {
  return Report{{"rank_tol", tol.rank_tol},
                {"psd_tol", tol.psd_tol},
                {"subspace_eq_tol", tol.subspace_eq_tol},
                {"sdp_gap_tol", sdp.gap_tol},
                {"sdp_feas_tol", sdp.feas_tol}};
}

Report solver_json(const SdpSolution& s) {
  return Report{{"status", to_string(s.status)},
                {"iterations", s.iterations},
                {"primal_value", s.primal_value},
                {"dual_value", s.dual_value},
                {"gap", s.gap},
                {"primal_residual", s.primal_residual},
                {"dual_residual", s.dual_residual}};
}

Report solver_list_json(const std::vector<SdpSolution>& runs) {
  Report a = Report::array();
  for (const auto& s : runs) a.push_back(solver_json(s));
  return a;
}

Report certificate_json(const HyklCertificate& c) {
  return Report{{"pass", c.pass},
                {"tolerance", c.tolerance},
                {"min_eigenvalues", c.min_eigenvalues},
                {"asymmetry", c.asymmetry}};
}

Report residuals_json(const UdResiduals& r, double tol) {
  return Report{{"tolerance", tol},
                {"primal_value", r.primal_value},
                {"dual_value", r.dual_value},
                {"primal_residual", r.primal_residual},
                {"dual_residual", r.dual_residual},
                {"unambiguity", r.unambiguity}};
}

Report feasibility_json(const UdFeasibility& f) {
  Report r;
  r["overall"] = f.overall;
  r["support_rank"] = f.support_rank;
  std::vector<bool> verdicts(f.verdicts.begin(), f.verdicts.end());
  r["verdicts"] = verdicts;
  if (!f.removed_support_ranks.empty()) r["removed_support_ranks"] = f.removed_support_ranks;
  if (!f.distances.empty()) r["distances"] = f.distances;
  return r;
}

bool residuals_ok(const UdResiduals& r, double p, double tol) {
  return r.primal_residual <= tol && r.dual_residual <= tol && r.unambiguity <= tol &&
         std::abs(r.dual_value - p) <= tol;
}

void emit(Report r, const ReportOptions& ro, double seconds, std::ostream& out) {
  if (ro.timing) r["wall_time_seconds"] = seconds;
  if (ro.json) {
    out << r.dump(2) << "\n";
  } else {
    render_text(r, 0, out);
  }
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "seqdisc: solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const Error& e) {
    err << "seqdisc: error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "seqdisc: error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "seqdisc: internal error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Ensemble> load_components(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InvalidInput("no ensemble files given");
  std::vector<Ensemble> out;
  for (const auto& p : paths) out.push_back(load_ensemble(p));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const SolveArgs& args, const ReportOptions& ro, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto start = Clock::now();
    const Tolerances tol;
    const SdpOptions sdp;
    const Ensemble e = load_ensemble(args.ensemble, tol);

    Report r = report_header("solve", ro);
    r["inputs"] = inputs_json({args.ensemble});
    r["paradigm"] = to_string(args.paradigm);
    r["tolerances"] = tolerance_json(tol, sdp);
    r["ensemble"] = Report{{"dimension", e.dim()}, {"states", e.size()}, {"label", e.label()}};

    bool pass = true;
    Povm povm;
    if (args.paradigm == Paradigm::MinError) {
      const double ctol = args.tol.value_or(1e-6);
      r["tolerances"]["certificate_tol"] = ctol;
      MinErrorResult res = solve_min_error(e, sdp);
      const HyklCertificate cert = check_hykl_certificate(e, res.povm, ctol);
      r["result"] = Report{{"p", res.p}};
      if (e.size() == 2) r["result"]["two_state_closed_form_p"] = helstrom_two(e, tol).p;
      r["certificate"] = certificate_json(cert);
      r["solver"] = solver_json(res.sdp);
      r["solver"]["refinements"] = res.refinements;
      pass = cert.pass;
      povm = std::move(res.povm);
    } else {
      const double rtol = args.tol.value_or(1e-7);
      r["tolerances"]["residual_tol"] = rtol;
      r["feasibility"] = feasibility_json(check_ud_feasible(e, tol));
      UdSolution res = solve_unambiguous(e, sdp, tol);
      std::vector<Index> ranks;
      for (const auto& t : res.thetas) ranks.push_back(t.rank());
      r["result"] = Report{{"p", res.p}, {"theta_ranks", ranks}};
      r["residuals"] = residuals_json(res.residuals, rtol);
      pass = residuals_ok(res.residuals, res.p, rtol);
      r["residuals"]["pass"] = pass;
      if (res.sdp) r["solver"] = solver_json(*res.sdp);
      povm = std::move(res.povm);
    }
    if (args.emit_povm) {
      write_text_file(*args.emit_povm, povm_to_json(povm));
      r["povm_written_to"] = *args.emit_povm;
    }
    r["pass"] = pass;
    emit(std::move(r), ro, seconds_since(start), out);
    return pass ? kExitOk : kExitVerifyFailed;
  });
}

// ---------------------------------------------------------------------------
// verify-product
// ---------------------------------------------------------------------------

int cmd_verify_product(const VerifyProductArgs& args, const ReportOptions& ro,
                       std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto start = Clock::now();
    const std::vector<Ensemble> comps = load_components(args.components);
    const SequenceEnsemble seq(comps);
    const bool direct = comps.size() == 1 || seq.total_dim() <= args.direct_cap;

    Report r = report_header("verify-product", ro);
    r["inputs"] = inputs_json(args.components);
    r["paradigm"] = to_string(args.paradigm);
    r["tolerances"] = tolerance_json(Tolerances{}, SdpOptions{});
    r["tolerances"]["product_tol"] = args.tol;
    r["direct_cap"] = args.direct_cap;
    r["total_dimension"] = seq.total_dim();

    bool pass = false;
    bool solver_failure = false;
    if (args.paradigm == Paradigm::MinError) {
      ProductCheckOptions opt;
      opt.direct_cap = args.direct_cap;
      opt.tol = args.tol;
      r["tolerances"]["certificate_tol"] = opt.certificate_tol;
      const ProductTheoremReport rep = verify_product_min_error(comps, opt);
      r["result"] = Report{{"local_values", rep.local_values},
                           {"product_value", rep.product_value},
                           {"direct_value", rep.direct_value ? Report(*rep.direct_value) : Report()},
                           {"abs_diff", rep.abs_diff ? Report(*rep.abs_diff) : Report()},
                           {"tolerance", rep.tolerance},
                           {"direct_branch", direct ? "ran" : "skipped (capacity)"}};
      Report certs;
      Report local = Report::array();
      for (const auto& c : rep.local_certificates) local.push_back(certificate_json(c));
      certs["local"] = std::move(local);
      certs["tensored"] =
          rep.tensored_certificate ? certificate_json(*rep.tensored_certificate) : Report();
      certs["tensored_value"] = rep.tensored_value ? Report(*rep.tensored_value) : Report();
      r["certificates"] = std::move(certs);
      r["solver"] = solver_list_json(rep.solver_runs);
      r["notes"] = rep.notes;
      pass = rep.pass;
      solver_failure = rep.solver_failure;
    } else {
      UdProductOptions opt;
      opt.direct_cap = args.direct_cap;
      opt.tol = args.tol;
      opt.sample_tuples = args.sample_tuples;
      opt.seed = args.seed;
      r["tolerances"]["construction_tol"] = opt.construction_tol;
      const UdProductReport rep = verify_product_unambiguous(comps, opt);
      r["result"] = Report{{"local_values", rep.local_values},
                           {"product_value", rep.product_value},
                           {"direct_value", rep.direct_value ? Report(*rep.direct_value) : Report()},
                           {"abs_diff", rep.abs_diff ? Report(*rep.abs_diff) : Report()},
                           {"tolerance", rep.tolerance},
                           {"direct_branch", direct ? "ran" : "skipped (capacity)"}};
      r["kernel_decomposition"] =
          Report{{"tuples_checked", rep.tuples_checked},
                 {"tuples_mismatched", rep.tuples_mismatched},
                 {"max_projector_distance",
                  rep.theta_max_distance ? Report(*rep.theta_max_distance) : Report()},
                 {"tolerance", opt.tolerances.subspace_eq_tol},
                 {"sampled", args.sample_tuples.has_value()},
                 {"seed", args.seed}};
      r["constructed_solution"] =
          rep.constructed ? residuals_json(*rep.constructed, rep.construction_tol) : Report();
      r["solver"] = solver_list_json(rep.solver_runs);
      r["notes"] = rep.notes;
      pass = rep.pass;
      solver_failure = rep.solver_failure;
    }
    r["pass"] = pass;
    emit(std::move(r), ro, seconds_since(start), out);
    if (solver_failure) return kExitSolverFailure;
    return pass ? kExitOk : kExitVerifyFailed;
  });
}

// ---------------------------------------------------------------------------
// check-ud
// ---------------------------------------------------------------------------

int cmd_check_ud(const CheckUdArgs& args, const ReportOptions& ro, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto start = Clock::now();
    Report r = report_header("check-ud", ro);
    const Tolerances tol;
    r["tolerances"] = Report{{"rank_tol", tol.rank_tol},
                             {"subspace_eq_tol", tol.subspace_eq_tol}};
    r["direct_cap"] = args.direct_cap;
    bool agree_all = true;

    if (args.random) {
      const RandomCheckSpec& spec = *args.random;
      Index dim_total = 1;
      for (Index i = 0; i < spec.length; ++i) dim_total *= spec.dim;
      if (dim_total > args.direct_cap) {
        throw CapacityError("check-ud --random: total dimension " + std::to_string(dim_total) +
                            " exceeds the direct cap " + std::to_string(args.direct_cap));
      }
      Rng rng(spec.seed);
      Index agreements = 0;
      Index feasible = 0;
      std::vector<Index> disagreeing;
      for (Index trial = 0; trial < spec.trials; ++trial) {
        std::vector<Ensemble> comps;
        for (Index i = 0; i < spec.length; ++i) {
          RandomEnsembleSpec es;
          es.dim = spec.dim;
          es.count = spec.count;
          es.rank = 1 + rng.index(spec.dim);
          comps.push_back(random_ensemble(rng, es));
        }
        const UdFeasibility per =
            check_sequence_ud_feasible(comps, FeasibilityMode::PerComponent, args.direct_cap, tol);
        const UdFeasibility dir =
            check_sequence_ud_feasible(comps, FeasibilityMode::Direct, args.direct_cap, tol);
        const bool agree = per.overall == dir.overall && per.verdicts == dir.verdicts;
        if (agree) {
          ++agreements;
        } else {
          disagreeing.push_back(trial);
        }
        if (per.overall) ++feasible;
      }
      agree_all = disagreeing.empty();
      r["random"] = Report{{"generator", Rng::kName},
                           {"seed", spec.seed},
                           {"d", spec.dim},
                           {"l", spec.count},
                           {"k", spec.length},
                           {"trials", spec.trials},
                           {"feasible", feasible},
                           {"infeasible", spec.trials - feasible},
                           {"agreements", agreements},
                           {"disagreeing_trials", disagreeing}};
    } else {
      const std::vector<Ensemble> comps = load_components(args.components);
      r["inputs"] = inputs_json(args.components);
      const UdFeasibility per =
          check_sequence_ud_feasible(comps, FeasibilityMode::PerComponent, args.direct_cap, tol);
      Report components = Report::array();
      for (std::size_t i = 0; i < comps.size(); ++i) {
        Report c = feasibility_json(per.components[i]);
        c["path"] = args.components[i];
        components.push_back(std::move(c));
      }
      r["components"] = std::move(components);
      r["per_component"] = Report{{"overall", per.overall}};
      const SequenceEnsemble seq(comps);
      if (seq.total_dim() <= args.direct_cap) {
        const UdFeasibility dir =
            check_sequence_ud_feasible(comps, FeasibilityMode::Direct, args.direct_cap, tol);
        r["direct"] = feasibility_json(dir);
        agree_all = per.overall == dir.overall && per.verdicts == dir.verdicts;
        r["modes_agree"] = agree_all;
      } else {
        r["direct"] = "skipped (capacity)";
        r["modes_agree"] = Report();
      }
      r["feasible"] = per.overall;
    }
    r["pass"] = agree_all;
    emit(std::move(r), ro, seconds_since(start), out);
    return agree_all ? kExitOk : kExitVerifyFailed;
  });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

namespace {

Index sample_cumulative(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto idx = static_cast<Index>(it - cumulative.begin());
  return std::min<Index>(idx, static_cast<Index>(cumulative.size()) - 1);
}

std::vector<double> cumulative_of(const std::vector<double>& weights) {
  std::vector<double> c(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    run += weights[i] / total;
    c[i] = run;
  }
  return c;
}

}  // namespace

SimulationResult simulate_sequence(Paradigm paradigm, const std::vector<Ensemble>& components,
                                   std::int64_t shots, std::uint64_t seed, Index cap) {
  if (shots < 1) throw InvalidInput("simulate: shot count must be at least 1");
  if (components.empty()) throw InvalidInput("simulate: no components");

  std::vector<Povm> local;
  for (const auto& c : components) {
    local.push_back(paradigm == Paradigm::MinError ? solve_min_error(c).povm
                                                   : solve_unambiguous(c).povm);
  }
  const SequenceEnsemble seq(components);
  if (seq.total_dim() > cap) {
    throw CapacityError("simulate: total dimension " + std::to_string(seq.total_dim()) +
                        " exceeds cap " + std::to_string(cap));
  }
  const Povm measurement = tensor_povm(local, cap);

  // announced[o] is the tuple named by outcome o, or -1 for the inconclusive one.
  std::vector<Index> announced(static_cast<std::size_t>(measurement.size()), -1);
  const std::vector<Index> conclusive = measurement.conclusive_indices();
  for (std::size_t c = 0; c < conclusive.size(); ++c) {
    announced[static_cast<std::size_t>(conclusive[c])] = static_cast<Index>(c);
  }

  std::vector<double> priors;
  std::vector<std::vector<double>> outcome_cdf;
  for (Index t = 0; t < seq.total_count(); ++t) {
    const SequenceTuple tuple = seq.tuple_of(t);
    priors.push_back(seq.prior(tuple));
    const CMatrix rho = seq.state(tuple, cap);
    std::vector<double> born;
    for (const auto& m : measurement.effects()) {
      born.push_back(std::max(0.0, (rho * m).trace().real()));
    }
    outcome_cdf.push_back(cumulative_of(born));
  }
  const std::vector<double> prior_cdf = cumulative_of(priors);

  SimulationResult out;
  out.shots = shots;
  out.analytic_p = success_probability(seq, measurement);
  Rng rng(seed);
  for (std::int64_t s = 0; s < shots; ++s) {
    const Index t = sample_cumulative(prior_cdf, rng.uniform());
    const Index o = sample_cumulative(outcome_cdf[static_cast<std::size_t>(t)], rng.uniform());
    const Index named = announced[static_cast<std::size_t>(o)];
    if (named < 0) {
      ++out.inconclusive;
    } else if (named == t) {
      ++out.successes;
    } else {
      ++out.misidentified;
    }
  }
  const auto n = static_cast<double>(shots);
  out.empirical_p = static_cast<double>(out.successes) / n;
  out.standard_error = std::sqrt(out.empirical_p * (1.0 - out.empirical_p) / n);
  return out;
}

int cmd_simulate(const SimulateArgs& args, const ReportOptions& ro, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto start = Clock::now();
    const std::vector<Ensemble> comps = load_components(args.components);
    const SimulationResult sim =
        simulate_sequence(args.paradigm, comps, args.shots, args.seed, args.direct_cap);

    Report r = report_header("simulate", ro);
    r["inputs"] = inputs_json(args.components);
    r["paradigm"] = to_string(args.paradigm);
    r["tolerances"] = tolerance_json(Tolerances{}, SdpOptions{});
    r["tolerances"]["sigma_band"] = 3;
    r["generator"] = Rng::kName;
    r["seed"] = args.seed;
    r["shots"] = sim.shots;
    const double deviation = std::abs(sim.empirical_p - sim.analytic_p);
    const bool within = deviation <= 3.0 * sim.standard_error;
    r["result"] = Report{{"analytic_p", sim.analytic_p},
                         {"empirical_p", sim.empirical_p},
                         {"standard_error", sim.standard_error},
                         {"deviation", deviation},
                         {"within_3_sigma", within},
                         {"successes", sim.successes}};
    bool pass = true;
    if (args.paradigm == Paradigm::Unambiguous) {
      r["result"]["inconclusive"] = sim.inconclusive;
      r["result"]["misidentified"] = sim.misidentified;
      r["result"]["empirical_error_rate"] =
          static_cast<double>(sim.misidentified) / static_cast<double>(sim.shots);
      pass = sim.misidentified == 0;
    }
    r["pass"] = pass;
    emit(std::move(r), ro, seconds_since(start), out);
    return pass ? kExitOk : kExitVerifyFailed;
  });
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

int cmd_certify(const CertifyArgs& args, const ReportOptions& ro, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto start = Clock::now();
    const Tolerances tol;
    const Ensemble e = load_ensemble(args.ensemble, tol);
    const Povm m = load_povm(args.povm, tol);
    if (m.dim() != e.dim()) {
      throw InvalidInput(args.povm + ": POVM dimension " + std::to_string(m.dim()) +
                         " does not match ensemble dimension " + std::to_string(e.dim()));
    }

    Report r = report_header("certify", ro);
    r["inputs"] = inputs_json({args.ensemble, args.povm});
    r["tolerances"] = tolerance_json(tol, SdpOptions{});
    r["tolerances"]["certificate_tol"] = args.tol;
    bool optimal = false;

    if (!m.inconclusive_index()) {
      r["kind"] = "min-error";
      const HyklCertificate cert = check_hykl_certificate(e, m, args.tol);
      r["value"] = success_probability(e, m);
      r["certificate"] = certificate_json(cert);
      optimal = cert.pass;
    } else {
      r["kind"] = "unambiguous";
      if (m.conclusive_count() != e.size()) {
        throw InvalidInput(args.povm + ": expected " + std::to_string(e.size()) +
                           " conclusive effects, found " + std::to_string(m.conclusive_count()));
      }
      const double unambiguity_tol = 1e-7;
      const std::vector<Index> conclusive = m.conclusive_indices();
      double leak = 0.0;
      for (std::size_t j = 0; j < conclusive.size(); ++j) {
        for (Index i = 0; i < e.size(); ++i) {
          if (i == static_cast<Index>(j)) continue;
          leak = std::max(leak, std::abs((e.state(i) * m.effect(conclusive[j])).trace().real()));
        }
      }
      const PsdCheck rest = is_psd(m.effect(*m.inconclusive_index()), tol.psd_tol);
      const double value = success_probability(e, m);
      const UdSolution best = solve_unambiguous(e, SdpOptions{}, tol);
      optimal = leak <= unambiguity_tol && value >= best.p - args.tol;
      r["value"] = value;
      r["optimum"] = best.p;
      r["residuals"] = Report{{"unambiguity", leak},
                              {"unambiguity_tol", unambiguity_tol},
                              {"inconclusive_min_eigenvalue", rest.min_eigenvalue},
                              {"completeness_defect", m.completeness_defect()},
                              {"value_shortfall", std::max(0.0, best.p - value)}};
    }
    r["optimal"] = optimal;
    emit(std::move(r), ro, seconds_since(start), out);
    return optimal ? kExitOk : kExitVerifyFailed;
  });
}

}  // namespace seqdisc
