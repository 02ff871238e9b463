#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "seqdisc/minerror.hpp"
#include "seqdisc/random.hpp"

using namespace seqdisc;

namespace {

const double kRt = 1.0 / std::sqrt(2.0);
const double kZeroPlus = 0.5 * (1.0 + kRt);

CVector ket(std::initializer_list<Complex> xs) {
  CVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (auto x : xs) v(i++) = x;
  return v;
}

Ensemble zero_plus() {
  return Ensemble(RawEnsemble{{0.5, 0.5}, {pure_state(ket({1, 0})), pure_state(ket({kRt, kRt}))}, ""});
}

Ensemble trine() {
  RawEnsemble raw;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    raw.priors.push_back(1.0 / 3.0);
    raw.states.push_back(pure_state(ket({std::cos(a / 2), std::sin(a / 2)})));
  }
  raw.priors[2] = 1.0 - raw.priors[0] - raw.priors[1];
  return Ensemble(raw);
}

Ensemble conjugated(const Ensemble& e, const CMatrix& u) {
  RawEnsemble raw = e.raw();
  for (auto& s : raw.states) s = u * s * u.adjoint();
  return Ensemble(raw);
}

Ensemble random_two_state(Rng& rng, Index d) {
  return random_ensemble(rng, {d, 2, 1 + rng.index(d), false});
}

}  // namespace

TEST(Helstrom, OrthogonalPureStates) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double q = 0.05 + 0.9 * rng.uniform();
    const Ensemble e(RawEnsemble{{q, 1.0 - q}, {pure_state(ket({1, 0})), pure_state(ket({0, 1}))}, ""});
    EXPECT_NEAR(helstrom_two(e).p, 1.0, 1e-12);
  }
}

TEST(Helstrom, IdenticalStates) {
  const CMatrix s = pure_state(ket({kRt, Complex(0, kRt)}));
  const Ensemble e(RawEnsemble{{0.7, 0.3}, {s, s}, ""});
  const auto h = helstrom_two(e);
  EXPECT_NEAR(h.p, 0.7, 1e-12);
  EXPECT_NEAR(success_probability(e, h.povm), 0.7, 1e-12);
}

TEST(Helstrom, ZeroPlus) {
  const auto h = helstrom_two(zero_plus());
  EXPECT_NEAR(h.p, kZeroPlus, 1e-12);
  EXPECT_NEAR(h.p, 0.853553, 1e-6);
  EXPECT_NEAR(success_probability(zero_plus(), h.povm), h.p, 1e-12);
}

TEST(Helstrom, NullSpaceGoesToFirstOutcome) {
  const Ensemble e(RawEnsemble{{0.5, 0.5},
                               {pure_state(ket({1, 0, 0})), pure_state(ket({0, 1, 0}))},
                               ""});
  const auto h = helstrom_two(e);
  EXPECT_NEAR(h.povm.effect(0)(2, 2).real(), 1.0, 1e-12);
  EXPECT_NEAR(h.povm.effect(1)(2, 2).real(), 0.0, 1e-12);
}

TEST(Helstrom, RejectsWrongStateCount) {
  EXPECT_THROW(helstrom_two(trine()), InvalidInput);
}

TEST(SolveMinError, MatchesHelstromOracle) {
  Rng rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const Ensemble e = random_two_state(rng, 2 + rng.index(3));
    const double expected = oracle::helstrom(e.prior(0), e.state(0), e.prior(1), e.state(1));
    const auto r = solve_min_error(e);
    EXPECT_NEAR(r.p, expected, 1e-6);
    EXPECT_NEAR(success_probability(e, r.povm), r.p, 1e-8);
    EXPECT_LE(r.povm.completeness_defect(), 1e-8);
  }
}

TEST(SolveMinError, OrthonormalBasisStates) {
  for (Index d : {2, 3, 4}) {
    RawEnsemble raw;
    for (Index i = 0; i < d; ++i) {
      CVector v = CVector::Zero(d);
      v(i) = 1.0;
      raw.priors.push_back(1.0 / static_cast<double>(d));
      raw.states.push_back(pure_state(v));
    }
    EXPECT_NEAR(solve_min_error(Ensemble(raw)).p, 1.0, 1e-6);
  }
}

TEST(SolveMinError, TrineAgainstSquareRootMeasurement) {
  const Ensemble e = trine();
  const Povm srm(oracle::square_root_measurement(e));
  EXPECT_NEAR(success_probability(e, srm), 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(check_hykl_certificate(e, srm, 1e-9).pass);
  const auto r = solve_min_error(e);
  EXPECT_NEAR(r.p, 2.0 / 3.0, 1e-6);
  EXPECT_TRUE(check_hykl_certificate(e, r.povm).pass);
}

TEST(SolveMinError, DualOperatorDominatesWeightedStates) {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 1 + rng.index(3);
    const Ensemble e = random_ensemble(rng, {d, 2 + rng.index(3), 1 + rng.index(d), false});
    const auto r = solve_min_error(e);
    EXPECT_NEAR(r.dual_z.trace().real(), r.p, 1e-6);
    for (Index j = 0; j < e.size(); ++j) {
      EXPECT_GE(oracle::min_eig(r.dual_z - e.weighted_state(j)), -1e-7);
    }
  }
}

TEST(SolveMinError, IterationLimitThrowsWithDiagnostics) {
  SdpOptions opts;
  opts.max_iterations = 1;
  try {
    solve_min_error(zero_plus(), opts);
    FAIL() << "expected NumericError";
  } catch (const NumericError& err) {
    EXPECT_NE(std::string(err.what()).find("iteration limit"), std::string::npos) << err.what();
  }
}

TEST(HyklCertificate, OrthogonalBasisPasses) {
  const Ensemble e(RawEnsemble{{0.3, 0.7}, {pure_state(ket({1, 0})), pure_state(ket({0, 1}))}, ""});
  CMatrix p0 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  const Povm m({p0, CMatrix::Identity(2, 2) - p0});
  const auto cert = check_hykl_certificate(e, m);
  EXPECT_TRUE(cert.pass);
  for (double w : cert.min_eigenvalues) EXPECT_GE(w, -1e-12);
}

TEST(HyklCertificate, SwappedLabelsFail) {
  Rng rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const Ensemble e = random_two_state(rng, 2);
    const auto h = helstrom_two(e);
    const Povm swapped({h.povm.effect(1), h.povm.effect(0)});
    const auto cert = check_hykl_certificate(e, swapped);
    EXPECT_FALSE(cert.pass);
    EXPECT_LT(*std::min_element(cert.min_eigenvalues.begin(), cert.min_eigenvalues.end()), -1e-6);
  }
}

TEST(HyklCertificate, HelstromPassesAtTightTolerance) {
  Rng rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const Ensemble e = random_two_state(rng, 2);
    EXPECT_TRUE(check_hykl_certificate(e, helstrom_two(e).povm, 1e-7).pass);
  }
}

TEST(HyklCertificate, RejectsArityAndDimensionMismatch) {
  const Povm three({CMatrix::Identity(2, 2) / 3.0, CMatrix::Identity(2, 2) / 3.0,
                    CMatrix::Identity(2, 2) / 3.0});
  EXPECT_THROW(check_hykl_certificate(zero_plus(), three), InvalidInput);
  const Povm big({CMatrix::Identity(3, 3) / 2.0, CMatrix::Identity(3, 3) / 2.0});
  EXPECT_THROW(check_hykl_certificate(zero_plus(), big), InvalidInput);
}

TEST(MinErrorProperty, SolverPovmsAreCertified) {
  Rng rng(36);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = 1 + rng.index(4);
    const Ensemble e = random_ensemble(rng, {d, 2 + rng.index(3), 1 + rng.index(d), false});
    EXPECT_TRUE(check_hykl_certificate(e, solve_min_error(e).povm).pass);
  }
}

TEST(MinErrorProperty, AtLeastLargestPrior) {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = 1 + rng.index(3);
    const Ensemble e = random_ensemble(rng, {d, 2 + rng.index(4), 1 + rng.index(d), false});
    const double qmax = *std::max_element(e.priors().begin(), e.priors().end());
    EXPECT_GE(solve_min_error(e).p, qmax - 1e-7);
  }
}

TEST(MinErrorProperty, UnitaryInvariance) {
  Rng rng(38);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + rng.index(2);
    const Ensemble e = random_ensemble(rng, {d, 2 + rng.index(3), 1 + rng.index(d), false});
    const Ensemble f = conjugated(e, random_unitary(rng, d));
    EXPECT_NEAR(solve_min_error(e).p, solve_min_error(f).p, 1e-7);
  }
}

TEST(VerifyProductMinError, SingleComponent) {
  const auto r = verify_product_min_error({zero_plus()});
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.abs_diff.has_value());
  EXPECT_EQ(*r.abs_diff, 0.0);
}

TEST(VerifyProductMinError, TwoCopiesOfZeroPlus) {
  const auto r = verify_product_min_error({zero_plus(), zero_plus()});
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.product_value, kZeroPlus * kZeroPlus, 1e-6);
  EXPECT_NEAR(r.product_value, 0.728553, 1e-6);
  ASSERT_TRUE(r.direct_value.has_value());
  EXPECT_NEAR(*r.direct_value, kZeroPlus * kZeroPlus, 1e-5);
  ASSERT_TRUE(r.tensored_certificate.has_value());
  EXPECT_TRUE(r.tensored_certificate->pass);
}

TEST(VerifyProductMinError, ZeroPlusWithTrine) {
  const auto r = verify_product_min_error({zero_plus(), trine()});
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.product_value, kZeroPlus * 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(r.product_value, 0.569036, 1e-6);
  ASSERT_TRUE(r.direct_value.has_value());
  EXPECT_NEAR(*r.direct_value, r.product_value, 1e-5);
}

TEST(VerifyProductMinError, CapacitySkipsDirectBranch) {
  ProductCheckOptions opts;
  opts.direct_cap = 4;
  const auto r = verify_product_min_error({zero_plus(), trine(), zero_plus()}, opts);
  EXPECT_FALSE(r.direct_value.has_value());
  ASSERT_FALSE(r.notes.empty());
  EXPECT_NE(r.notes.back().find("total_dim 8"), std::string::npos) << r.notes.back();
  EXPECT_FALSE(r.tensored_certificate.has_value());
  EXPECT_EQ(r.local_values.size(), 3u);
  EXPECT_TRUE(r.pass);
}

TEST(VerifyProductMinError, SolverFailureIsRecorded) {
  ProductCheckOptions opts;
  opts.sdp.max_iterations = 1;
  const auto r = verify_product_min_error({zero_plus(), zero_plus()}, opts);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.solver_failure);
  EXPECT_FALSE(r.notes.empty());
}

TEST(MinErrorProperty, TensoredLocalOptimaAreCertified) {
  Rng rng(39);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<Ensemble> comps;
    const Index k = 2 + rng.index(2);
    for (Index i = 0; i < k; ++i) {
      const Index d = 1 + rng.index(k == 2 ? 3 : 2);
      comps.push_back(random_ensemble(rng, {d, 2 + rng.index(2), 1 + rng.index(d), false}));
    }
    const auto r = verify_product_min_error(comps);
    EXPECT_TRUE(r.pass);
    ASSERT_TRUE(r.tensored_certificate.has_value());
    EXPECT_TRUE(r.tensored_certificate->pass);
    ASSERT_TRUE(r.tensored_value.has_value());
    EXPECT_NEAR(*r.tensored_value, r.product_value, 1e-8);
  }
}
