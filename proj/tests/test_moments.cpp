#include <gtest/gtest.h>

#include <cmath>

#include "rscev/moments.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace rscev {
namespace {

using testing::forward_moment;
using testing::Gen;
using testing::rel_err;

TEST(CheckOrder, SignMustMatchBranch) {
  EXPECT_NO_THROW(check_order(ElasticityBranch::Low, MomentOrder{3}));
  EXPECT_NO_THROW(check_order(ElasticityBranch::High, MomentOrder{-3}));
  EXPECT_NO_THROW(check_order(ElasticityBranch::High, MomentOrder{0}));
  EXPECT_THROW(check_order(ElasticityBranch::Low, MomentOrder{-1}), Error);
  EXPECT_THROW(check_order(ElasticityBranch::High, MomentOrder{1}), Error);
}

TEST(BuildSystem, EntriesForLowPair) {
  const auto model = testing::validation_low(1.0);
  const auto sys = build_system(model, MomentOrder{2});
  ASSERT_EQ(sys.P.size(), 3u);
  ASSERT_EQ(sys.D.size(), 2u);
  EXPECT_EQ(sys.P[0], model.generator().matrix());
  EXPECT_DOUBLE_EQ(sys.P[2](0, 0), -1.0 - 2 * 0.01);
  EXPECT_DOUBLE_EQ(sys.P[2](1, 1), -1.0 - 2 * 0.5);
  EXPECT_DOUBLE_EQ(sys.P[2](0, 1), 1.0);
  // gamma^<0> = k theta, gamma^<1> = 2 (k theta + s^2/2) at alpha = 1.
  EXPECT_DOUBLE_EQ(sys.D[0](0), 0.01);
  EXPECT_DOUBLE_EQ(sys.D[0](1), 0.25);
  EXPECT_DOUBLE_EQ(sys.D[1](0), 2 * (0.01 + 0.5 * 0.0081));
  EXPECT_DOUBLE_EQ(sys.D[1](1), 2 * (0.25 + 0.5 * 0.0225));
}

TEST(BuildSystem, EntriesForHighPair) {
  const auto model = testing::validation_high(0.5);
  const auto sys = build_system(model, MomentOrder{-1});
  EXPECT_DOUBLE_EQ(sys.P[1](0, 0), -1.0 + (-0.01) * 2.0);
  EXPECT_DOUBLE_EQ(sys.P[1](1, 1), -1.0 + (-0.5) * 2.0);
  // gamma-bar^<0> = (1/a)(-k theta + s^2/2 (1/a + 1)) with a = 1/2.
  EXPECT_DOUBLE_EQ(sys.D[0](0), 2.0 * (0.01 + 0.5 * 0.0081 * 3.0));
  EXPECT_DOUBLE_EQ(sys.D[0](1), 2.0 * (0.25 + 0.5 * 0.0225 * 3.0));
}

TEST(SolveCoefficients, InitialConditionTable) {
  const auto model = testing::validation_low(1.0);
  const auto t = solve_coefficients(model, MomentOrder{2}, 0.0);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(t.coeffs(j, 2), 1.0);
    EXPECT_EQ(t.coeffs(j, 1), 0.0);
    EXPECT_EQ(t.coeffs(j, 0), 0.0);
  }
}

TEST(SolveCoefficients, CirMeanCoefficients) {
  const auto model = testing::single_state(ElasticityBranch::Low, 1.0, 0.5, 0.5, 0.15);
  const auto t = solve_coefficients(model, MomentOrder{1}, 1.0);
  EXPECT_NEAR(t.coeffs(0, 1), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(t.coeffs(0, 0), 0.5 * (1 - std::exp(-0.5)), 1e-15);
}

TEST(SolveCoefficients, RejectsBadTau) {
  const auto model = testing::validation_low(1.0);
  EXPECT_THROW(solve_coefficients(model, MomentOrder{1}, -1.0), Error);
  EXPECT_THROW(solve_coefficients(model, MomentOrder{1}, std::nan("")), Error);
}

TEST(SolveCoefficients, ExponentGuard) {
  const auto model = testing::validation_low(1.0);
  try {
    solve_coefficients(model, MomentOrder{2}, 1e4);
    FAIL() << "expected NonFiniteResult";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteResult);
  }
}

TEST(ConditionalMoment, RejectsBadArguments) {
  const auto model = testing::validation_low(1.0);
  EXPECT_THROW(conditional_moment(model, MomentOrder{1}, 1.0, 0.0, 0), Error);
  EXPECT_THROW(conditional_moment(model, MomentOrder{1}, 1.0, 1.0, 2), Error);
  EXPECT_THROW(conditional_moment(model, MomentOrder{-1}, 1.0, 1.0, 0), Error);
}

TEST(ConditionalMomentProperty, InitialCondition) {
  Gen gen(21);
  for (int c = 0; c < 300; ++c) {
    SCOPED_TRACE(c);
    const auto model = gen.model();
    const int n = gen.order(model.branch(), 4);
    const double R = gen.log_uniform(0.05, 20.0);
    const auto i = static_cast<Eigen::Index>(gen.integer(0, static_cast<int>(model.states()) - 1));
    const double want = std::pow(R, n / model.alpha());
    const double got = conditional_moment(model, MomentOrder{n}, 0.0, R, i);
    EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, want));
  }
}

TEST(ConditionalMomentProperty, ZerothMomentIsOne) {
  Gen gen(22);
  for (int c = 0; c < 200; ++c) {
    const auto model = gen.model();
    const double tau = gen.uniform(0.0, 50.0);
    const double R = gen.log_uniform(0.05, 20.0);
    for (Eigen::Index i = 0; i < model.states(); ++i) {
      EXPECT_NEAR(conditional_moment(model, MomentOrder{0}, tau, R, i), 1.0, 1e-12);
    }
  }
}

TEST(ConditionalMoment, CirMeanAndSecondMoment) {
  for (double tau : {0.0, 0.1, 1.0, 3.0, 10.0}) {
    for (double R : {0.2, 1.0, 4.0}) {
      const auto m = testing::single_state(ElasticityBranch::Low, 1.0, 0.5, 0.5, 0.15);
      EXPECT_LT(rel_err(conditional_moment(m, MomentOrder{1}, tau, R, 0),
                        testing::cir_mean(0.5, 0.5, R, tau)),
                1e-13);
      EXPECT_LT(rel_err(conditional_moment(m, MomentOrder{2}, tau, R, 0),
                        testing::cir_second_moment(0.5, 0.5, 0.15, R, tau)),
                1e-13);
    }
  }
}

TEST(ConditionalMoment, BetaZeroSecondPower) {
  // alpha = 1/2: n = 1 is E[R^2].
  const auto m = testing::single_state(ElasticityBranch::Low, 0.5, 1.0, 2.0, 0.5);
  for (double tau : {0.0, 0.3, 2.0, 8.0}) {
    for (double R : {0.5, 1.5, 3.0}) {
      EXPECT_LT(rel_err(conditional_moment(m, MomentOrder{1}, tau, R, 0),
                        testing::ou_like_second_moment(1.0, 2.0, 0.5, R, tau)),
                1e-13);
    }
  }
}

TEST(ConditionalMoment, InverseFellerReciprocalMean) {
  const auto m = testing::single_state(ElasticityBranch::High, 1.0, -0.5, 1.0, -0.2);
  for (double tau : {0.0, 0.3, 2.0, 8.0}) {
    for (double R : {0.5, 1.5, 3.0}) {
      EXPECT_LT(rel_err(conditional_moment(m, MomentOrder{-1}, tau, R, 0),
                        testing::inverse_feller_reciprocal_mean(-0.5, 1.0, -0.2, R, tau)),
                1e-13);
    }
  }
}

TEST(ConditionalMomentProperty, AgreesWithForwardEquations) {
  Gen gen(23);
  for (int c = 0; c < 60; ++c) {
    SCOPED_TRACE(c);
    const auto model = gen.model();
    const int n = gen.order(model.branch(), 4);
    const double tau = gen.uniform(0.05, 3.0);
    const double R = gen.log_uniform(0.2, 5.0);
    const int i = gen.integer(0, static_cast<int>(model.states()) - 1);
    const double want = forward_moment(model, n, tau, R, i);
    const double got = conditional_moment(model, MomentOrder{n}, tau, R, i);
    EXPECT_LT(std::abs(got - want), 1e-9 * std::max(1.0, std::abs(want)))
        << "n=" << n << " alpha=" << model.alpha() << " m=" << model.states();
  }
}

TEST(ConditionalMomentProperty, FrozenChainDecouples) {
  Gen gen(24);
  for (int c = 0; c < 100; ++c) {
    SCOPED_TRACE(c);
    const auto b = gen.branch();
    const double a = gen.alpha(b);
    const auto params = gen.params(b, a, 2);
    const auto frozen = validate_model(params, GeneratorMatrixd::frozen(2));
    const int n = gen.order(b, 4);
    const double tau = gen.uniform(0.0, 5.0);
    const double R = gen.log_uniform(0.2, 5.0);
    for (int i = 0; i < 2; ++i) {
      const auto solo = testing::single_state(b, a, params.kappa(i), params.theta(i), params.sigma(i));
      const double want = conditional_moment(solo, MomentOrder{n}, tau, R, 0);
      EXPECT_LE(std::abs(conditional_moment(frozen, MomentOrder{n}, tau, R, i) - want),
                1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(ConditionalMomentProperty, LowBranchJensen) {
  Gen gen(25);
  for (int c = 0; c < 100; ++c) {
    const auto model = gen.model(ElasticityBranch::Low, gen.alpha(ElasticityBranch::Low),
                                 gen.integer(1, 3));
    const double tau = gen.uniform(0.0, 5.0);
    const double R = gen.log_uniform(0.2, 5.0);
    const double m1 = conditional_moment(model, MomentOrder{1}, tau, R, 0);
    const double m2 = conditional_moment(model, MomentOrder{2}, tau, R, 0);
    EXPECT_GT(m1, 0.0);
    EXPECT_GE(m2, m1 * m1 * (1 - 1e-12));
  }
}

TEST(SolveCoefficientFamilyProperty, MatchesIndividualSolves) {
  Gen gen(26);
  for (int c = 0; c < 40; ++c) {
    const auto model = gen.model();
    const int N = gen.order(model.branch(), 6);
    const double tau = gen.uniform(0.0, 3.0);
    const auto family = solve_coefficient_family(model, MomentOrder{N}, tau);
    ASSERT_EQ(family.size(), static_cast<std::size_t>(std::abs(N) + 1));
    for (int n = 0; n <= std::abs(N); ++n) {
      const int signed_n = N >= 0 ? n : -n;
      const auto single = solve_coefficients(model, MomentOrder{signed_n}, tau);
      const auto& fam = family[static_cast<std::size_t>(n)];
      EXPECT_EQ(fam.order.n, signed_n);
      ASSERT_EQ(fam.coeffs.cols(), single.coeffs.cols());
      EXPECT_LT((fam.coeffs - single.coeffs).cwiseAbs().maxCoeff(),
                1e-12 * std::max(1.0, single.coeffs.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(ClosedFormIdentical, MatchesGeneralSolver) {
  Gen gen(27);
  for (int c = 0; c < 100; ++c) {
    SCOPED_TRACE(c);
    const auto b = gen.branch();
    const double a = gen.alpha(b);
    const int m = gen.integer(1, 3);
    auto p = gen.params(b, a, 1);
    p.kappa = Eigen::VectorXd::Constant(m, p.kappa(0));
    p.theta = Eigen::VectorXd::Constant(m, p.theta(0));
    p.sigma = Eigen::VectorXd::Constant(m, p.sigma(0));
    const auto model = validate_model(p, gen.generator(m));
    const int n = gen.order(b, 4);
    const double tau = gen.uniform(0.0, 5.0);
    const double R = gen.log_uniform(0.2, 5.0);
    const double want = conditional_moment(model, MomentOrder{n}, tau, R, 0);
    EXPECT_LT(std::abs(closed_form_identical(model, MomentOrder{n}, tau, R) - want),
              1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(ClosedFormIdentical, NamedCaseAndErrors) {
  const auto m = testing::single_state(ElasticityBranch::Low, 1.0, 0.5, 0.5, 0.15);
  EXPECT_LT(rel_err(closed_form_identical(m, MomentOrder{2}, 1.0, 1.0),
                    conditional_moment(m, MomentOrder{2}, 1.0, 1.0, 0)),
            1e-10);
  EXPECT_DOUBLE_EQ(closed_form_identical(m, MomentOrder{2}, 0.0, 1.7), 1.7 * 1.7);
  try {
    closed_form_identical(testing::validation_low(1.0), MomentOrder{1}, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParametersNotIdentical);
  }
}

TEST(ClosedFormFirst2State, ValidationSetsBothStates) {
  for (const auto& model : {testing::validation_low(1.0), testing::validation_high(0.5)}) {
    for (double tau : {0.0, 0.5, 1.0, 5.0}) {
      for (int i = 0; i < 2; ++i) {
        const int n = model.branch() == ElasticityBranch::Low ? 1 : -1;
        const double want = conditional_moment(model, MomentOrder{n}, tau, 1.0, i);
        EXPECT_LT(rel_err(closed_form_first_2state(model, tau, 1.0, i, OnDegenerate::Throw), want),
                  1e-10);
      }
    }
  }
}

TEST(ClosedFormFirst2StateProperty, MatchesGeneralSolver) {
  Gen gen(28);
  for (int c = 0; c < 200; ++c) {
    SCOPED_TRACE(c);
    const auto b = gen.branch();
    const auto model = gen.model(b, gen.alpha(b), 2);
    const double tau = gen.uniform(0.0, 5.0);
    const double R = gen.log_uniform(0.2, 5.0);
    const int i = gen.integer(0, 1);
    const int n = b == ElasticityBranch::Low ? 1 : -1;
    const double want = conditional_moment(model, MomentOrder{n}, tau, R, i);
    EXPECT_LT(std::abs(closed_form_first_2state(model, tau, R, i) - want),
              1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(ClosedFormFirst2State, DegenerateSpectrum) {
  const auto model = validate_model(testing::validation_low(1.0).params(), GeneratorMatrixd::frozen(2));
  try {
    closed_form_first_2state(model, 1.0, 1.0, 0, OnDegenerate::Throw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
  }
  EXPECT_LT(rel_err(closed_form_first_2state(model, 1.0, 1.0, 0),
                    testing::cir_mean(0.01, 1.0, 1.0, 1.0)),
            1e-12);
  EXPECT_THROW(closed_form_first_2state(testing::single_state(ElasticityBranch::Low, 1, 1, 1, 0.1),
                                        1.0, 1.0, 0),
               Error);
}

// U_i(tau, R) solves dU_i/dtau = k_i (theta_i R^{beta-1} - R) U_i' + s_i^2/2 R^beta U_i''
//                                + sum_j q_ij U_j.
double pde_residual(const RegimeModeld& model, int n, double tau, double R, double d) {
  const MomentOrder order{n};
  const Eigen::Index m = model.states();
  const auto at = [&](double t, double r) {
    Eigen::VectorXd u(m);
    const auto table = solve_coefficients(model, order, t);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = table.moment(r, i);
    return u;
  };
  const Eigen::VectorXd u = at(tau, R);
  const Eigen::VectorXd ut = (at(tau + d, R) - at(tau - d, R)) / (2 * d);
  const Eigen::VectorXd up = at(tau, R + d);
  const Eigen::VectorXd um = at(tau, R - d);
  const Eigen::VectorXd ur = (up - um) / (2 * d);
  const Eigen::VectorXd urr = (up - 2 * u + um) / (d * d);
  const Eigen::VectorXd coupling = model.generator().matrix() * u;
  double worst = 0.0;
  const double beta = model.beta();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double drift = model.kappa(i) * (model.theta(i) * std::pow(R, beta - 1) - R);
    const double diff = 0.5 * model.sigma(i) * model.sigma(i) * std::pow(R, beta);
    worst = std::max(worst, std::abs(ut(i) - drift * ur(i) - diff * urr(i) - coupling(i)));
  }
  return worst;
}

TEST(PdeResidual, SecondOrderForLowAndHigh) {
  struct Case {
    RegimeModeld model;
    int n;
  };
  for (const Case& c : {Case{testing::validation_low(2.0), 3}, Case{testing::validation_high(1.0), -2}}) {
    double prev = 0.0;
    for (double d : {0.04, 0.02, 0.01}) {
      double worst = 0.0;
      for (double tau : {0.5, 1.0, 2.0}) {
        for (double R : {0.6, 1.0, 1.7}) worst = std::max(worst, pde_residual(c.model, c.n, tau, R, d));
      }
      if (prev > 0.0) EXPECT_NEAR(prev / worst, 4.0, 0.5) << "d=" << d;
      prev = worst;
    }
  }
}

TEST(CoefficientTable, WorksInLongDouble) {
  ModelParams<long double> p;
  p.alpha = 1.0L;
  p.kappa = VectorX<long double>::Constant(1, 0.5L);
  p.theta = VectorX<long double>::Constant(1, 0.5L);
  p.sigma = VectorX<long double>::Constant(1, 0.15L);
  const auto m = validate_model(p, GeneratorMatrix<long double>::single_state());
  const long double got = conditional_moment(m, MomentOrder{1}, 1.0L, 2.0L, 0);
  const long double want = 0.5L + 1.5L * std::exp(-0.5L);
  EXPECT_LT(std::abs(got - want), 1e-17L);
}

}  // namespace
}  // namespace rscev
