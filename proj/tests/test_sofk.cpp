#include <random>

#include <gtest/gtest.h>

#include "fkrige/error.hpp"
#include "fkrige/sofk.hpp"
#include "support.hpp"

using namespace fkrige;
namespace ft = fkrige::testing;

namespace {

void expect_lower_bound(const SofkSolution& s) {
  for (double f : s.objective_trace) EXPECT_GE(f, s.lower_bound - 1e-9);
}

}  // namespace

TEST(AdaptiveWeights, Definition) {
  const auto a = adaptive_weights(Eigen::Vector2d(0.5, -0.25), 1.0);
  EXPECT_DOUBLE_EQ(a.weights[0], 2.0);
  EXPECT_DOUBLE_EQ(a.weights[1], 4.0);
  EXPECT_FALSE(a.floored[0]);
  const auto b = adaptive_weights(Eigen::Vector2d(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(b.weights[0], 1e8);
  EXPECT_TRUE(b.floored[0]);
  EXPECT_NEAR(adaptive_weights(Eigen::VectorXd::Constant(1, 0.1), 2.0).weights[0], 100.0, 1e-12);
  EXPECT_THROW(adaptive_weights(Eigen::Vector2d(1.0, 0.0), 0.0), ContractError);
}

TEST(Objective, Definitions) {
  std::mt19937_64 gen(30);
  const auto inst = ft::random_instance(gen, 6);
  const auto p0 = SofkProblem::make(inst.system, 0.0, 1.0);
  const auto p1 = SofkProblem::make(inst.system, 0.3, 1.0);
  Eigen::VectorXd l = Eigen::VectorXd::LinSpaced(6, -0.2, 0.5);
  EXPECT_DOUBLE_EQ(sofk_objective(p0, l), kriging_objective(*inst.system, l));
  EXPECT_EQ(sofk_objective(p1, Eigen::VectorXd::Zero(6)), 0.0);
  std::normal_distribution<double> z;
  for (int k = 0; k < 200; ++k) {
    for (auto& x : l) x = 3.0 * z(gen);
    EXPECT_GE(sofk_objective(p1, l), inst.system->quadratic_lower_bound());
  }
}

TEST(SoftThreshold, Values) {
  EXPECT_DOUBLE_EQ(soft_threshold(2.0, 0.5), 1.5);
  EXPECT_EQ(soft_threshold(-0.3, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(-2.0, 0.5), -1.5);
  EXPECT_EQ(soft_threshold(0.7, 0.0), 0.7);
}

TEST(Eigen, PowerIterationKnownSpectrum) {
  Eigen::Matrix2d H = 2.0 * Eigen::Matrix2d::Identity();
  H.array() += 1.0;
  EXPECT_NEAR(largest_eigenvalue(H), 4.0, 1e-9);
  const KrigingSystem sys(Eigen::Matrix2d::Identity(), Eigen::Vector2d(0.2, 0.3));
  const auto p = SofkProblem::make(std::make_shared<const KrigingSystem>(sys), 0.0, 1.0);
  const auto r = fista_subproblem(p, 0.0, 1.0, Eigen::Vector2d(0.5, 0.5), SofkConfig{});
  EXPECT_NEAR(r.lipschitz, 1.01 * 4.0, 1e-8);
}

TEST(Fista, ZeroEtaSolvesLinearSystem) {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> size(1, 20);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 50; ++rep) {
    const auto n = static_cast<std::size_t>(size(gen));
    const auto sys = ft::random_spd_system(gen, n);
    const auto p = SofkProblem::make(sys, 0.0, 1.0);
    const double rho = 0.5 + std::abs(z(gen)), mu = z(gen);
    const auto r = fista_subproblem(p, mu, rho, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), SofkConfig{});
    Eigen::MatrixXd H = 2.0 * sys->C();
    H.array() += rho;
    const Eigen::VectorXd rhs = (2.0 * sys->c0()).array() + (rho - mu);
    const Eigen::VectorXd direct = H.ldlt().solve(rhs);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.lambda - direct).cwiseAbs().maxCoeff(), 1e-8) << "n=" << n;
  }
}

TEST(Fista, BeatsUnconstrainedGridSearch) {
  std::mt19937_64 gen(32);
  for (int rep = 0; rep < 3; ++rep) {
    const auto inst = ft::random_instance(gen, 3);
    const auto p = SofkProblem::make(inst.system, 0.05, 1.0);
    const double mu = 0.3, rho = 2.0;
    const auto r = fista_subproblem(p, mu, rho, p.ofk.lambda, SofkConfig{});
    const auto al = [&](const Eigen::VectorXd& l) { return augmented_lagrangian_value(p, l, mu, rho); };
    const double grid = ft::unconstrained_grid_min(al, 2.0, 0.02, 1e-3);
    EXPECT_LE(al(r.lambda), grid + 1e-6);
  }
}

TEST(Fista, NeverWorseThanWarmStart) {
  std::mt19937_64 gen(33);
  std::normal_distribution<double> z;
  SofkConfig tight;
  tight.max_inner = 3;
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = ft::random_instance(gen, 12);
    const auto p = SofkProblem::make(inst.system, 0.01 * (1 + rep % 5), 1.0);
    Eigen::VectorXd init(12);
    for (auto& x : init) x = 0.2 * z(gen);
    const double mu = z(gen), rho = 1.0 + rep;
    for (const auto& cfg : {SofkConfig{}, tight}) {
      const auto r = fista_subproblem(p, mu, rho, init, cfg);
      EXPECT_LE(augmented_lagrangian_value(p, r.lambda, mu, rho), augmented_lagrangian_value(p, init, mu, rho) + 1e-12);
    }
  }
}

TEST(PenaltyRule, GrowsOnlyWithoutSufficientDecrease) {
  const SofkConfig c;
  EXPECT_DOUBLE_EQ(next_penalty(1.0, 0.095, 0.1, c), 2.0);
  EXPECT_DOUBLE_EQ(next_penalty(1.0, 0.08, 0.1, c), 1.0);
  EXPECT_DOUBLE_EQ(next_penalty(3.0, 0.09, 0.1, c), 3.0);
}

TEST(Config, Validation) {
  SofkConfig c;
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.kappa = 1.0;
  EXPECT_THROW(c.validate(), ContractError);
  c = {};
  c.feas_tol = 0.0;
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(AugmentedLagrangian, ZeroEtaIsOfk) {
  std::mt19937_64 gen(34);
  std::uniform_int_distribution<int> size(2, 20);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = ft::random_instance(gen, static_cast<std::size_t>(size(gen)));
    const auto p = SofkProblem::make(inst.system, 0.0, 1.0);
    const auto s = augmented_lagrangian_solve(p);
    EXPECT_TRUE(s.converged);
    EXPECT_LE((s.lambda - p.ofk.lambda).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(s.mu, p.ofk.mu, 1e-6);
    expect_lower_bound(s);
  }
}

TEST(AugmentedLagrangian, SymmetricPairSplitsEvenly) {
  Eigen::Matrix2d C;
  C << 1.0, 0.3, 0.3, 1.0;
  const auto sys = std::make_shared<const KrigingSystem>(C, Eigen::Vector2d(0.4, 0.4));
  for (double eta : {0.0, 0.01, 0.5, 5.0}) {
    const auto s = augmented_lagrangian_solve(SofkProblem::make(sys, eta, 1.0));
    EXPECT_NEAR(s.lambda[0], 0.5, 1e-8) << "eta=" << eta;
    EXPECT_NEAR(s.lambda[1], 0.5, 1e-8);
    EXPECT_EQ(s.lambda.sum(), 1.0);
  }
}

TEST(AugmentedLagrangian, MatchesConstrainedGridSearch) {
  std::mt19937_64 gen(35);
  for (int rep = 0; rep < 4; ++rep) {
    const auto inst = ft::random_instance(gen, 3);
    for (double eta : {0.05, 0.5}) {
      const auto p = SofkProblem::make(inst.system, eta, 1.0);
      const auto s = augmented_lagrangian_solve(p);
      ASSERT_TRUE(s.converged);
      const double box = std::max(2.0, 1.0 + p.ofk.lambda.cwiseAbs().maxCoeff());
      const auto [l, best] = ft::constrained_grid_min([&](const Eigen::VectorXd& x) { return sofk_objective(p, x); },
                                                      box, 0.02, 1e-3);
      EXPECT_NEAR(sofk_objective(p, s.lambda), best, 1e-4);
    }
  }
}

TEST(AugmentedLagrangian, FeasibilityAndSnapping) {
  std::mt19937_64 gen(36);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = ft::random_instance(gen, 15);
    const auto p = SofkProblem::make(inst.system, 0.02 * (rep % 4), 0.5 + 0.5 * (rep % 3));
    const auto s = augmented_lagrangian_solve(p);
    ASSERT_TRUE(s.converged);
    EXPECT_LE(s.raw_feasibility, 1e-8);
    EXPECT_EQ(constraint_residual(s.lambda), 0.0);
    for (Eigen::Index i = 0; i < s.lambda.size(); ++i) {
      const bool in_support =
          std::find(s.support.begin(), s.support.end(), static_cast<std::size_t>(i)) != s.support.end();
      EXPECT_EQ(in_support, s.lambda[i] != 0.0);
    }
    ASSERT_FALSE(s.history.empty());
    EXPECT_EQ(s.feas_trace.back(), s.history.back().abs_g);
    for (std::size_t k = 1; k < s.history.size(); ++k) EXPECT_GE(s.history[k].rho, s.history[k - 1].rho);
    expect_lower_bound(s);
  }
}

TEST(AugmentedLagrangian, ZeroWeightsSatisfySubgradientCondition) {
  std::mt19937_64 gen(37);
  std::size_t zeros = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = ft::random_instance(gen, 12);
    const auto p = SofkProblem::make(inst.system, 0.05, 1.0);
    const auto s = augmented_lagrangian_solve(p);
    ASSERT_TRUE(s.converged);
    // Stationarity of f + mu' g with mu' = 2 mu (mu on the bordered-system scale).
    const Eigen::VectorXd grad = 2.0 * (inst.system->C() * s.lambda - inst.system->c0());
    for (Eigen::Index i = 0; i < s.lambda.size(); ++i) {
      if (s.lambda[i] != 0.0) continue;
      ++zeros;
      EXPECT_LE(std::abs(grad[i] + 2.0 * s.mu), p.eta * p.penalty_weights[i] + 1e-6);
    }
  }
  EXPECT_GT(zeros, 0u);
}

TEST(AugmentedLagrangian, SupportShrinksWithEta) {
  std::mt19937_64 gen(38);
  const std::vector<double> etas{0.01, 0.1, 1.0};
  std::vector<double> mean(etas.size(), 0.0);
  std::size_t violations = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = ft::random_instance(gen, 10);
    std::size_t prev = 11;
    for (std::size_t e = 0; e < etas.size(); ++e) {
      const auto s = augmented_lagrangian_solve(SofkProblem::make(inst.system, etas[e], 1.0));
      mean[e] += static_cast<double>(s.support.size()) / 50.0;
      if (s.support.size() > prev) ++violations;
      prev = s.support.size();
    }
  }
  EXPECT_GE(mean[0], mean[1]);
  EXPECT_GE(mean[1], mean[2]);
  EXPECT_LE(violations, 5u);
}

TEST(AugmentedLagrangian, HugeEtaKeepsOneSite) {
  std::mt19937_64 gen(39);
  const auto inst = ft::random_instance(gen, 9);
  const auto s = augmented_lagrangian_solve(SofkProblem::make(inst.system, 50.0, 1.0));
  EXPECT_TRUE(s.converged);
  ASSERT_EQ(s.support.size(), 1u);
  EXPECT_EQ(s.lambda[static_cast<Eigen::Index>(s.support[0])], 1.0);
}

TEST(AugmentedLagrangian, CapReportsUnconverged) {
  std::mt19937_64 gen(40);
  const auto inst = ft::random_instance(gen, 10);
  SofkConfig c;
  c.max_outer = 1;
  c.feas_tol = 1e-15;
  const auto s = augmented_lagrangian_solve(SofkProblem::make(inst.system, 0.1, 1.0), c);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.outer_iters, 1u);
  EXPECT_EQ(constraint_residual(s.lambda), 0.0);
}

TEST(AugmentedLagrangian, Deterministic) {
  std::mt19937_64 gen(41);
  const auto inst = ft::random_instance(gen, 14);
  const auto p = SofkProblem::make(inst.system, 0.03, 2.0);
  const auto a = augmented_lagrangian_solve(p);
  const auto b = augmented_lagrangian_solve(p);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}
