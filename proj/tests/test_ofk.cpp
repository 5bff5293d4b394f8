#include <random>

#include <gtest/gtest.h>

#include "fkrige/error.hpp"
#include "fkrige/ofk.hpp"
#include "support.hpp"

using namespace fkrige;
namespace ft = fkrige::testing;

TEST(BuildSystem, SingleSite) {
  const VariogramModel m{VariogramFamily::exponential, 0.1, 2.0, 1.0};
  const LocationSet locs({{"a", {0.0, 0.0}}});
  const std::vector<double> s0{0.3, 0.4};
  const auto sys = build_system(m, locs, s0);
  EXPECT_DOUBLE_EQ(sys.C()(0, 0), 2.1);
  EXPECT_DOUBLE_EQ(sys.c0()[0], trace_covariance(m, 0.5));
}

TEST(BuildSystem, TargetAtSiteAndIsotropy) {
  const VariogramModel m{VariogramFamily::gaussian, 0.0, 1.0, 0.7};
  const LocationSet locs({{"a", {0.0, 0.0}}, {"b", {1.0, 0.0}}, {"c", {0.0, 2.0}}});
  const std::vector<double> at_a{0.0, 0.0};
  const auto sys = build_system(m, locs, at_a);
  EXPECT_EQ(sys.c0(), sys.C().col(0));
  const std::vector<double> mid{0.5, 0.0};
  const auto sym = build_system(m, locs, mid);
  EXPECT_EQ(sym.c0()[0], sym.c0()[1]);
  EXPECT_THROW(build_system(m, locs, std::vector<double>{1.0}), ContractError);
}

TEST(KrigingSystem, RejectsAsymmetricAndJittersSingular) {
  Eigen::Matrix2d bad;
  bad << 1.0, 0.5, 0.4, 1.0;
  EXPECT_THROW(KrigingSystem(bad, Eigen::Vector2d::Ones()), ContractError);
  const KrigingSystem singular(Eigen::Matrix2d::Ones(), Eigen::Vector2d(0.5, 0.5));
  EXPECT_GT(singular.jitter(), 0.0);
  const auto sol = ofk_solve(singular);
  EXPECT_NEAR(sol.lambda[0], 0.5, 1e-8);
}

TEST(Ofk, SingleSite) {
  const KrigingSystem sys(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 0.6));
  const auto sol = ofk_solve(sys);
  EXPECT_DOUBLE_EQ(sol.lambda[0], 1.0);
  EXPECT_NEAR(sol.mu, 0.6 - 2.0, 1e-15);
}

TEST(Ofk, SymmetricPair) {
  Eigen::Matrix2d C;
  C << 1.0, 0.5, 0.5, 1.0;
  const auto sol = ofk_solve(KrigingSystem(C, Eigen::Vector2d(0.7, 0.7)));
  EXPECT_NEAR(sol.lambda[0], 0.5, 1e-15);
  EXPECT_NEAR(sol.lambda[1], 0.5, 1e-15);
  EXPECT_NEAR(sol.mu, -0.05, 1e-15);
  EXPECT_LE((C * sol.lambda + Eigen::Vector2d::Constant(sol.mu) - Eigen::Vector2d(0.7, 0.7)).norm(), 1e-15);
}

TEST(Ofk, ExactInterpolation) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 5; ++rep) {
    const auto inst = ft::random_instance(gen, 8);
    for (std::size_t i = 0; i < 8; ++i) {
      const auto c = inst.locations.coords(i);
      const auto sys = build_system(inst.model, inst.locations, std::vector<double>(c.begin(), c.end()));
      const auto sol = ofk_solve(sys);
      EXPECT_LE((sol.lambda - Eigen::VectorXd::Unit(8, static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_NEAR(sol.mu, 0.0, 1e-8);
    }
  }
}

TEST(Ofk, MatchesDenseInverse) {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sys = ft::random_spd_system(gen, 5);
    const auto sol = ofk_solve(*sys);
    const auto [lam, mu] = ft::dense_ofk(sys->C(), sys->c0());
    EXPECT_LE((sol.lambda - lam).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sol.mu, mu, 1e-10);
    const Eigen::VectorXd resid = sys->C() * sol.lambda + Eigen::VectorXd::Constant(5, sol.mu) - sys->c0();
    EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sol.lambda.sum(), 1.0, 1e-10);
  }
}

TEST(Ofk, PermutationEquivariant) {
  std::mt19937_64 gen(14);
  const auto inst = ft::random_instance(gen, 7);
  const std::vector<std::size_t> perm{3, 0, 6, 1, 5, 2, 4};
  const auto a = ofk_solve(*inst.system);
  const auto b = ofk_solve(build_system(inst.model, inst.locations.subset(perm), inst.target));
  for (std::size_t k = 0; k < perm.size(); ++k)
    EXPECT_NEAR(b.lambda[static_cast<Eigen::Index>(k)], a.lambda[static_cast<Eigen::Index>(perm[k])], 1e-10);
}

TEST(Ofk, BeatsRandomFeasiblePoints) {
  std::mt19937_64 gen(15);
  const auto inst = ft::random_instance(gen, 10);
  const auto sol = ofk_solve(*inst.system);
  const double best = kriging_objective(*inst.system, sol.lambda);
  std::normal_distribution<double> z;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd l(10);
    for (auto& x : l) x = z(gen);
    l.array() += (1.0 - l.sum()) / 10.0;
    EXPECT_LE(best, kriging_objective(*inst.system, l) + 1e-12);
  }
  EXPECT_GE(best, inst.system->quadratic_lower_bound() - 1e-12);
}

TEST(Predict, SelectionCancellationAndConstantCurves) {
  const auto basis = BasisDescriptor::bspline(6, 0.0, 1.0);
  const auto grid = uniform_grid(0.0, 1.0, 11);
  Eigen::MatrixXd w(3, 6);
  w << 1, 2, 3, 4, 5, 6, -1, 0, 1, 0, -1, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;
  const FunctionalDataset ds(LocationSet({{"a", {0.0}}, {"b", {1.0}}, {"c", {2.0}}}), basis, w);
  const auto p = predict(Eigen::Vector3d(0, 0, 1), ds, grid);
  EXPECT_EQ(p.values, evaluate_function(ds, 2, grid));

  Eigen::MatrixXd anti(2, 6);
  anti.row(0) = w.row(0);
  anti.row(1) = -w.row(0);
  const FunctionalDataset ds2(LocationSet({{"a", {0.0}}, {"b", {1.0}}}), basis, anti);
  EXPECT_LE(predict(Eigen::Vector2d(0.5, 0.5), ds2, grid).values.cwiseAbs().maxCoeff(), 1e-15);

  Eigen::MatrixXd same = w.row(0).replicate(3, 1);
  const FunctionalDataset ds3(ds.locations, basis, same);
  const auto q = predict(Eigen::Vector3d(2.0, -0.5, -0.5), ds3, grid);
  EXPECT_LE((q.values - evaluate_function(ds3, 0, grid)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(predict(Eigen::Vector2d(0.5, 0.5), ds, grid), ContractError);
}
