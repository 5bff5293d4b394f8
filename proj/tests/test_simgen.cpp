#include <gtest/gtest.h>

#include "fkrige/error.hpp"
#include "fkrige/simgen.hpp"

using namespace fkrige;

TEST(Design, GridAndValidation) {
  SimulationDesign d;
  const auto g = d.grid_locations();
  ASSERT_EQ(g.size(), 225u);
  EXPECT_EQ(g[0].id, "g000");
  EXPECT_EQ(g[16].coords, (std::vector<double>{1.0 / 14.0, 1.0 / 14.0}));
  EXPECT_EQ(g[224].coords, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(d.time_grid().size(), 31u);
  EXPECT_EQ(d.time_grid().back(), 1.0);

  for (auto mutate : std::vector<void (*)(SimulationDesign&)>{
           [](SimulationDesign& x) { x.n_observed = 226; }, [](SimulationDesign& x) { x.n_observed = 0; },
           [](SimulationDesign& x) { x.range = 0.0; }, [](SimulationDesign& x) { x.sill = -1.0; },
           [](SimulationDesign& x) { x.noise_sd = -0.1; }, [](SimulationDesign& x) { x.num_basis = 3; },
           [](SimulationDesign& x) { x.n_time = 5; }, [](SimulationDesign& x) { x.time_end = 0.0; }}) {
    SimulationDesign bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), ContractError);
  }
}

TEST(Covariance, DependsOnlyOnDistance) {
  const auto g = SimulationDesign{}.grid_locations();
  const auto c = exponential_covariance(g, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(c(0, 0), 2.0);
  // Equal grid lags can differ by an ulp after the coordinate arithmetic.
  EXPECT_NEAR(c(0, 1), c(100, 101), 1e-15);
  EXPECT_NEAR(c(0, 15), c(0, 1), 1e-15);
  EXPECT_NEAR(c(3, 20), c(200, 217), 1e-15);
  EXPECT_NEAR(c(0, 1), 2.0 * std::exp(-1.0 / 14.0 / 0.5), 1e-15);
  EXPECT_EQ(c, c.transpose());
}

TEST(Fields, TinyRangeGivesIndependentSillVariance) {
  SimulationDesign d;
  d.range = 1e-9;
  double ss = 0.0, n = 0.0, cross = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto f = generate_coefficients(d, r);
    ss += f.truth.squaredNorm();
    n += static_cast<double>(f.truth.size());
    cross += (f.truth.row(0).array() * f.truth.row(1).array()).sum();
  }
  EXPECT_NEAR(ss / n, 2.0, 0.2);
  EXPECT_NEAR(cross / (200.0 * 10.0), 0.0, 0.2);
}

TEST(Fields, AveragedVariogramMatchesModel) {
  SimulationDesign d;
  d.range = 0.5;
  d.grid_side = 8;
  d.n_observed = 10;
  const auto g = d.grid_locations();
  // Lags along grid axes: k steps of 1/7.
  std::vector<double> acc(4, 0.0);
  std::vector<double> cnt(4, 0.0);
  for (std::uint64_t r = 0; r < 300; ++r) {
    const auto f = generate_coefficients(d, r);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t k = 1; k <= 3; ++k) {
        if (i % 8 + k >= 8) continue;
        const std::size_t j = i + k;
        acc[k] += 0.5 * (f.truth.row(static_cast<Eigen::Index>(i)) - f.truth.row(static_cast<Eigen::Index>(j))).squaredNorm();
        cnt[k] += static_cast<double>(d.num_basis);
      }
  }
  for (std::size_t k = 1; k <= 3; ++k) {
    const double h = static_cast<double>(k) / 7.0;
    const double expected = 2.0 * (1.0 - std::exp(-h / d.range));
    EXPECT_NEAR(acc[k] / cnt[k], expected, 0.15 * expected) << "lag " << h;
  }
}

TEST(Fields, SeedsAndPartition) {
  SimulationDesign d;
  const auto a = generate_coefficients(d, 3);
  const auto b = generate_coefficients(d, 3);
  const auto c = generate_coefficients(d, 4);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.observed, b.observed);
  EXPECT_NE(a.truth, c.truth);
  d.seed = 1;
  EXPECT_NE(generate_coefficients(d, 3).truth, a.truth);

  ASSERT_EQ(a.observed.size(), 50u);
  ASSERT_EQ(a.held_out.size(), 175u);
  std::vector<int> seen(225, 0);
  for (auto i : a.observed) ++seen[i];
  for (auto i : a.held_out) ++seen[i];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_TRUE(std::is_sorted(a.observed.begin(), a.observed.end()));
}

TEST(Longitudinal, NoiseAndShape) {
  SimulationDesign d;
  const auto f = generate_coefficients(d, 0);
  const auto obs = f.sites.subset(f.observed);
  Eigen::MatrixXd w(50, d.num_basis);
  for (std::size_t r = 0; r < 50; ++r) w.row(static_cast<Eigen::Index>(r)) = f.truth.row(static_cast<Eigen::Index>(f.observed[r]));

  const auto noisy = generate_longitudinal(w, obs, d, 0);
  EXPECT_EQ(noisy.num_sites(), 50u);
  EXPECT_EQ(noisy.num_rows(), 50u * 31u);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(noisy.series(i).t.size(), 31u);

  SimulationDesign clean_design = d;
  clean_design.noise_sd = 0.0;
  const auto clean = generate_longitudinal(w, obs, clean_design, 0);
  const auto basis = d.basis();
  const Eigen::MatrixXd X = basis.design_matrix(d.time_grid());
  double ss = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const Eigen::VectorXd exact = X * w.row(static_cast<Eigen::Index>(i)).transpose();
    for (std::size_t j = 0; j < 31; ++j) {
      EXPECT_EQ(clean.series(i).x[j], exact[static_cast<Eigen::Index>(j)]);
      const double e = noisy.series(i).x[j] - exact[static_cast<Eigen::Index>(j)];
      ss += e * e;
    }
  }
  EXPECT_NEAR(std::sqrt(ss / (50.0 * 31.0)), 0.3, 0.015);
  EXPECT_THROW(generate_longitudinal(w.leftCols(3), obs, d, 0), ContractError);
}

TEST(Experiment, ZeroReplicatesAndSummaries) {
  EXPECT_TRUE(run_experiment(SimulationDesign{}, 0).empty());
  EXPECT_EQ(summarize({}).replicates, 0u);
  const std::vector<double> v{1.0, 2.0, 3.0, 6.0};
  const auto s = summarize_column(v);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.sd, std::sqrt(14.0 / 3.0));
}

TEST(Experiment, SmallReplicateIsSane) {
  SimulationDesign d;
  d.grid_side = 6;
  d.n_observed = 12;
  d.range = 0.5;
  ExperimentOptions o;
  o.grid = CvGrid::product({0.001, 0.1}, {1.0});
  o.keep_weights = true;
  const auto r = run_replicate(d, 0, o);
  EXPECT_EQ(r.n, 12u);
  EXPECT_EQ(r.weights.size(), 24u * 12u);
  EXPECT_GT(r.ofk_mse, 0.0);
  EXPECT_GT(r.sofk_mse, 0.0);
  EXPECT_GE(r.nonzero_mean, 1.0);
  EXPECT_LE(r.nonzero_mean, 12.0);
  EXPECT_GE(r.nearest_total, 24u);
  EXPECT_GE(r.min_lower_bound_margin, -1e-9);
  EXPECT_LE(r.max_raw_feasibility, 1e-8);
  const auto again = run_experiment(d, 2, ExperimentOptions{o.grid, {}, VariogramFamily::matern, 0.5, {}, 2, false});
  EXPECT_EQ(again[0].sofk_mse, r.sofk_mse);
  EXPECT_EQ(again[0].eta, r.eta);
}
