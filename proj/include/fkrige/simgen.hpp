#pragma once

// Synthetic spatial functional data on a regular grid in [0, 1]^2 and the
// SOFK-versus-OFK prediction experiment run on it.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/basis.hpp"
#include "fkrige/cv.hpp"
#include "fkrige/io.hpp"
#include "fkrige/sofk.hpp"
#include "fkrige/variogram.hpp"

namespace fkrige {

struct SimulationDesign {
  std::size_t grid_side = 15;
  std::size_t n_observed = 50;
  double range = 5.0;
  double sill = 2.0;
  double nugget = 0.0;
  double noise_sd = 0.3;
  std::size_t n_time = 31;
  double time_end = 1.0;
  int num_basis = 10;
  std::uint64_t seed = 0;

  /// Throws ContractError on an invalid design.
  void validate() const;

  /// grid_side^2 sites, row-major, ids "g000", "g001", ...
  LocationSet grid_locations() const;
  /// Cubic B-splines with num_basis functions on [0, time_end].
  BasisDescriptor basis() const;
  /// n_time equally spaced points on [0, time_end].
  std::vector<double> time_grid() const;
};

/// Covariance sill * exp(-d / range) + nugget * [i == j] between sites.
Eigen::MatrixXd exponential_covariance(const LocationSet& sites, double sill, double range,
                                       double nugget = 0.0);

struct SimulatedField {
  LocationSet sites;              // every grid location
  Eigen::MatrixXd truth;          // sites x M true coefficients
  std::vector<std::size_t> observed;  // ascending
  std::vector<std::size_t> held_out;  // ascending, complement of observed
};

/// Independent zero-mean Gaussian fields (one per basis index) drawn through
/// the Cholesky factor of the exponential covariance, and a uniformly random
/// observed subset.
SimulatedField generate_coefficients(const SimulationDesign& design, std::uint64_t replicate = 0);

/// x_ij = w_i^T phi(t_j) + eps_ij, eps ~ N(0, noise_sd^2); one noise stream per site.
LongitudinalTable generate_longitudinal(const Eigen::MatrixXd& coefficients,
                                        const LocationSet& locations,
                                        const SimulationDesign& design,
                                        std::uint64_t replicate = 0);

struct ExperimentOptions {
  CvGrid grid = CvGrid::defaults();
  SofkConfig sofk;
  VariogramFamily family = VariogramFamily::matern;
  double nu = 0.5;
  BinningOptions binning;
  std::size_t jobs = 1;
  bool keep_weights = false;
};

struct WeightRecord {
  std::size_t replicate = 0;
  std::string target_id;
  std::string site_id;
  double distance = 0.0;
  double sofk = 0.0;
  double ofk = 0.0;
};

struct ReplicateResult {
  std::size_t replicate = 0;
  std::size_t n = 0;
  double range = 0.0;
  double sofk_mse = 0.0;
  double ofk_mse = 0.0;
  double nonzero_mean = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  VariogramModel model;
  /// Weights of the sites nearest to each target (ties included).
  std::size_t nearest_total = 0;
  std::size_t nearest_zero = 0;
  std::size_t unconverged = 0;
  double min_lower_bound_margin = 0.0;
  double max_raw_feasibility = 0.0;
  std::vector<WeightRecord> weights;  // filled when keep_weights is set
};

/// Simulate, smooth, fit the trace-variogram, choose (eta, tau) by LOOCV and
/// predict every held-out site with SOFK and OFK.
ReplicateResult run_replicate(const SimulationDesign& design, std::size_t replicate,
                              const ExperimentOptions& options);

/// Replicates 0..n_replicates-1, in parallel over `options.jobs` threads.
std::vector<ReplicateResult> run_experiment(const SimulationDesign& design,
                                            std::size_t n_replicates,
                                            const ExperimentOptions& options = {});

struct ColumnSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

struct ExperimentSummary {
  std::size_t n = 0;
  double range = 0.0;
  std::size_t replicates = 0;
  ColumnSummary sofk_mse, ofk_mse, nonzero;
};

ColumnSummary summarize_column(std::span<const double> values);
ExperimentSummary summarize(std::span<const ReplicateResult> results);

}  // namespace fkrige
