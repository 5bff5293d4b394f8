#pragma once

// Empirical trace-variogram of functional data, parametric models for it,
// and the trace-covariance C(r) = sigma_tot - gamma(r) they induce.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/basis.hpp"

namespace fkrige {

/// (w_i - w_j)^T Phi (w_i - w_j): the integrated squared difference of two
/// basis-expanded functions.
double functional_sq_distance(const Eigen::VectorXd& wi, const Eigen::VectorXd& wj,
                              const Eigen::MatrixXd& gram);

struct VariogramBin {
  double center = 0.0;  // mean pair distance of the members
  double gamma = 0.0;
  std::size_t pair_count = 0;
};

struct EmpiricalTraceVariogram {
  std::vector<VariogramBin> bins;
  double cutoff = 0.0;
};

struct BinningOptions {
  std::size_t n_bins = 15;
  /// Defaults to half the largest inter-site distance.
  std::optional<double> cutoff;
  std::size_t min_pairs = 1;
};

/// Pairs with distance in (0, cutoff] go to equal-width right-closed bins;
/// gamma_b = sum of squared functional distances / (2 * pair_count).
EmpiricalTraceVariogram empirical_trace_variogram(const FunctionalDataset& dataset,
                                                  const Eigen::MatrixXd& gram,
                                                  const BinningOptions& options = {});

enum class VariogramFamily { exponential, gaussian, matern };

std::string to_string(VariogramFamily family);
VariogramFamily parse_family(const std::string& name);

struct VariogramModel {
  VariogramFamily family = VariogramFamily::exponential;
  double nugget = 0.0;
  double psill = 1.0;
  double range = 1.0;
  double nu = 0.5;  // Matern smoothness; one of 0.5, 1.5, 2.5

  double total_sill() const { return nugget + psill; }
  /// Throws ContractError for negative sills, non-positive range or an
  /// unsupported smoothness.
  void validate() const;
};

/// Correlation of the continuous part, rho(0) = 1.
double model_correlation(const VariogramModel& model, double r);

/// gamma(0) = 0; gamma(r) = nugget + psill * (1 - rho(r)) for r > 0.
double model_gamma(const VariogramModel& model, double r);

/// sigma_tot - gamma(r).
double trace_covariance(const VariogramModel& model, double r);

/// Upper bound on the fitted range, as a multiple of the binning cutoff.
inline constexpr double kMaxRangeFactor = 10.0;

/// Pair-count weighted least-squares fit of (nugget, psill, range) by
/// Nelder-Mead simplex from several deterministic starts, with
/// range < kMaxRangeFactor * cutoff. Needs >= 3 bins.
VariogramModel fit_model(const EmpiricalTraceVariogram& empirical, VariogramFamily family,
                         double nu = 0.5);

}  // namespace fkrige
