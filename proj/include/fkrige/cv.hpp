#pragma once

// Leave-one-out cross-validation of the sparse kriging tuning parameters
// (eta, tau) over a finite grid.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/basis.hpp"
#include "fkrige/sofk.hpp"
#include "fkrige/variogram.hpp"

namespace fkrige {

struct CvGrid {
  std::vector<std::pair<double, double>> pairs;  // (eta, tau)

  /// Cartesian product, eta-major.
  static CvGrid product(const std::vector<double>& etas, const std::vector<double>& taus);
  /// eta in logspace(1e-4, 10, 12), tau in {0.5, 1, 2}.
  static CvGrid defaults();
  void validate() const;
};

/// `count` log-uniformly spaced values from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, std::size_t count);

struct CvScore {
  double eta = 0.0;
  double tau = 0.0;
  double score = 0.0;
  std::vector<double> fold_errors;  // integrated squared error per left-out site
  std::size_t unconverged_folds = 0;
};

struct CvReport {
  std::vector<CvScore> scores;
  std::size_t best = 0;

  const CvScore& best_score() const { return scores.at(best); }
};

struct CvOptions {
  SofkConfig sofk;
  std::size_t jobs = 1;
};

/// Sum over sites i of (w_i - w0^(-i))^T Phi (w_i - w0^(-i)), where w0^(-i)
/// is the sparse kriging prediction at s_i from the other n - 1 sites. The
/// variogram model is shared by every fold. Requires n >= 3.
CvScore loocv_score(const FunctionalDataset& dataset, const VariogramModel& model,
                    const Eigen::MatrixXd& gram, double eta, double tau,
                    const CvOptions& options = {});

/// Scores every grid pair; the minimum wins with ties going to the smaller
/// eta, then the smaller tau. Each fold's kriging system and OFK solve are
/// shared by all pairs.
CvReport grid_select(const FunctionalDataset& dataset, const VariogramModel& model,
                     const Eigen::MatrixXd& gram, const CvGrid& grid,
                     const CvOptions& options = {});

}  // namespace fkrige
