#pragma once

// Ordinary functional kriging: the integrated-covariance system (C, c0) for a
// prediction site and the bordered linear system for the weights.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/basis.hpp"
#include "fkrige/variogram.hpp"

namespace fkrige {

class KrigingSystem {
 public:
  /// From explicit matrices; C must be symmetric. If its Cholesky factor
  /// fails, a diagonal jitter starting at 1e-10 * mean(diag C) is added and
  /// grown tenfold until it succeeds.
  KrigingSystem(Eigen::MatrixXd C, Eigen::VectorXd c0, std::vector<double> s0 = {});

  std::size_t size() const { return static_cast<std::size_t>(c0_.size()); }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::VectorXd& c0() const { return c0_; }
  const std::vector<double>& s0() const { return s0_; }
  /// Diagonal jitter that was needed for positive definiteness (0 if none).
  double jitter() const { return jitter_; }

  /// C^{-1} v using the cached factor.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const { return llt_.solve(v); }

  /// -c0^T C^{-1} c0, the infimum of lambda^T C lambda - 2 c0^T lambda.
  double quadratic_lower_bound() const { return -c0_.dot(solve(c0_)); }

 private:
  Eigen::MatrixXd C_;
  Eigen::VectorXd c0_;
  std::vector<double> s0_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// C_ij = C(|s_i - s_j|), c0_i = C(|s_i - s0|) from the model's trace-covariance.
KrigingSystem build_system(const VariogramModel& model, const LocationSet& locations,
                           std::span<const double> s0);

struct OfkSolution {
  Eigen::VectorXd lambda;
  double mu = 0.0;  // multiplier of the bordered system [[C, 1], [1^T, 0]]
};

/// Schur-complement solve of the bordered system with one step of
/// iterative refinement.
OfkSolution ofk_solve(const KrigingSystem& system);

/// lambda^T C lambda - 2 c0^T lambda.
double kriging_objective(const KrigingSystem& system, const Eigen::VectorXd& lambda);

struct Prediction {
  Eigen::VectorXd coefficients;  // w0 = W^T lambda
  Eigen::VectorXd values;        // w0^T phi(t) on the grid
};

Prediction predict(const Eigen::VectorXd& lambda, const FunctionalDataset& dataset,
                   std::span<const double> grid);

}  // namespace fkrige
