#pragma once

// Sparse ordinary functional kriging: kriging weights under an adaptive
// lasso penalty and the sum-to-one constraint,
//
//   minimize  f(l) = l^T C l - 2 c0^T l + eta * sum_i w_i |l_i|
//   s.t.      g(l) = 1^T l - 1 = 0,
//
// solved by an augmented Lagrangian outer loop whose subproblems
//   f(l) + mu_k g(l) + rho_k / 2 g(l)^2
// are handled by FISTA.
//
// Multiplier scale: the augmented Lagrangian multiplier is twice the
// multiplier of the bordered kriging system. Everything reported in
// SofkSolution (including the per-iteration history) uses the bordered
// scale so it is directly comparable to OfkSolution::mu; fista_subproblem
// takes the augmented Lagrangian multiplier as-is.

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/ofk.hpp"

namespace fkrige {

inline constexpr double kAdaptiveWeightFloor = 1e-8;

struct AdaptiveWeights {
  Eigen::VectorXd weights;
  std::vector<bool> floored;  // |lambda_i| <= floor
};

/// w_i = max(|lambda_i|, 1e-8)^(-tau).
AdaptiveWeights adaptive_weights(const Eigen::VectorXd& ofk_lambda, double tau);

struct SofkConfig {
  double rho0 = 1.0;
  double alpha = 0.9;   // penalty grows when |g| fails to shrink below alpha * previous
  double kappa = 2.0;   // penalty growth factor
  double feas_tol = 1e-8;
  double inner_tol = 1e-10;
  std::size_t max_outer = 200;
  std::size_t max_inner = 10000;
  double zero_clip = 1e-10;
  /// Reset the FISTA momentum whenever it points uphill (gradient restart).
  bool adaptive_restart = true;

  void validate() const;
};

struct SofkProblem {
  std::shared_ptr<const KrigingSystem> system;
  double eta = 0.0;
  double tau = 1.0;
  Eigen::VectorXd penalty_weights;
  std::vector<bool> floored;
  OfkSolution ofk;  // source of the adaptive weights and the starting point

  /// Solves OFK on the system and derives the adaptive weights from it.
  static SofkProblem make(std::shared_ptr<const KrigingSystem> system, double eta, double tau);
  static SofkProblem make(std::shared_ptr<const KrigingSystem> system, const OfkSolution& ofk,
                          double eta, double tau);

  std::size_t size() const { return system->size(); }
};

double sofk_objective(const SofkProblem& problem, const Eigen::VectorXd& lambda);

/// Value of the augmented Lagrangian f + mu g + rho/2 g^2.
double augmented_lagrangian_value(const SofkProblem& problem, const Eigen::VectorXd& lambda,
                                  double mu, double rho);

/// sign(v) * max(|v| - theta, 0).
inline double soft_threshold(double v, double theta) {
  if (v > theta) return v - theta;
  if (v < -theta) return v + theta;
  return 0.0;
}

/// Dominant eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration; stops once the Rayleigh quotient changes by <= tol relatively.
double largest_eigenvalue(const Eigen::MatrixXd& matrix, double tol = 1e-10,
                          std::size_t max_iter = 100000);

struct FistaResult {
  Eigen::VectorXd lambda;
  std::size_t iterations = 0;
  bool converged = false;
  double lipschitz = 0.0;
};

/// Minimizes 1/2 |A l - b|^2 + eta sum w_i |l_i| where A^T A = 2C + rho 1 1^T
/// and A^T b = 2 c0 + (rho - mu) 1, warm-started at `init`. `mu` is the
/// augmented Lagrangian multiplier. Never returns a point whose augmented
/// Lagrangian value exceeds that of `init`.
FistaResult fista_subproblem(const SofkProblem& problem, double mu, double rho,
                             const Eigen::VectorXd& init, const SofkConfig& config);

struct SofkIteration {
  std::size_t k = 0;
  double f = 0.0;
  double abs_g = 0.0;
  double rho = 0.0;  // penalty used for this subproblem
  double mu = 0.0;   // multiplier after the update (bordered scale)
  std::size_t inner_iters = 0;
};

struct SofkSolution {
  Eigen::VectorXd lambda;
  double mu = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> objective_trace;
  std::vector<double> feas_trace;
  std::vector<SofkIteration> history;
  std::size_t outer_iters = 0;
  std::size_t inner_iters_total = 0;
  std::size_t inner_cap_hits = 0;
  bool converged = false;
  /// |1^T lambda - 1| before zero clipping and renormalization.
  double raw_feasibility = 0.0;
  /// -c0^T C^{-1} c0; every recorded objective must stay above it.
  double lower_bound = 0.0;

  /// Smallest recorded objective minus the lower bound.
  double lower_bound_margin() const;
};

/// Penalty for the next subproblem: kappa * rho when |g| failed to drop
/// below alpha times its previous value, rho otherwise.
inline double next_penalty(double rho, double abs_g, double prev_abs_g, const SofkConfig& config) {
  return abs_g > config.alpha * prev_abs_g ? config.kappa * rho : rho;
}

/// Augmented Lagrangian method started from the OFK weights and multiplier.
/// Weights with |lambda_i| <= zero_clip are set to 0 and the rest rescaled
/// so that the weights sum to exactly one.
SofkSolution augmented_lagrangian_solve(const SofkProblem& problem, const SofkConfig& config = {});

/// 1^T lambda - 1 accumulated left to right.
double constraint_residual(const Eigen::VectorXd& lambda);

}  // namespace fkrige
