#include "fkrige/sofk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fkrige/error.hpp"

namespace fkrige {

AdaptiveWeights adaptive_weights(const Eigen::VectorXd& ofk_lambda, double tau) {
  require(tau > 0.0 && std::isfinite(tau), "adaptive_weights: tau must be positive");
  AdaptiveWeights out;
  out.weights.resize(ofk_lambda.size());
  out.floored.resize(static_cast<std::size_t>(ofk_lambda.size()));
  for (Eigen::Index i = 0; i < ofk_lambda.size(); ++i) {
    const double mag = std::abs(ofk_lambda[i]);
    out.floored[i] = mag <= kAdaptiveWeightFloor;
    out.weights[i] = std::pow(std::max(mag, kAdaptiveWeightFloor), -tau);
  }
  return out;
}

void SofkConfig::validate() const {
  require(rho0 > 0.0, "SofkConfig: rho0 must be positive");
  require(alpha > 0.0 && alpha < 1.0, "SofkConfig: alpha must lie in (0, 1)");
  require(kappa > 1.0, "SofkConfig: kappa must exceed 1");
  require(feas_tol > 0.0 && inner_tol > 0.0 && zero_clip > 0.0, "SofkConfig: tolerances must be positive");
  require(max_outer > 0 && max_inner > 0, "SofkConfig: iteration caps must be positive");
}

SofkProblem SofkProblem::make(std::shared_ptr<const KrigingSystem> system, double eta, double tau) {
  require(system != nullptr, "SofkProblem: null system");
  const auto ofk = ofk_solve(*system);
  return make(std::move(system), ofk, eta, tau);
}

SofkProblem SofkProblem::make(std::shared_ptr<const KrigingSystem> system, const OfkSolution& ofk,
                              double eta, double tau) {
  require(system != nullptr, "SofkProblem: null system");
  require(eta >= 0.0 && std::isfinite(eta), "SofkProblem: eta must be >= 0");
  require(ofk.lambda.size() == static_cast<Eigen::Index>(system->size()),
          "SofkProblem: OFK solution does not match the system");
  auto aw = adaptive_weights(ofk.lambda, tau);
  SofkProblem p;
  p.system = std::move(system);
  p.eta = eta;
  p.tau = tau;
  p.penalty_weights = std::move(aw.weights);
  p.floored = std::move(aw.floored);
  p.ofk = ofk;
  return p;
}

double sofk_objective(const SofkProblem& problem, const Eigen::VectorXd& lambda) {
  const double penalty = problem.eta * problem.penalty_weights.dot(lambda.cwiseAbs());
  return kriging_objective(*problem.system, lambda) + penalty;
}

double constraint_residual(const Eigen::VectorXd& lambda) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) s += lambda[i];
  return s - 1.0;
}

double augmented_lagrangian_value(const SofkProblem& problem, const Eigen::VectorXd& lambda,
                                  double mu, double rho) {
  const double g = constraint_residual(lambda);
  return sofk_objective(problem, lambda) + mu * g + 0.5 * rho * g * g;
}

double largest_eigenvalue(const Eigen::MatrixXd& matrix, double tol, std::size_t max_iter) {
  require(matrix.rows() == matrix.cols() && matrix.rows() > 0, "largest_eigenvalue: square matrix required");
  const auto n = matrix.rows();
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
  v.normalize();
  double estimate = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = matrix * v;
    const double rq = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(rq - estimate) <= tol * std::abs(rq)) return std::max(rq, norm);
    estimate = rq;
  }
  return estimate;
}

FistaResult fista_subproblem(const SofkProblem& problem, double mu, double rho,
                             const Eigen::VectorXd& init, const SofkConfig& config) {
  require(rho > 0.0, "fista_subproblem: rho must be positive");
  const auto& sys = *problem.system;
  const auto n = static_cast<Eigen::Index>(sys.size());
  require(init.size() == n, "fista_subproblem: initial point has the wrong length");

  // Gradient of the smooth part: H l - b with H = A^T A, b = A^T b.
  Eigen::MatrixXd H = 2.0 * sys.C();
  H.array() += rho;
  const Eigen::VectorXd rhs = (2.0 * sys.c0()).array() + (rho - mu);

  FistaResult out;
  out.lipschitz = 1.01 * largest_eigenvalue(H, 1e-10);
  const double step = 1.0 / out.lipschitz;
  const Eigen::VectorXd threshold = (problem.eta * step) * problem.penalty_weights;

  Eigen::VectorXd x_prev = init;
  Eigen::VectorXd y = init;
  Eigen::VectorXd x(n), grad(n);
  double t = 1.0;
  for (std::size_t iter = 1; iter <= config.max_inner; ++iter) {
    grad.noalias() = H * y;
    grad -= rhs;
    for (Eigen::Index i = 0; i < n; ++i) x[i] = soft_threshold(y[i] - step * grad[i], threshold[i]);

    out.iterations = iter;
    const double change = (x - x_prev).cwiseAbs().maxCoeff();
    if (change <= config.inner_tol * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      out.converged = true;
      x_prev = x;
      break;
    }
    if (config.adaptive_restart && (y - x).dot(x - x_prev) > 0.0) {
      t = 1.0;
      y = x;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    }
    x_prev = x;
  }

  if (augmented_lagrangian_value(problem, x_prev, mu, rho) >
      augmented_lagrangian_value(problem, init, mu, rho))
    out.lambda = init;
  else
    out.lambda = std::move(x_prev);
  return out;
}

double SofkSolution::lower_bound_margin() const {
  if (objective_trace.empty()) return std::numeric_limits<double>::infinity();
  return *std::min_element(objective_trace.begin(), objective_trace.end()) - lower_bound;
}

namespace {

// Rescales so the left-to-right sum is exactly 1.0. Leftover rounding goes
// into one nonzero weight, tried from the last index backwards: starting
// from 1 minus the other weights, a few ulps either side are searched.
void renormalize_exact(Eigen::VectorXd& lambda) {
  const double s = constraint_residual(lambda) + 1.0;
  if (s == 0.0) throw SolveError("sparse kriging weights sum to zero after clipping");
  lambda /= s;
  if (constraint_residual(lambda) == 0.0) return;
  for (Eigen::Index j = lambda.size() - 1; j >= 0; --j) {
    if (lambda[j] == 0.0) continue;
    const double original = lambda[j];
    double others = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      if (i != j) others += lambda[i];
    double up = 1.0 - others, down = up;
    for (int k = 0; k <= 64; ++k) {
      for (double candidate : {up, down}) {
        if (candidate == 0.0) continue;
        lambda[j] = candidate;
        if (constraint_residual(lambda) == 0.0) return;
      }
      up = std::nextafter(up, std::numeric_limits<double>::infinity());
      down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    }
    lambda[j] = original;
  }
  throw SolveError("could not renormalize sparse kriging weights to sum exactly to one");
}

}  // namespace

SofkSolution augmented_lagrangian_solve(const SofkProblem& problem, const SofkConfig& config) {
  config.validate();
  require(problem.system != nullptr, "augmented_lagrangian_solve: null system");
  const auto& sys = *problem.system;

  SofkSolution sol;
  sol.lower_bound = sys.quadratic_lower_bound();

  Eigen::VectorXd lambda = problem.ofk.lambda;
  double mu = 2.0 * problem.ofk.mu;
  double rho = config.rho0;
  double g_prev = std::abs(constraint_residual(lambda));

  Eigen::VectorXd best = lambda;
  double best_mu = mu;
  double best_g = std::numeric_limits<double>::infinity();

  for (std::size_t k = 1; k <= config.max_outer; ++k) {
    auto inner = fista_subproblem(problem, mu, rho, lambda, config);
    const double g = constraint_residual(inner.lambda);
    mu += rho * g;

    SofkIteration row;
    row.k = k;
    row.f = sofk_objective(problem, inner.lambda);
    row.abs_g = std::abs(g);
    row.rho = rho;
    row.mu = 0.5 * mu;
    row.inner_iters = inner.iterations;
    sol.history.push_back(row);
    sol.objective_trace.push_back(row.f);
    sol.feas_trace.push_back(row.abs_g);
    sol.inner_iters_total += inner.iterations;
    if (!inner.converged) ++sol.inner_cap_hits;
    sol.outer_iters = k;

    lambda = std::move(inner.lambda);
    if (row.abs_g <= best_g) {
      best_g = row.abs_g;
      best = lambda;
      best_mu = mu;
    }
    if (row.abs_g <= config.feas_tol && inner.converged) {
      sol.converged = true;
      best = lambda;
      best_mu = mu;
      break;
    }
    rho = next_penalty(rho, row.abs_g, g_prev, config);
    g_prev = row.abs_g;
  }

  sol.lambda = std::move(best);
  sol.mu = 0.5 * best_mu;
  sol.raw_feasibility = std::abs(constraint_residual(sol.lambda));
  for (Eigen::Index i = 0; i < sol.lambda.size(); ++i)
    if (std::abs(sol.lambda[i]) <= config.zero_clip) sol.lambda[i] = 0.0;
  renormalize_exact(sol.lambda);
  for (Eigen::Index i = 0; i < sol.lambda.size(); ++i)
    if (sol.lambda[i] != 0.0) sol.support.push_back(static_cast<std::size_t>(i));
  return sol;
}

}  // namespace fkrige
