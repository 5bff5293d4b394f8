#include "fkrige/ofk.hpp"

#include <algorithm>
#include <cmath>

#include "fkrige/error.hpp"

namespace fkrige {

KrigingSystem::KrigingSystem(Eigen::MatrixXd C, Eigen::VectorXd c0, std::vector<double> s0)
    : C_(std::move(C)), c0_(std::move(c0)), s0_(std::move(s0)) {
  require(C_.rows() == C_.cols(), "KrigingSystem: C must be square");
  require(C_.rows() == c0_.size(), "KrigingSystem: c0 length must match C");
  require(c0_.size() >= 1, "KrigingSystem: empty system");
  require(C_.allFinite() && c0_.allFinite(), "KrigingSystem: non-finite entries");
  require((C_ - C_.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, C_.cwiseAbs().maxCoeff()),
          "KrigingSystem: C must be symmetric");

  llt_.compute(C_);
  if (llt_.info() == Eigen::Success) return;

  const double scale = C_.diagonal().cwiseAbs().mean();
  double jitter = 1e-10 * (scale > 0.0 ? scale : 1.0);
  for (int attempt = 0; attempt < 12; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd jittered = C_;
    jittered.diagonal().array() += jitter;
    llt_.compute(jittered);
    if (llt_.info() == Eigen::Success) {
      C_ = std::move(jittered);
      jitter_ = jitter;
      return;
    }
  }
  throw SolveError("kriging covariance matrix is not positive definite even after jitter");
}

KrigingSystem build_system(const VariogramModel& model, const LocationSet& locations,
                           std::span<const double> s0) {
  model.validate();
  require(!locations.empty(), "build_system: no observed sites");
  require(s0.size() == locations.dim(), "build_system: s0 has the wrong dimension");
  const auto n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd C(n, n);
  Eigen::VectorXd c0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    C(i, i) = trace_covariance(model, 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = trace_covariance(model, distance(locations.coords(i), locations.coords(j)));
      C(i, j) = c;
      C(j, i) = c;
    }
    c0[i] = trace_covariance(model, distance(locations.coords(i), s0));
  }
  return KrigingSystem(std::move(C), std::move(c0), std::vector<double>(s0.begin(), s0.end()));
}

OfkSolution ofk_solve(const KrigingSystem& system) {
  const auto n = static_cast<Eigen::Index>(system.size());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd y_one = system.solve(ones);
  const double denom = ones.dot(y_one);
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw SolveError("bordered kriging system is numerically singular");

  // lambda = C^{-1}(r - mu 1), mu = (1^T C^{-1} r - s) / (1^T C^{-1} 1)
  auto schur = [&](const Eigen::VectorXd& r, double s, OfkSolution& out) {
    const Eigen::VectorXd y = system.solve(r);
    out.mu = (ones.dot(y) - s) / denom;
    out.lambda = y - out.mu * y_one;
  };

  OfkSolution sol;
  schur(system.c0(), 1.0, sol);

  const Eigen::VectorXd r1 = system.c0() - system.C() * sol.lambda - sol.mu * ones;
  const double r2 = 1.0 - sol.lambda.sum();
  OfkSolution delta;
  schur(r1, r2, delta);
  sol.lambda += delta.lambda;
  sol.mu += delta.mu;

  if (!sol.lambda.allFinite() || !std::isfinite(sol.mu))
    throw SolveError("bordered kriging solve produced non-finite weights");
  return sol;
}

double kriging_objective(const KrigingSystem& system, const Eigen::VectorXd& lambda) {
  require(lambda.size() == static_cast<Eigen::Index>(system.size()), "kriging_objective: length mismatch");
  return lambda.dot(system.C() * lambda) - 2.0 * system.c0().dot(lambda);
}

Prediction predict(const Eigen::VectorXd& lambda, const FunctionalDataset& dataset,
                   std::span<const double> grid) {
  require(lambda.size() == static_cast<Eigen::Index>(dataset.size()),
          "predict: weight vector length must equal the number of sites");
  Prediction out;
  out.coefficients = dataset.coefficients.transpose() * lambda;
  out.values = evaluate_function(dataset.basis, out.coefficients, grid);
  return out;
}

}  // namespace fkrige
