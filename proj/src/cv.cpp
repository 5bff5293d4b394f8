#include "fkrige/cv.hpp"

#include <cmath>
#include <set>
#include <string>

#include "fkrige/error.hpp"
#include "fkrige/parallel.hpp"

namespace fkrige {

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi > 0.0 && count >= 1, "logspace: positive bounds and count required");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

CvGrid CvGrid::product(const std::vector<double>& etas, const std::vector<double>& taus) {
  CvGrid grid;
  for (double eta : etas)
    for (double tau : taus) grid.pairs.emplace_back(eta, tau);
  grid.validate();
  return grid;
}

CvGrid CvGrid::defaults() { return product(logspace(1e-4, 10.0, 12), {0.5, 1.0, 2.0}); }

void CvGrid::validate() const {
  require(!pairs.empty(), "CvGrid: empty grid");
  std::set<std::pair<double, double>> seen;
  for (const auto& [eta, tau] : pairs) {
    require(eta >= 0.0 && std::isfinite(eta), "CvGrid: eta must be >= 0");
    require(tau > 0.0 && std::isfinite(tau), "CvGrid: tau must be > 0");
    require(seen.emplace(eta, tau).second, "CvGrid: duplicate (eta, tau) pair");
  }
}

namespace {

struct Fold {
  std::shared_ptr<const KrigingSystem> system;
  OfkSolution ofk;
  FunctionalDataset training;
};

Fold make_fold(const FunctionalDataset& dataset, const VariogramModel& model, std::size_t i) {
  auto training = dataset.without(i);
  auto system = std::make_shared<const KrigingSystem>(
      build_system(model, training.locations, dataset.locations.coords(i)));
  auto ofk = ofk_solve(*system);
  return Fold{std::move(system), std::move(ofk), std::move(training)};
}

double fold_error(const FunctionalDataset& dataset, const Fold& fold, const Eigen::MatrixXd& gram,
                  std::size_t i, double eta, double tau, const SofkConfig& config, bool& converged) {
  const auto problem = SofkProblem::make(fold.system, fold.ofk, eta, tau);
  const auto sol = augmented_lagrangian_solve(problem, config);
  converged = sol.converged;
  const Eigen::VectorXd w0 = fold.training.coefficients.transpose() * sol.lambda;
  return functional_sq_distance(dataset.coefficient(i), w0, gram);
}

void check_inputs(const FunctionalDataset& dataset, const Eigen::MatrixXd& gram) {
  require(dataset.size() >= 3, "cross-validation needs at least 3 sites");
  require(gram.rows() == dataset.basis.size() && gram.cols() == dataset.basis.size(),
          "cross-validation: Gram matrix does not match the basis");
}

}  // namespace

CvScore loocv_score(const FunctionalDataset& dataset, const VariogramModel& model,
                    const Eigen::MatrixXd& gram, double eta, double tau, const CvOptions& options) {
  CvGrid{{{eta, tau}}}.validate();
  return grid_select(dataset, model, gram, CvGrid{{{eta, tau}}}, options).scores.front();
}

CvReport grid_select(const FunctionalDataset& dataset, const VariogramModel& model,
                     const Eigen::MatrixXd& gram, const CvGrid& grid, const CvOptions& options) {
  check_inputs(dataset, gram);
  grid.validate();
  const std::size_t n = dataset.size();
  const std::size_t pairs = grid.pairs.size();

  // errors[i * pairs + p]: fold i, grid pair p.
  std::vector<double> errors(n * pairs, 0.0);
  std::vector<char> converged(n * pairs, 1);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    try {
      const auto fold = make_fold(dataset, model, i);
      for (std::size_t p = 0; p < pairs; ++p) {
        bool ok = true;
        errors[i * pairs + p] = fold_error(dataset, fold, gram, i, grid.pairs[p].first,
                                           grid.pairs[p].second, options.sofk, ok);
        converged[i * pairs + p] = ok;
      }
    } catch (const std::exception& e) {
      throw CvError("cross-validation fold " + std::to_string(i) + " (site '" +
                    dataset.locations[i].id + "') failed: " + e.what());
    }
  });

  CvReport report;
  for (std::size_t p = 0; p < pairs; ++p) {
    CvScore s;
    s.eta = grid.pairs[p].first;
    s.tau = grid.pairs[p].second;
    for (std::size_t i = 0; i < n; ++i) {
      s.fold_errors.push_back(errors[i * pairs + p]);
      s.score += errors[i * pairs + p];
      if (!converged[i * pairs + p]) ++s.unconverged_folds;
    }
    report.scores.push_back(std::move(s));
  }

  for (std::size_t p = 1; p < pairs; ++p) {
    const auto& cand = report.scores[p];
    const auto& cur = report.scores[report.best];
    if (cand.score < cur.score ||
        (cand.score == cur.score &&
         (cand.eta < cur.eta || (cand.eta == cur.eta && cand.tau < cur.tau))))
      report.best = p;
  }
  return report;
}

}  // namespace fkrige
