#include "fkrige/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "fkrige/error.hpp"
#include "fkrige/ofk.hpp"
#include "fkrige/parallel.hpp"
#include "fkrige/rng.hpp"

namespace fkrige {

void SimulationDesign::validate() const {
  require(grid_side >= 2, "design: grid_side must be >= 2");
  require(n_observed >= 1 && n_observed <= grid_side * grid_side,
          "design: n_observed must lie in [1, grid_side^2]");
  require(range > 0.0 && std::isfinite(range), "design: range must be positive");
  require(sill > 0.0 && std::isfinite(sill), "design: sill must be positive");
  require(nugget >= 0.0 && std::isfinite(nugget), "design: nugget must be >= 0");
  require(noise_sd >= 0.0 && std::isfinite(noise_sd), "design: noise_sd must be >= 0");
  require(time_end > 0.0 && std::isfinite(time_end), "design: time_end must be positive");
  require(num_basis >= 4, "design: need at least 4 cubic B-spline functions");
  require(n_time >= static_cast<std::size_t>(num_basis),
          "design: need at least as many time points as basis functions");
}

LocationSet SimulationDesign::grid_locations() const {
  std::vector<Site> sites;
  sites.reserve(grid_side * grid_side);
  const double step = 1.0 / static_cast<double>(grid_side - 1);
  for (std::size_t r = 0; r < grid_side; ++r) {
    for (std::size_t c = 0; c < grid_side; ++c) {
      char id[32];
      std::snprintf(id, sizeof(id), "g%03zu", r * grid_side + c);
      sites.push_back({id, {static_cast<double>(c) * step, static_cast<double>(r) * step}});
    }
  }
  return LocationSet(std::move(sites));
}

BasisDescriptor SimulationDesign::basis() const { return BasisDescriptor::bspline(num_basis, 0.0, time_end, 4); }

std::vector<double> SimulationDesign::time_grid() const { return uniform_grid(0.0, time_end, n_time); }

Eigen::MatrixXd exponential_covariance(const LocationSet& sites, double sill, double range,
                                       double nugget) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = sill + nugget;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = sill * std::exp(-distance(sites.coords(i), sites.coords(j)) / range);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

SimulatedField generate_coefficients(const SimulationDesign& design, std::uint64_t replicate) {
  design.validate();
  SimulatedField field;
  field.sites = design.grid_locations();
  const auto n_sites = static_cast<Eigen::Index>(field.sites.size());

  Eigen::MatrixXd cov = exponential_covariance(field.sites, design.sill, design.range, design.nugget);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10 * design.sill;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw SimError("field covariance is not positive definite (range " +
                     format_real(design.range) + ")");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  Rng field_rng = Rng::stream(design.seed, replicate, StreamPurpose::field);
  Eigen::MatrixXd z(n_sites, design.num_basis);
  for (int m = 0; m < design.num_basis; ++m)
    for (Eigen::Index i = 0; i < n_sites; ++i) z(i, m) = field_rng.normal();
  field.truth = L * z;

  // Partial Fisher-Yates shuffle picks the observed subset.
  Rng pick = Rng::stream(design.seed, replicate, StreamPurpose::site_selection);
  std::vector<std::size_t> order(field.sites.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = 0; k < design.n_observed; ++k) {
    const auto j = k + static_cast<std::size_t>(pick.below(order.size() - k));
    std::swap(order[k], order[j]);
  }
  field.observed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(design.n_observed));
  std::sort(field.observed.begin(), field.observed.end());
  std::vector<char> is_observed(field.sites.size(), 0);
  for (auto i : field.observed) is_observed[i] = 1;
  for (std::size_t i = 0; i < field.sites.size(); ++i)
    if (!is_observed[i]) field.held_out.push_back(i);
  return field;
}

LongitudinalTable generate_longitudinal(const Eigen::MatrixXd& coefficients,
                                        const LocationSet& locations,
                                        const SimulationDesign& design, std::uint64_t replicate) {
  design.validate();
  require(coefficients.rows() == static_cast<Eigen::Index>(locations.size()) &&
              coefficients.cols() == design.num_basis,
          "generate_longitudinal: coefficient matrix does not match the design");
  const auto basis = design.basis();
  const auto times = design.time_grid();
  const Eigen::MatrixXd X = basis.design_matrix(times);

  std::vector<Observation> rows;
  rows.reserve(locations.size() * times.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    Rng noise = Rng::stream(design.seed, replicate, StreamPurpose::noise, i);
    const Eigen::VectorXd clean = X * coefficients.row(static_cast<Eigen::Index>(i)).transpose();
    for (std::size_t j = 0; j < times.size(); ++j)
      rows.push_back({locations[i].id, times[j], clean[static_cast<Eigen::Index>(j)] + design.noise_sd * noise.normal()});
  }
  return LongitudinalTable(locations, rows);
}

// ---------------------------------------------------------------------------

ReplicateResult run_replicate(const SimulationDesign& design, std::size_t replicate,
                              const ExperimentOptions& options) {
  try {
    const auto field = generate_coefficients(design, replicate);
    const auto observed = field.sites.subset(field.observed);
    Eigen::MatrixXd w_obs(static_cast<Eigen::Index>(field.observed.size()), design.num_basis);
    for (std::size_t r = 0; r < field.observed.size(); ++r)
      w_obs.row(static_cast<Eigen::Index>(r)) = field.truth.row(static_cast<Eigen::Index>(field.observed[r]));
    const auto table = generate_longitudinal(w_obs, observed, design, replicate);

    // Everything below sees only the observed-site data.
    const auto basis = design.basis();
    const auto dataset = smooth(table, observed, basis);
    const Eigen::MatrixXd gram = gram_matrix(basis);
    const auto empirical = empirical_trace_variogram(dataset, gram, options.binning);
    const auto model = fit_model(empirical, options.family, options.nu);

    CvOptions cv_options{options.sofk, 1};
    const auto cv = grid_select(dataset, model, gram, options.grid, cv_options);

    ReplicateResult out;
    out.replicate = replicate;
    out.n = design.n_observed;
    out.range = design.range;
    out.eta = cv.best_score().eta;
    out.tau = cv.best_score().tau;
    out.model = model;
    out.min_lower_bound_margin = std::numeric_limits<double>::infinity();

    double sofk_sum = 0.0, ofk_sum = 0.0, nonzero_sum = 0.0;
    for (auto target : field.held_out) {
      const auto s0 = field.sites.coords(target);
      auto system = std::make_shared<const KrigingSystem>(build_system(model, observed, s0));
      const auto ofk = ofk_solve(*system);
      const auto problem = SofkProblem::make(system, ofk, out.eta, out.tau);
      const auto sofk = augmented_lagrangian_solve(problem, options.sofk);
      if (!sofk.converged) ++out.unconverged;
      out.min_lower_bound_margin = std::min(out.min_lower_bound_margin, sofk.lower_bound_margin());
      out.max_raw_feasibility = std::max(out.max_raw_feasibility, sofk.raw_feasibility);

      const Eigen::VectorXd truth = field.truth.row(static_cast<Eigen::Index>(target)).transpose();
      sofk_sum += functional_sq_distance(truth, dataset.coefficients.transpose() * sofk.lambda, gram);
      ofk_sum += functional_sq_distance(truth, dataset.coefficients.transpose() * ofk.lambda, gram);
      nonzero_sum += static_cast<double>(sofk.support.size());

      std::vector<double> dist(observed.size());
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < observed.size(); ++i) {
        dist[i] = distance(observed.coords(i), s0);
        nearest = std::min(nearest, dist[i]);
      }
      for (std::size_t i = 0; i < observed.size(); ++i) {
        if (dist[i] <= nearest * (1.0 + 1e-9)) {
          ++out.nearest_total;
          if (sofk.lambda[static_cast<Eigen::Index>(i)] == 0.0) ++out.nearest_zero;
        }
        if (options.keep_weights)
          out.weights.push_back({replicate, field.sites[target].id, observed[i].id, dist[i],
                                 sofk.lambda[static_cast<Eigen::Index>(i)],
                                 ofk.lambda[static_cast<Eigen::Index>(i)]});
      }
    }
    const auto targets = static_cast<double>(field.held_out.size());
    if (targets > 0) {
      out.sofk_mse = sofk_sum / targets;
      out.ofk_mse = ofk_sum / targets;
      out.nonzero_mean = nonzero_sum / targets;
    }
    return out;
  } catch (const ContractError&) {
    throw;
  } catch (const std::exception& e) {
    throw SimError("replicate " + std::to_string(replicate) + ": " + e.what());
  }
}

std::vector<ReplicateResult> run_experiment(const SimulationDesign& design, std::size_t n_replicates,
                                            const ExperimentOptions& options) {
  design.validate();
  options.grid.validate();
  options.sofk.validate();
  std::vector<ReplicateResult> results(n_replicates);
  parallel_for(n_replicates, options.jobs,
               [&](std::size_t r) { results[r] = run_replicate(design, r, options); });
  return results;
}

ColumnSummary summarize_column(std::span<const double> values) {
  ColumnSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

ExperimentSummary summarize(std::span<const ReplicateResult> results) {
  ExperimentSummary s;
  s.replicates = results.size();
  if (results.empty()) return s;
  s.n = results.front().n;
  s.range = results.front().range;
  std::vector<double> a, b, c;
  for (const auto& r : results) {
    a.push_back(r.sofk_mse);
    b.push_back(r.ofk_mse);
    c.push_back(r.nonzero_mean);
  }
  s.sofk_mse = summarize_column(a);
  s.ofk_mse = summarize_column(b);
  s.nonzero = summarize_column(c);
  return s;
}

}  // namespace fkrige
