#include "fkrige/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <gsl/gsl_multimin.h>

#include "fkrige/error.hpp"

namespace fkrige {

double functional_sq_distance(const Eigen::VectorXd& wi, const Eigen::VectorXd& wj,
                              const Eigen::MatrixXd& gram) {
  require(wi.size() == wj.size() && gram.rows() == wi.size() && gram.cols() == wi.size(),
          "functional_sq_distance: dimension mismatch");
  const Eigen::VectorXd diff = wi - wj;
  return std::max(0.0, diff.dot(gram * diff));
}

EmpiricalTraceVariogram empirical_trace_variogram(const FunctionalDataset& dataset,
                                                  const Eigen::MatrixXd& gram,
                                                  const BinningOptions& options) {
  const std::size_t n = dataset.size();
  require(n >= 2, "empirical_trace_variogram: need at least two sites");
  require(options.n_bins >= 1, "empirical_trace_variogram: n_bins must be positive");

  double max_dist = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      max_dist = std::max(max_dist, distance(dataset.locations.coords(i), dataset.locations.coords(j)));
  const double cutoff = options.cutoff.value_or(0.5 * max_dist);
  require(cutoff > 0.0 && std::isfinite(cutoff), "empirical_trace_variogram: cutoff must be positive");

  const double width = cutoff / static_cast<double>(options.n_bins);
  std::vector<double> dist_sum(options.n_bins, 0.0), sq_sum(options.n_bins, 0.0);
  std::vector<std::size_t> counts(options.n_bins, 0);
  const auto& W = dataset.coefficients;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(dataset.locations.coords(i), dataset.locations.coords(j));
      if (d <= 0.0 || d > cutoff) continue;
      // Right-closed bins: a distance on a bin edge belongs to the lower bin.
      const double frac = d / width;
      auto bin = static_cast<std::size_t>(std::ceil(frac)) - 1;
      bin = std::min(bin, options.n_bins - 1);
      dist_sum[bin] += d;
      sq_sum[bin] += functional_sq_distance(W.row(i).transpose(), W.row(j).transpose(), gram);
      ++counts[bin];
    }
  }

  EmpiricalTraceVariogram out;
  out.cutoff = cutoff;
  bool any_pair = false;
  for (std::size_t b = 0; b < options.n_bins; ++b) {
    if (counts[b] == 0) continue;
    any_pair = true;
    if (counts[b] < options.min_pairs) continue;
    const double c = static_cast<double>(counts[b]);
    out.bins.push_back({dist_sum[b] / c, sq_sum[b] / (2.0 * c), counts[b]});
  }
  if (!any_pair) throw VariogramError("no site pair within the cutoff distance");
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(VariogramFamily family) {
  switch (family) {
    case VariogramFamily::exponential: return "exponential";
    case VariogramFamily::gaussian: return "gaussian";
    case VariogramFamily::matern: return "matern";
  }
  return "unknown";
}

VariogramFamily parse_family(const std::string& name) {
  if (name == "exponential") return VariogramFamily::exponential;
  if (name == "gaussian") return VariogramFamily::gaussian;
  if (name == "matern") return VariogramFamily::matern;
  throw ContractError("unknown variogram family '" + name + "'");
}

void VariogramModel::validate() const {
  require(std::isfinite(nugget) && nugget >= 0.0, "variogram: nugget must be >= 0");
  require(std::isfinite(psill) && psill >= 0.0, "variogram: partial sill must be >= 0");
  require(std::isfinite(range) && range > 0.0, "variogram: range must be > 0");
  if (family == VariogramFamily::matern)
    require(nu == 0.5 || nu == 1.5 || nu == 2.5, "variogram: matern smoothness must be 0.5, 1.5 or 2.5");
}

double model_correlation(const VariogramModel& model, double r) {
  require(r >= 0.0, "variogram: negative distance");
  const double h = r / model.range;
  switch (model.family) {
    case VariogramFamily::exponential: return std::exp(-h);
    case VariogramFamily::gaussian: return std::exp(-h * h);
    case VariogramFamily::matern: {
      const double u = std::sqrt(2.0 * model.nu) * h;
      if (model.nu == 0.5) return std::exp(-u);
      if (model.nu == 1.5) return (1.0 + u) * std::exp(-u);
      return (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
  }
  return 0.0;
}

double model_gamma(const VariogramModel& model, double r) {
  require(r >= 0.0, "model_gamma: negative distance");
  if (r == 0.0) return 0.0;
  return model.nugget + model.psill * (1.0 - model_correlation(model, r));
}

double trace_covariance(const VariogramModel& model, double r) {
  return model.total_sill() - model_gamma(model, r);
}

// ---------------------------------------------------------------------------

namespace {

struct FitData {
  const EmpiricalTraceVariogram* empirical;
  VariogramFamily family;
  double nu;
  double scale;  // normalizes the loss to O(1)
  double max_range;
};

// Unconstrained parametrization: nugget = a^2, psill = b^2,
// range = max_range * logistic(c).
VariogramModel decode(const FitData& data, const gsl_vector* x) {
  VariogramModel m;
  m.family = data.family;
  m.nu = data.nu;
  m.nugget = gsl_vector_get(x, 0) * gsl_vector_get(x, 0);
  m.psill = gsl_vector_get(x, 1) * gsl_vector_get(x, 1);
  const double c = std::clamp(gsl_vector_get(x, 2), -700.0, 700.0);
  m.range = data.max_range / (1.0 + std::exp(-c));
  return m;
}

double range_to_param(const FitData& data, double range) {
  const double p = range / data.max_range;
  return std::log(p / (1.0 - p));
}

double wls_loss(const FitData& data, const VariogramModel& m) {
  double loss = 0.0;
  for (const auto& bin : data.empirical->bins) {
    const double resid = bin.gamma - model_gamma(m, bin.center);
    loss += static_cast<double>(bin.pair_count) * resid * resid;
  }
  return loss * data.scale;
}

double gsl_loss(const gsl_vector* x, void* params) {
  const auto& data = *static_cast<const FitData*>(params);
  const double loss = wls_loss(data, decode(data, x));
  return std::isfinite(loss) ? loss : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// One simplex descent, restarted from its own optimum until a restart no
// longer improves the loss.
std::pair<VariogramModel, double> simplex_search(FitData& data, double a0, double b0, double c0,
                                                 double sill_step) {
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(3));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(3));
  gsl_vector_set(x.get(), 0, a0);
  gsl_vector_set(x.get(), 1, b0);
  gsl_vector_set(x.get(), 2, c0);

  gsl_multimin_function fn{&gsl_loss, 3, &data};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));

  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 8; ++restart) {
    gsl_vector_set(step.get(), 0, sill_step);
    gsl_vector_set(step.get(), 1, sill_step);
    gsl_vector_set(step.get(), 2, 0.5);
    gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());
    for (int iter = 0; iter < 5000; ++iter) {
      if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
      const double size = gsl_multimin_fminimizer_size(solver.get());
      if (gsl_multimin_test_size(size, 1e-10) == GSL_SUCCESS) break;
    }
    const double value = solver->fval;
    gsl_vector_memcpy(x.get(), solver->x);
    if (!(value < best * (1.0 - 1e-12))) {
      best = std::min(best, value);
      break;
    }
    best = value;
  }
  return {decode(data, x.get()), best};
}

}  // namespace

VariogramModel fit_model(const EmpiricalTraceVariogram& empirical, VariogramFamily family,
                         double nu) {
  if (empirical.bins.size() < 3)
    throw FitError("variogram fit needs at least 3 bins, got " +
                   std::to_string(empirical.bins.size()));
  VariogramModel probe{family, 0.0, 1.0, 1.0, nu};
  probe.validate();

  double var = 0.0, total_count = 0.0;
  for (const auto& bin : empirical.bins) {
    var = std::max(var, bin.gamma);
    total_count += static_cast<double>(bin.pair_count);
  }
  const double cutoff = empirical.cutoff > 0.0 ? empirical.cutoff : empirical.bins.back().center;

  if (var <= 0.0) {
    // Every bin is zero: identical functions. A vanishing model is exact.
    return VariogramModel{family, 0.0, 0.0, cutoff, nu};
  }

  // Past a few cutoffs the bins only see the linear start of the model and
  // psill/range run off together, which wrecks the conditioning of C.
  FitData data{&empirical, family, nu, 1.0 / (total_count * var * var), kMaxRangeFactor * cutoff};
  const double sill_step = 0.25 * std::sqrt(var);

  VariogramModel best_model;
  double best_loss = std::numeric_limits<double>::infinity();
  for (double nugget0 : {0.0, 0.5 * var}) {
    for (double range_frac : {0.25, 0.5, 1.0}) {
      const double psill0 = std::max(var - nugget0, 1e-3 * var);
      auto [model, loss] = simplex_search(data, std::sqrt(nugget0), std::sqrt(psill0),
                                          range_to_param(data, range_frac * cutoff), sill_step);
      if (std::isfinite(loss) && loss < best_loss) {
        best_loss = loss;
        best_model = model;
      }
    }
  }
  if (!std::isfinite(best_loss))
    throw FitError("variogram fit failed from every start (" + std::to_string(empirical.bins.size()) +
                   " bins, max gamma " + format_real(var) + ")");

  // Correlation already negligible at the shortest lag: the data carry no
  // spatial structure the model can resolve, so report it as pure nugget.
  const double r_min = empirical.bins.front().center;
  if (best_model.psill * model_correlation(best_model, r_min) <= 1e-6 * best_model.total_sill()) {
    best_model.nugget += best_model.psill;
    best_model.psill = 0.0;
  }
  return best_model;
}

}  // namespace fkrige
