// fkrige: command-line front end for functional kriging.
//
//   fkrige simulate   --n 50 --range 10 --seed 7 --out sim/
//   fkrige smooth     --locations L --observations O --out fit/
//   fkrige variogram  --locations L --observations O --out fit/
//   fkrige krige      --locations L --observations O --target g112 --sparse --out run/
//   fkrige cv-select  --locations L --observations O --out cv/
//   fkrige experiment --n 50 --ranges 1,5,10 --replicates 20 --jobs 4 --out exp/
//   fkrige report     --weights-long exp/weights_long.csv --svg --out rep/
//
// Every subcommand also reads a TOML config (--config); flags win over it.
// Exit codes: 0 success, 1 runtime failure, 2 usage or invalid input.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fkrige/basis.hpp"
#include "fkrige/cv.hpp"
#include "fkrige/error.hpp"
#include "fkrige/io.hpp"
#include "fkrige/model_io.hpp"
#include "fkrige/ofk.hpp"
#include "fkrige/report.hpp"
#include "fkrige/simgen.hpp"
#include "fkrige/sofk.hpp"
#include "fkrige/variogram.hpp"

namespace fs = std::filesystem;
using namespace fkrige;
using nlohmann::json;

namespace {

// Invalid input discovered after parsing; exits with 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pipeline stage failed; carries the stage name for the message.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what, int code)
      : std::runtime_error(stage + ": " + what), exit_code(code) {}
  int exit_code;
};

template <class F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const ContractError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const Error& e) {
    throw StageError(name, e.what(), 1);
  }
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out = ".";

  fs::path path(const std::string& name) const { return fs::path(out) / name; }
};

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw UsageError(flag + " is required");
  if (!fs::is_regular_file(path)) throw UsageError(flag + ": no such file '" + path + "'");
}

void prepare_out(const Common& common) {
  std::error_code ec;
  fs::create_directories(common.out, ec);
  if (ec || !fs::is_directory(common.out))
    throw UsageError("--out: cannot create directory '" + common.out + "'");
}

// ---------------------------------------------------------------------------
// Shared option groups

struct DataArgs {
  std::string locations;
  std::string observations;
  std::size_t min_rows = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--locations", locations, "site_id,x1..xd CSV")->required();
    cmd->add_option("--observations", observations, "site_id,t,value CSV")->required();
    cmd->add_option("--min-rows", min_rows, "warn about sites with fewer observations");
  }
};

struct BasisArgs {
  std::string basis_file;
  std::string kind = "bspline";
  int num_basis = 10;
  int order = 4;
  std::optional<double> t0, t1;
  double period = 0.0;
  double ridge = 0.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--basis", basis_file, "basis JSON (overrides the options below)");
    cmd->add_option("--basis-kind", kind, "bspline or fourier")->check(CLI::IsMember({"bspline", "fourier"}));
    cmd->add_option("--num-basis", num_basis, "number of basis functions");
    cmd->add_option("--order", order, "B-spline order");
    cmd->add_option("--t0", t0, "domain start (default: first observation time)");
    cmd->add_option("--t1", t1, "domain end (default: last observation time)");
    cmd->add_option("--period", period, "Fourier period (default: t1 - t0)");
    cmd->add_option("--ridge", ridge, "ridge penalty for smoothing")->check(CLI::NonNegativeNumber);
  }

  BasisDescriptor build(const LongitudinalTable& table) const {
    if (!basis_file.empty()) return basis_from_json(read_json(basis_file));
    const auto [lo, hi] = table.time_range();
    const double a = t0.value_or(lo), b = t1.value_or(hi);
    if (!(b > a)) throw DataError("time domain is empty; set --t0 and --t1");
    if (kind == "fourier") return BasisDescriptor::fourier(num_basis, a, b, period);
    return BasisDescriptor::bspline(num_basis, a, b, order);
  }
};

struct VariogramArgs {
  std::string model_file;
  std::string family = "exponential";
  double nu = 0.5;
  std::size_t bins = 15;
  std::optional<double> cutoff;
  std::size_t min_pairs = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--variogram", model_file, "fitted model JSON; skips fitting");
    cmd->add_option("--family", family, "exponential, gaussian or matern")
        ->check(CLI::IsMember({"exponential", "gaussian", "matern"}));
    cmd->add_option("--nu", nu, "Matern smoothness (0.5, 1.5 or 2.5)");
    cmd->add_option("--bins", bins, "number of distance bins")->check(CLI::PositiveNumber);
    cmd->add_option("--cutoff", cutoff, "largest binned distance (default: half the maximum)");
    cmd->add_option("--min-pairs", min_pairs, "drop bins with fewer pairs");
  }

  BinningOptions binning() const { return {bins, cutoff, min_pairs}; }
};

struct GridArgs {
  std::vector<double> etas;
  std::vector<double> taus;

  void add(CLI::App* cmd) {
    cmd->add_option("--eta-grid", etas, "candidate eta values (default: 12 log-spaced in [1e-4, 10])")
        ->delimiter(',');
    cmd->add_option("--tau-grid", taus, "candidate tau values (default: 0.5,1,2)")->delimiter(',');
  }

  CvGrid build() const {
    if (etas.empty() && taus.empty()) return CvGrid::defaults();
    std::vector<double> e = etas, t = taus;
    if (e.empty()) e = logspace(1e-4, 10.0, 12);
    if (t.empty()) t = {0.5, 1.0, 2.0};
    return CvGrid::product(e, t);
  }
};

SofkConfig sofk_config(double feas_tol, std::size_t max_outer) {
  SofkConfig c;
  c.feas_tol = feas_tol;
  c.max_outer = max_outer;
  c.validate();
  return c;
}

// Loads locations and observations, keeping only sites that have rows.
struct LoadedData {
  LocationSet all_locations;
  LocationSet locations;
  LongitudinalTable table;
};

LoadedData load_data(const DataArgs& args) {
  require_file(args.locations, "--locations");
  require_file(args.observations, "--observations");
  return stage("loading", [&] {
    LoadedData d;
    d.all_locations = load_locations(args.locations);
    auto full = load_longitudinal(args.observations, d.all_locations, args.min_rows);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < full.num_sites(); ++i)
      if (!full.series(i).t.empty()) keep.push_back(i);
    if (keep.empty()) throw DataError("no observations");
    d.locations = d.all_locations.subset(keep);
    d.table = full.subset(keep);
    for (const auto& w : full.warnings()) std::cerr << "warning: " << w << '\n';
    return d;
  });
}

struct Fitted {
  FunctionalDataset dataset;
  Eigen::MatrixXd gram;
  std::optional<EmpiricalTraceVariogram> empirical;
  VariogramModel model;
};

FunctionalDataset smooth_data(const LoadedData& data, const BasisArgs& basis, std::size_t jobs) {
  const auto desc = stage("basis", [&] { return basis.build(data.table); });
  return stage("smoothing", [&] { return smooth(data.table, data.locations, desc, basis.ridge, jobs); });
}

Fitted fit_pipeline(FunctionalDataset dataset, const VariogramArgs& vario) {
  auto gram = stage("gram matrix", [&] { return gram_matrix(dataset.basis); });
  std::optional<EmpiricalTraceVariogram> emp;
  VariogramModel model;
  if (!vario.model_file.empty()) {
    require_file(vario.model_file, "--variogram");
    model = stage("variogram", [&] { return variogram_from_json(read_json(vario.model_file)); });
  } else {
    emp = stage("empirical variogram",
                [&] { return empirical_trace_variogram(dataset, gram, vario.binning()); });
    model = stage("variogram fit", [&] { return fit_model(*emp, parse_family(vario.family), vario.nu); });
  }
  return {std::move(dataset), std::move(gram), std::move(emp), model};
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::optional<std::size_t> n;
  std::optional<double> range;
  std::size_t grid_side = 15;
  double sill = 2.0;
  double nugget = 0.0;
  double noise_sd = 0.3;
  std::size_t n_time = 31;
  double time_end = 1.0;
  int num_basis = 10;
  std::size_t replicate = 0;

  void add_design(CLI::App* cmd) {
    cmd->add_option("--grid-side", grid_side, "sites per side of the square grid");
    cmd->add_option("--sill", sill, "partial sill of the generating model");
    cmd->add_option("--nugget", nugget, "nugget of the generating model");
    cmd->add_option("--noise-sd", noise_sd, "measurement noise standard deviation");
    cmd->add_option("--n-time", n_time, "time points per site");
    cmd->add_option("--time-end", time_end, "time domain is [0, time-end]");
    cmd->add_option("--num-basis", num_basis, "cubic B-spline functions");
  }

  SimulationDesign design(std::uint64_t seed) const {
    SimulationDesign d;
    d.grid_side = grid_side;
    d.n_observed = n.value_or(50);
    d.range = range.value_or(1.0);
    d.sill = sill;
    d.nugget = nugget;
    d.noise_sd = noise_sd;
    d.n_time = n_time;
    d.time_end = time_end;
    d.num_basis = num_basis;
    d.seed = seed;
    return d;
  }
};

void run_simulate(const Common& common, const SimulateArgs& args) {
  const auto design = args.design(common.seed);
  stage("validation", [&] { design.validate(); });
  prepare_out(common);
  stage("simulation", [&] {
    const auto field = generate_coefficients(design, args.replicate);
    const auto observed = field.sites.subset(field.observed);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(field.observed.size()), design.num_basis);
    for (std::size_t r = 0; r < field.observed.size(); ++r)
      w.row(static_cast<Eigen::Index>(r)) = field.truth.row(static_cast<Eigen::Index>(field.observed[r]));
    const auto table = generate_longitudinal(w, observed, design, args.replicate);
    write_locations(common.path("locations.csv"), field.sites);
    write_longitudinal(common.path("observations.csv"), table);
    write_coefficients(common.path("truth.csv"),
                       FunctionalDataset(field.sites, design.basis(), field.truth));
    write_json(common.path("basis.json"), basis_to_json(design.basis()));
  });
}

// ---------------------------------------------------------------------------
// smooth / variogram

void run_smooth(const Common& common, const DataArgs& data_args, const BasisArgs& basis) {
  const auto data = load_data(data_args);
  prepare_out(common);
  const auto dataset = smooth_data(data, basis, common.jobs);
  stage("writing", [&] {
    write_coefficients(common.path("coefficients.csv"), dataset);
    write_json(common.path("basis.json"), basis_to_json(dataset.basis));
  });
}

void run_variogram(const Common& common, const DataArgs& data_args, const BasisArgs& basis,
                   const VariogramArgs& vario) {
  const auto data = load_data(data_args);
  prepare_out(common);
  const auto fitted = fit_pipeline(smooth_data(data, basis, common.jobs), vario);
  stage("writing", [&] {
    if (fitted.empirical) write_empirical_variogram(common.path("empirical_variogram.csv"), *fitted.empirical);
    write_json(common.path("variogram.json"), variogram_to_json(fitted.model));
  });
}

// ---------------------------------------------------------------------------
// krige

struct KrigeArgs {
  std::string target;
  std::vector<double> target_coords;
  bool sparse = false;
  std::optional<double> eta;
  double tau = 1.0;
  std::size_t grid_points = 101;
  double feas_tol = 1e-8;
  std::size_t max_outer = 200;
};

void run_krige(const Common& common, const DataArgs& data_args, const BasisArgs& basis,
               const VariogramArgs& vario, const GridArgs& grid_args, const KrigeArgs& args) {
  if (args.target.empty() == args.target_coords.empty())
    throw UsageError("exactly one of --target and --target-coords is required");
  auto data = load_data(data_args);

  std::vector<double> s0 = args.target_coords;
  std::optional<std::size_t> target_row;  // index of the target in the observed sites
  if (!args.target.empty()) {
    const auto idx = data.all_locations.index_of(args.target);
    if (!idx) throw UsageError("--target: unknown site '" + args.target + "'");
    const auto coords = data.all_locations.coords(*idx);
    s0.assign(coords.begin(), coords.end());
    target_row = data.locations.index_of(args.target);
  } else if (s0.size() != data.locations.dim()) {
    throw UsageError("--target-coords needs " + std::to_string(data.locations.dim()) + " values");
  }
  const bool use_sofk = args.sparse || args.eta.has_value();
  if (args.eta && *args.eta < 0.0) throw UsageError("--eta must be >= 0");
  if (args.tau <= 0.0) throw UsageError("--tau must be positive");
  const std::size_t n_fit = data.locations.size() - (target_row ? 1 : 0);
  if (args.sparse && !args.eta && n_fit < 3)
    throw UsageError("--sparse selects eta and tau by leave-one-out and needs at least 3 sites, got " +
                     std::to_string(n_fit));
  if (n_fit < 1) throw UsageError("no observed sites besides the target");
  const auto config = sofk_config(args.feas_tol, args.max_outer);
  prepare_out(common);

  auto full = smooth_data(data, basis, common.jobs);
  std::optional<Eigen::VectorXd> target_w;
  if (target_row) target_w = full.coefficient(*target_row);
  auto fitted = fit_pipeline(target_row ? full.without(*target_row) : full, vario);
  const auto& ds = fitted.dataset;

  auto system = stage("kriging system", [&] {
    return std::make_shared<const KrigingSystem>(build_system(fitted.model, ds.locations, s0));
  });
  const auto ofk = stage("ordinary kriging", [&] { return ofk_solve(*system); });

  json summary;
  summary["n_sites"] = ds.size();
  summary["target"] = args.target.empty() ? json(s0) : json(args.target);
  summary["variogram"] = variogram_to_json(fitted.model);
  summary["jitter"] = system->jitter();

  Eigen::VectorXd lambda = ofk.lambda;
  if (use_sofk) {
    double eta = args.eta.value_or(0.0), tau = args.tau;
    if (!args.eta) {
      const auto grid = stage("cv grid", [&] {
        auto g = grid_args.build();
        g.validate();
        return g;
      });
      const auto report =
          stage("cross-validation", [&] { return grid_select(ds, fitted.model, fitted.gram, grid, {config, common.jobs}); });
      eta = report.best_score().eta;
      tau = report.best_score().tau;
      stage("writing", [&] { write_cv_report(common.path("cv.csv"), report); });
      summary["cv_score"] = report.best_score().score;
    }
    const auto problem = SofkProblem::make(system, ofk, eta, tau);
    const auto solution = stage("sparse kriging", [&] { return augmented_lagrangian_solve(problem, config); });
    lambda = solution.lambda;
    summary["method"] = "sofk";
    summary["eta"] = eta;
    summary["tau"] = tau;
    summary["converged"] = solution.converged;
    summary["outer_iterations"] = solution.outer_iters;
    summary["inner_iterations"] = solution.inner_iters_total;
    summary["feasibility_residual"] = solution.raw_feasibility;
    summary["objective"] = sofk_objective(problem, lambda);
    summary["mu"] = solution.mu;
    stage("writing", [&] { write_sofk_diagnostics(common.path("diagnostics.csv"), solution); });
    if (!solution.converged) std::cerr << "warning: sparse kriging did not reach the feasibility tolerance\n";
  } else {
    summary["method"] = "ofk";
    summary["objective"] = kriging_objective(*system, lambda);
    summary["mu"] = ofk.mu;
    summary["feasibility_residual"] = std::abs(constraint_residual(lambda));
  }
  std::size_t support = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) support += lambda[i] != 0.0;
  summary["support_size"] = support;

  stage("writing", [&] {
    const auto ids = ds.locations.ids();
    const std::vector<double> lam(lambda.data(), lambda.data() + lambda.size());
    const std::vector<double> lam_ofk(ofk.lambda.data(), ofk.lambda.data() + ofk.lambda.size());
    write_weights(common.path("weights.csv"), ids, lam);
    write_weights(common.path("ofk_weights.csv"), ids, lam_ofk);
    const auto times = uniform_grid(ds.basis.t0(), ds.basis.t1(), args.grid_points);
    const auto pred = predict(lambda, ds, times);
    write_prediction(common.path("prediction.csv"), times,
                     std::vector<double>(pred.values.data(), pred.values.data() + pred.values.size()));
    if (target_w) {
      const auto truth = evaluate_function(ds.basis, *target_w, times);
      write_prediction(common.path("target_curve.csv"), times,
                       std::vector<double>(truth.data(), truth.data() + truth.size()));
      const Eigen::VectorXd diff = pred.coefficients - *target_w;
      summary["integrated_squared_error"] = diff.dot(fitted.gram * diff);
    }
    if (fitted.empirical) write_empirical_variogram(common.path("empirical_variogram.csv"), *fitted.empirical);
    write_json(common.path("summary.json"), summary);
  });
}

// ---------------------------------------------------------------------------
// cv-select

void run_cv(const Common& common, const DataArgs& data_args, const BasisArgs& basis, const VariogramArgs& vario,
            const GridArgs& grid_args, double feas_tol, std::size_t max_outer) {
  auto data = load_data(data_args);
  if (data.locations.size() < 3) throw UsageError("cross-validation needs at least 3 observed sites");
  const auto config = sofk_config(feas_tol, max_outer);
  const auto grid = stage("cv grid", [&] {
    auto g = grid_args.build();
    g.validate();
    return g;
  });
  prepare_out(common);
  const auto fitted = fit_pipeline(smooth_data(data, basis, common.jobs), vario);
  const auto report = stage("cross-validation", [&] {
    return grid_select(fitted.dataset, fitted.model, fitted.gram, grid, {config, common.jobs});
  });
  stage("writing", [&] {
    write_cv_report(common.path("cv.csv"), report);
    json sel;
    sel["eta"] = report.best_score().eta;
    sel["tau"] = report.best_score().tau;
    sel["cv_score"] = report.best_score().score;
    sel["variogram"] = variogram_to_json(fitted.model);
    write_json(common.path("selection.json"), sel);
  });
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  SimulateArgs design;
  std::vector<double> ranges{1.0, 5.0, 10.0};
  std::size_t replicates = 20;
  std::string family = "matern";
  double nu = 0.5;
  double feas_tol = 1e-8;
};

void run_experiment_cmd(const Common& common, const ExperimentArgs& args, const GridArgs& grid_args) {
  if (args.ranges.empty()) throw UsageError("--ranges is empty");
  ExperimentOptions options;
  options.grid = stage("cv grid", [&] {
    auto g = grid_args.build();
    g.validate();
    return g;
  });
  options.sofk = sofk_config(args.feas_tol, 200);
  options.family = stage("variogram", [&] { return parse_family(args.family); });
  options.nu = args.nu;
  options.jobs = common.jobs;
  options.keep_weights = true;
  std::vector<SimulationDesign> designs;
  for (double r : args.ranges) {
    auto d = args.design.design(common.seed);
    d.range = r;
    stage("validation", [&] { d.validate(); });
    designs.push_back(d);
  }
  prepare_out(common);

  std::vector<ReplicateResult> all;
  std::vector<ExperimentSummary> cells;
  for (const auto& d : designs) {
    auto results = stage("experiment", [&] { return run_experiment(d, args.replicates, options); });
    if (results.empty()) continue;
    cells.push_back(summarize(results));
    std::size_t unconverged = 0;
    for (const auto& r : results) unconverged += r.unconverged;
    if (unconverged > 0)
      std::cerr << "warning: range " << format_real(d.range) << ": " << unconverged
                << " sparse solves stopped before the feasibility tolerance\n";
    all.insert(all.end(), std::make_move_iterator(results.begin()), std::make_move_iterator(results.end()));
  }
  stage("writing", [&] {
    write_experiment(common.path("experiment.csv"), all);
    write_experiment_summary(common.path("summary.csv"), cells);
    write_weight_records(common.path("weights_long.csv"), all);
  });
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string weights_long;
  std::optional<double> range;
  std::string column = "sofk_lambda";
  std::string weights;
  std::string locations;
  std::string target;
  std::vector<double> target_coords;
  std::string observed_curve;
  std::string predicted_curve;
  std::size_t bins = 10;
  bool svg = false;
};

void run_report(const Common& common, const ReportArgs& args) {
  const bool long_mode = !args.weights_long.empty();
  const bool single_mode = !args.weights.empty();
  const bool curve_mode = !args.observed_curve.empty() || !args.predicted_curve.empty();
  if (long_mode && single_mode) throw UsageError("use either --weights-long or --weights, not both");
  if (!long_mode && !single_mode && !curve_mode)
    throw UsageError("nothing to report: give --weights-long, --weights or curve files");

  std::vector<DistanceWeight> weights;
  if (long_mode) {
    require_file(args.weights_long, "--weights-long");
    weights = stage("loading", [&] { return read_weight_records(args.weights_long, args.column, args.range); });
    if (weights.empty()) throw UsageError("--weights-long: no rows for the requested range");
  } else if (single_mode) {
    require_file(args.weights, "--weights");
    require_file(args.locations, "--locations");
    if (args.target.empty() == args.target_coords.empty())
      throw UsageError("exactly one of --target and --target-coords is required with --weights");
    weights = stage("loading", [&] {
      const auto locs = load_locations(args.locations);
      const auto w = read_weights(args.weights);
      std::vector<double> s0 = args.target_coords;
      if (!args.target.empty()) {
        const auto idx = locs.index_of(args.target);
        if (!idx) throw DataError("unknown target site '" + args.target + "'");
        s0.assign(locs.coords(*idx).begin(), locs.coords(*idx).end());
      } else if (s0.size() != locs.dim()) {
        throw DataError("--target-coords has the wrong dimension");
      }
      return weights_with_distances(w, locs, s0, args.target.empty() ? "target" : args.target);
    });
  }
  std::optional<CurveFile> observed, predicted;
  if (curve_mode) {
    require_file(args.observed_curve, "--observed-curve");
    require_file(args.predicted_curve, "--predicted-curve");
    observed = stage("loading", [&] { return read_prediction(args.observed_curve); });
    predicted = stage("loading", [&] { return read_prediction(args.predicted_curve); });
    if (observed->t != predicted->t) throw UsageError("curve files must share the same time grid");
  }
  prepare_out(common);

  stage("report", [&] {
    if (!weights.empty()) {
      const auto table = weight_distance_table(weights, args.bins);
      write_distance_table(common.path("weight_distance.csv"), table);
      const auto nearest = nearest_zero_summary(weights);
      json doc;
      doc["targets"] = [&] {
        std::vector<std::string> t;
        for (const auto& w : weights) t.push_back(w.target);
        std::sort(t.begin(), t.end());
        return static_cast<std::size_t>(std::unique(t.begin(), t.end()) - t.begin());
      }();
      doc["weights"] = weights.size();
      doc["nearest_count"] = nearest.count;
      doc["nearest_zero_count"] = nearest.zero_count;
      doc["nearest_zero_fraction"] = nearest.zero_fraction;
      write_json(common.path("nearest.json"), doc);
      if (args.svg) {
        write_boxplot_svg(common.path("weight_boxplot.svg"), table, "weights by distance");
        write_zero_histogram_svg(common.path("zero_histogram.svg"), table, "zero weights by distance");
      }
    }
    if (observed) {
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < observed->t.size(); ++i)
        rows.push_back({format_real(observed->t[i]), format_real(observed->values[i]),
                        format_real(predicted->values[i])});
      write_csv(common.path("curves.csv"), {"t", "observed", "predicted"}, rows);
      if (args.svg) write_curves_svg(common.path("curves.svg"), *observed, *predicted, "observed and predicted");
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinary and sparse functional kriging"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config; keys of [subcommand] sections set its options")
      ->check(CLI::ExistingFile);
  app.allow_config_extras(CLI::config_extras_mode::error);

  Common common;
  app.add_option("--seed", common.seed, "random seed");
  app.add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", common.out, "output directory");

  std::function<void()> action;

  // simulate
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate functional data on a square grid");
  simulate->add_option("--n", sim.n, "number of observed sites")->required();
  simulate->add_option("--range", sim.range, "range of the generating exponential model")->required();
  simulate->add_option("--replicate", sim.replicate, "replicate index (selects the random stream)");
  sim.add_design(simulate);
  simulate->callback([&] { action = [&] { run_simulate(common, sim); }; });

  // smooth
  DataArgs smooth_data_args;
  BasisArgs smooth_basis;
  auto* smooth_cmd = app.add_subcommand("smooth", "least-squares basis coefficients per site");
  smooth_data_args.add(smooth_cmd);
  smooth_basis.add(smooth_cmd);
  smooth_cmd->callback([&] { action = [&] { run_smooth(common, smooth_data_args, smooth_basis); }; });

  // variogram
  DataArgs vario_data_args;
  BasisArgs vario_basis;
  VariogramArgs vario_args;
  auto* vario_cmd = app.add_subcommand("variogram", "empirical trace-variogram and model fit");
  vario_data_args.add(vario_cmd);
  vario_basis.add(vario_cmd);
  vario_args.add(vario_cmd);
  vario_cmd->callback([&] { action = [&] { run_variogram(common, vario_data_args, vario_basis, vario_args); }; });

  // krige
  DataArgs krige_data_args;
  BasisArgs krige_basis;
  VariogramArgs krige_vario;
  GridArgs krige_grid;
  KrigeArgs krige_args;
  auto* krige = app.add_subcommand("krige", "predict the function at a target location");
  krige_data_args.add(krige);
  krige_basis.add(krige);
  krige_vario.add(krige);
  krige_grid.add(krige);
  krige->add_option("--target", krige_args.target, "target site id; its own data are left out");
  krige->add_option("--target-coords", krige_args.target_coords, "target coordinates, comma separated")
      ->delimiter(',');
  krige->add_flag("--sparse", krige_args.sparse, "sparse kriging with eta and tau chosen by leave-one-out");
  krige->add_option("--eta", krige_args.eta, "sparse kriging with this eta (no cross-validation)");
  krige->add_option("--tau", krige_args.tau, "adaptive weight exponent used with --eta");
  krige->add_option("--grid-points", krige_args.grid_points, "prediction time points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  krige->add_option("--feas-tol", krige_args.feas_tol, "feasibility tolerance of the sparse solver");
  krige->add_option("--max-outer", krige_args.max_outer, "outer iteration cap of the sparse solver");
  krige->callback(
      [&] { action = [&] { run_krige(common, krige_data_args, krige_basis, krige_vario, krige_grid, krige_args); }; });

  // cv-select
  DataArgs cv_data_args;
  BasisArgs cv_basis;
  VariogramArgs cv_vario;
  GridArgs cv_grid;
  double cv_feas_tol = 1e-8;
  std::size_t cv_max_outer = 200;
  auto* cv_cmd = app.add_subcommand("cv-select", "leave-one-out selection of eta and tau");
  cv_data_args.add(cv_cmd);
  cv_basis.add(cv_cmd);
  cv_vario.add(cv_cmd);
  cv_grid.add(cv_cmd);
  cv_cmd->add_option("--feas-tol", cv_feas_tol, "feasibility tolerance of the sparse solver");
  cv_cmd->add_option("--max-outer", cv_max_outer, "outer iteration cap of the sparse solver");
  cv_cmd->callback([&] {
    action = [&] { run_cv(common, cv_data_args, cv_basis, cv_vario, cv_grid, cv_feas_tol, cv_max_outer); };
  });

  // experiment
  ExperimentArgs exp_args;
  GridArgs exp_grid;
  auto* experiment = app.add_subcommand("experiment", "replicated simulation study, sparse vs ordinary kriging");
  experiment->add_option("--n", exp_args.design.n, "observed sites per replicate (default 50)");
  experiment->add_option("--ranges", exp_args.ranges, "generating ranges")->delimiter(',');
  experiment->add_option("--replicates", exp_args.replicates, "replicates per range");
  experiment->add_option("--family", exp_args.family, "fitted variogram family")
      ->check(CLI::IsMember({"exponential", "gaussian", "matern"}));
  experiment->add_option("--nu", exp_args.nu, "Matern smoothness of the fitted model");
  experiment->add_option("--feas-tol", exp_args.feas_tol, "feasibility tolerance of the sparse solver");
  exp_args.design.add_design(experiment);
  exp_grid.add(experiment);
  experiment->callback([&] { action = [&] { run_experiment_cmd(common, exp_args, exp_grid); }; });

  // report
  ReportArgs rep;
  auto* report = app.add_subcommand("report", "distance tables, zero fractions and curve summaries");
  report->add_option("--weights-long", rep.weights_long, "weights_long.csv from experiment");
  report->add_option("--range", rep.range, "keep only this design range");
  report->add_option("--column", rep.column, "sofk_lambda or ofk_lambda")
      ->check(CLI::IsMember({"sofk_lambda", "ofk_lambda"}));
  report->add_option("--weights", rep.weights, "weights.csv from krige");
  report->add_option("--locations", rep.locations, "locations used with --weights");
  report->add_option("--target", rep.target, "target site id used with --weights");
  report->add_option("--target-coords", rep.target_coords, "target coordinates used with --weights")
      ->delimiter(',');
  report->add_option("--observed-curve", rep.observed_curve, "t,value CSV of the observed curve");
  report->add_option("--predicted-curve", rep.predicted_curve, "t,value CSV of the predicted curve");
  report->add_option("--bins", rep.bins, "distance bins")->check(CLI::PositiveNumber);
  report->add_flag("--svg", rep.svg, "also render SVG figures");
  report->callback([&] { action = [&] { run_report(common, rep); }; });

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
