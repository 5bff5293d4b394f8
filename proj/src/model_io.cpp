#include "fkrige/model_io.hpp"

#include <fstream>

#include "fkrige/error.hpp"

namespace fkrige {

using nlohmann::json;

namespace {

void check_schema(const json& doc, const char* what) {
  if (!doc.is_object()) throw DataError(std::string(what) + ": expected a JSON object");
  if (!doc.contains("schema_version") || doc.at("schema_version") != kSchemaVersion)
    throw DataError(std::string(what) + ": missing or unsupported schema_version");
}

}  // namespace

json basis_to_json(const BasisDescriptor& basis) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["M"] = basis.size();
  doc["domain"] = {basis.t0(), basis.t1()};
  if (basis.kind() == BasisKind::bspline) {
    doc["kind"] = "bspline";
    doc["order"] = basis.order();
    doc["knots"] = basis.breakpoints();
  } else {
    doc["kind"] = "fourier";
    doc["period"] = basis.period();
  }
  return doc;
}

BasisDescriptor basis_from_json(const json& doc) {
  check_schema(doc, "basis");
  try {
    const auto kind = doc.at("kind").get<std::string>();
    const int m = doc.at("M").get<int>();
    const auto domain = doc.at("domain").get<std::vector<double>>();
    if (domain.size() != 2) throw DataError("basis: domain must be [T0, T1]");
    if (kind == "bspline") {
      const int order = doc.value("order", 4);
      BasisDescriptor basis =
          doc.contains("knots")
              ? BasisDescriptor::bspline_with_breakpoints(doc.at("knots").get<std::vector<double>>(), order)
              : BasisDescriptor::bspline(m, domain[0], domain[1], order);
      if (basis.size() != m || basis.t0() != domain[0] || basis.t1() != domain[1])
        throw DataError("basis: knots are inconsistent with M or domain");
      return basis;
    }
    if (kind == "fourier")
      return BasisDescriptor::fourier(m, domain[0], domain[1], doc.value("period", 0.0));
    throw DataError("basis: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("basis: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("basis: ") + e.what());
  }
}

json variogram_to_json(const VariogramModel& model) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["family"] = to_string(model.family);
  doc["nugget"] = model.nugget;
  doc["psill"] = model.psill;
  doc["range"] = model.range;
  if (model.family == VariogramFamily::matern) doc["nu"] = model.nu;
  return doc;
}

VariogramModel variogram_from_json(const json& doc) {
  check_schema(doc, "variogram");
  try {
    VariogramModel m;
    m.family = parse_family(doc.at("family").get<std::string>());
    m.nugget = doc.at("nugget").get<double>();
    m.psill = doc.at("psill").get<double>();
    m.range = doc.at("range").get<double>();
    m.nu = doc.value("nu", 0.5);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("variogram: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("variogram: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_coefficients(const std::filesystem::path& path, const FunctionalDataset& dataset) {
  std::vector<std::string> header{"site_id"};
  for (int m = 0; m < dataset.basis.size(); ++m) header.push_back("w" + std::to_string(m + 1));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::vector<std::string> row{dataset.locations[i].id};
    for (int m = 0; m < dataset.basis.size(); ++m)
      row.push_back(format_real(dataset.coefficients(static_cast<Eigen::Index>(i), m)));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

Eigen::MatrixXd read_coefficients(const std::filesystem::path& path, const LocationSet& locations,
                                  int num_basis) {
  const auto table = read_csv(path);
  if (table.header.size() != static_cast<std::size_t>(num_basis) + 1 || table.header[0] != "site_id")
    throw DataError(path.string() + ": expected header site_id,w1..w" + std::to_string(num_basis));
  Eigen::MatrixXd w(static_cast<Eigen::Index>(locations.size()), num_basis);
  std::vector<char> seen(locations.size(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto idx = locations.index_of(table.rows[r][0]);
    if (!idx) throw DataError(path.string() + ": unknown site '" + table.rows[r][0] + "'");
    if (seen[*idx]) throw DataError(path.string() + ": duplicate site '" + table.rows[r][0] + "'");
    seen[*idx] = 1;
    for (int m = 0; m < num_basis; ++m)
      w(static_cast<Eigen::Index>(*idx), m) = parse_real(table.rows[r][m + 1], path.string());
  }
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (!seen[i]) throw DataError(path.string() + ": no coefficients for site '" + locations[i].id + "'");
  return w;
}

void write_empirical_variogram(const std::filesystem::path& path, const EmpiricalTraceVariogram& emp) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : emp.bins)
    rows.push_back({format_real(b.center), format_real(b.gamma), std::to_string(b.pair_count)});
  write_csv(path, {"r", "gamma", "count"}, rows);
}

void write_sofk_diagnostics(const std::filesystem::path& path, const SofkSolution& solution) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& it : solution.history)
    rows.push_back({std::to_string(it.k), format_real(it.f), format_real(it.abs_g),
                    format_real(it.rho), format_real(it.mu), std::to_string(it.inner_iters)});
  write_csv(path, {"k", "f", "abs_g", "rho", "mu", "inner_iters"}, rows);
}

void write_cv_report(const std::filesystem::path& path, const CvReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : report.scores)
    rows.push_back({format_real(s.eta), format_real(s.tau), format_real(s.score)});
  write_csv(path, {"eta", "tau", "cv_score"}, rows);
}

void write_experiment(const std::filesystem::path& path, std::span<const ReplicateResult> results) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results)
    rows.push_back({std::to_string(r.replicate), std::to_string(r.n), format_real(r.range),
                    format_real(r.sofk_mse), format_real(r.ofk_mse), format_real(r.nonzero_mean)});
  write_csv(path, {"replicate", "n", "range", "sofk_mse", "ofk_mse", "nonzero_mean"}, rows);
}

void write_experiment_summary(const std::filesystem::path& path,
                              std::span<const ExperimentSummary> cells) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : cells)
    rows.push_back({std::to_string(c.n), format_real(c.range), std::to_string(c.replicates),
                    format_real(c.sofk_mse.mean), format_real(c.sofk_mse.sd),
                    format_real(c.ofk_mse.mean), format_real(c.ofk_mse.sd),
                    format_real(c.nonzero.mean), format_real(c.nonzero.sd)});
  write_csv(path,
            {"n", "range", "replicates", "sofk_mse_mean", "sofk_mse_sd", "ofk_mse_mean", "ofk_mse_sd",
             "nonzero_mean", "nonzero_sd"},
            rows);
}

void write_weight_records(const std::filesystem::path& path, std::span<const ReplicateResult> results) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results)
    for (const auto& w : r.weights)
      rows.push_back({std::to_string(r.n), format_real(r.range), std::to_string(w.replicate), w.target_id,
                      w.site_id, format_real(w.distance), format_real(w.sofk), format_real(w.ofk)});
  write_csv(path, {"n", "range", "replicate", "target_id", "site_id", "distance", "sofk_lambda", "ofk_lambda"},
            rows);
}

}  // namespace fkrige
