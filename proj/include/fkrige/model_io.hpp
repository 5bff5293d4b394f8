#pragma once

// Serialization of fitted artifacts: basis and variogram JSON documents and
// the CSV reports written by the pipeline.

#include <filesystem>
#include <span>

#include <json.hpp>

#include "fkrige/basis.hpp"
#include "fkrige/cv.hpp"
#include "fkrige/simgen.hpp"
#include "fkrige/sofk.hpp"
#include "fkrige/variogram.hpp"

namespace fkrige {

inline constexpr int kSchemaVersion = 1;

nlohmann::json basis_to_json(const BasisDescriptor& basis);
/// Throws DataError on a malformed document or unsupported schema_version.
BasisDescriptor basis_from_json(const nlohmann::json& doc);

nlohmann::json variogram_to_json(const VariogramModel& model);
VariogramModel variogram_from_json(const nlohmann::json& doc);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// `site_id,w1,...,wM`
void write_coefficients(const std::filesystem::path& path, const FunctionalDataset& dataset);
/// Reads coefficients for the given locations; rows are matched by site id.
Eigen::MatrixXd read_coefficients(const std::filesystem::path& path, const LocationSet& locations,
                                  int num_basis);

/// `r,gamma,count`
void write_empirical_variogram(const std::filesystem::path& path, const EmpiricalTraceVariogram& emp);

/// `k,f,abs_g,rho,mu,inner_iters`
void write_sofk_diagnostics(const std::filesystem::path& path, const SofkSolution& solution);

/// `eta,tau,cv_score`
void write_cv_report(const std::filesystem::path& path, const CvReport& report);

/// `replicate,n,range,sofk_mse,ofk_mse,nonzero_mean`
void write_experiment(const std::filesystem::path& path, std::span<const ReplicateResult> results);

/// One row per (n, range) cell: means and standard deviations.
void write_experiment_summary(const std::filesystem::path& path,
                              std::span<const ExperimentSummary> cells);

/// `n,range,replicate,target_id,site_id,distance,sofk_lambda,ofk_lambda`
void write_weight_records(const std::filesystem::path& path, std::span<const ReplicateResult> results);

}  // namespace fkrige
