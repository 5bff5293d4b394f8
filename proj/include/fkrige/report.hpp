#pragma once

// Figure-ready summaries of kriging weights against distance to the
// prediction target, and of predicted versus observed curves.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkrige/io.hpp"

namespace fkrige {

/// One kriging weight of one prediction target.
struct DistanceWeight {
  std::string target;
  double distance = 0.0;
  double weight = 0.0;
};

struct DistanceBinStats {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::size_t zero_count = 0;
  double zero_fraction = 0.0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Equal-width distance bins between the smallest and largest distance;
/// empty bins are omitted. Quantiles use linear interpolation between order
/// statistics.
std::vector<DistanceBinStats> weight_distance_table(std::span<const DistanceWeight> weights,
                                                    std::size_t n_bins = 10);

/// Fraction of exact zeros among, for every target, the weights of its
/// nearest sites (distance ties included).
struct NearestSummary {
  std::size_t count = 0;
  std::size_t zero_count = 0;
  double zero_fraction = 0.0;
};
NearestSummary nearest_zero_summary(std::span<const DistanceWeight> weights);

/// Pairs a weights file with site locations and one target location.
std::vector<DistanceWeight> weights_with_distances(const WeightsFile& weights, const LocationSet& locations,
                                                   std::span<const double> target,
                                                   const std::string& target_id = "target");

/// Reads the long weight file written by the experiment command;
/// `column` is "sofk_lambda" or "ofk_lambda". With `range` set, only rows of
/// that design range are kept.
std::vector<DistanceWeight> read_weight_records(const std::filesystem::path& path,
                                                const std::string& column = "sofk_lambda",
                                                std::optional<double> range = std::nullopt);

/// `bin_lo,bin_hi,count,zero_count,zero_fraction,min,q1,median,q3,max`
void write_distance_table(const std::filesystem::path& path, std::span<const DistanceBinStats> bins);

void write_boxplot_svg(const std::filesystem::path& path, std::span<const DistanceBinStats> bins,
                       const std::string& title);
void write_zero_histogram_svg(const std::filesystem::path& path, std::span<const DistanceBinStats> bins,
                              const std::string& title);
/// Solid observed curve, dashed prediction.
void write_curves_svg(const std::filesystem::path& path, const CurveFile& observed,
                      const CurveFile& predicted, const std::string& title);

}  // namespace fkrige
