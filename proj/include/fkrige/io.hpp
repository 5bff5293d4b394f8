#pragma once

// Site locations, long-format longitudinal observations, and the CSV
// formats used to exchange them. Site order as loaded is the canonical
// index order for every downstream vector and matrix.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fkrige {

struct Site {
  std::string id;
  std::vector<double> coords;
};

class LocationSet {
 public:
  LocationSet() = default;
  /// Validates distinct ids, a common dimension d >= 1, finite and
  /// pairwise-distinct coordinates. Throws DataError otherwise.
  explicit LocationSet(std::vector<Site> sites);

  std::size_t size() const { return sites_.size(); }
  std::size_t dim() const { return sites_.empty() ? 0 : sites_.front().coords.size(); }
  bool empty() const { return sites_.empty(); }

  const Site& operator[](std::size_t i) const { return sites_[i]; }
  std::span<const Site> sites() const { return sites_; }
  std::span<const double> coords(std::size_t i) const { return sites_[i].coords; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::vector<std::string> ids() const;

  /// Sites at the given indices, in the given order.
  LocationSet subset(std::span<const std::size_t> indices) const;
  LocationSet without(std::size_t index) const;

 private:
  std::vector<Site> sites_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Euclidean distance between two coordinate vectors of equal length.
double distance(std::span<const double> a, std::span<const double> b);

struct Observation {
  std::string site_id;
  double t = 0.0;
  double value = 0.0;
};

/// Observations of one site, sorted by time.
struct SiteSeries {
  std::vector<double> t;
  std::vector<double> x;
};

class LongitudinalTable {
 public:
  LongitudinalTable() = default;
  /// Groups rows by site following the LocationSet order. Unknown site ids,
  /// repeated (site, t) pairs and non-finite values raise DataError.
  LongitudinalTable(const LocationSet& locations, std::span<const Observation> rows);

  std::size_t num_sites() const { return series_.size(); }
  std::size_t num_rows() const { return num_rows_; }
  const SiteSeries& series(std::size_t site) const { return series_.at(site); }
  const std::vector<std::string>& site_ids() const { return site_ids_; }
  std::pair<double, double> time_range() const;

  /// Restricts the table to the given site indices (order preserved).
  LongitudinalTable subset(std::span<const std::size_t> indices) const;

  /// Non-fatal findings from loading, e.g. sites with too few rows.
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::vector<std::string> site_ids_;
  std::vector<SiteSeries> series_;
  std::size_t num_rows_ = 0;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// CSV plumbing

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a comma-separated file with a header line. Blank lines are skipped;
/// every row must have as many fields as the header.
CsvTable read_csv(const std::filesystem::path& path);

/// Strict decimal parse of a finite double; `context` is used in the error.
double parse_real(std::string_view text, std::string_view context);

/// Shortest representation that round-trips exactly.
std::string format_real(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// ---------------------------------------------------------------------------
// Loaders and writers

/// `site_id,x1[,x2,...]`
LocationSet load_locations(const std::filesystem::path& path);

/// `site_id,t,value`. Sites with fewer than `min_rows` observations only
/// produce a warning; smoothing reports the hard failure.
LongitudinalTable load_longitudinal(const std::filesystem::path& path,
                                    const LocationSet& locations, std::size_t min_rows = 0);

void write_locations(const std::filesystem::path& path, const LocationSet& locations);
void write_longitudinal(const std::filesystem::path& path, const LongitudinalTable& table);

/// `site_id,lambda`
void write_weights(const std::filesystem::path& path, std::span<const std::string> site_ids,
                   std::span<const double> weights);

/// `t,value`
void write_prediction(const std::filesystem::path& path, std::span<const double> times,
                      std::span<const double> values);

struct WeightsFile {
  std::vector<std::string> site_ids;
  std::vector<double> weights;
};
WeightsFile read_weights(const std::filesystem::path& path);

struct CurveFile {
  std::vector<double> t;
  std::vector<double> values;
};
CurveFile read_prediction(const std::filesystem::path& path);

}  // namespace fkrige
