#include "fkrige/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fkrige/error.hpp"

namespace fkrige {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& expected,
                   const std::filesystem::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw DataError(path.string() + ": expected header '" + want + "'");
  }
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

// ---------------------------------------------------------------------------

LocationSet::LocationSet(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) return;
  const std::size_t d = sites_.front().coords.size();
  if (d == 0) throw DataError("locations need at least one coordinate");
  std::set<std::vector<double>> seen_coords;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const auto& site = sites_[i];
    if (site.id.empty()) throw DataError("empty site id at position " + std::to_string(i));
    if (site.coords.size() != d)
      throw DataError("site '" + site.id + "' has " + std::to_string(site.coords.size()) +
                      " coordinates, expected " + std::to_string(d));
    for (double c : site.coords)
      if (!std::isfinite(c)) throw DataError("site '" + site.id + "' has a non-finite coordinate");
    if (!index_.emplace(site.id, i).second) throw DataError("duplicate site id '" + site.id + "'");
    if (!seen_coords.insert(site.coords).second)
      throw DataError("site '" + site.id + "' duplicates the coordinates of another site");
  }
}

std::optional<std::size_t> LocationSet::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> LocationSet::ids() const {
  std::vector<std::string> out;
  out.reserve(sites_.size());
  for (const auto& s : sites_) out.push_back(s.id);
  return out;
}

LocationSet LocationSet::subset(std::span<const std::size_t> indices) const {
  std::vector<Site> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    require(i < sites_.size(), "LocationSet::subset: index out of range");
    out.push_back(sites_[i]);
  }
  return LocationSet(std::move(out));
}

LocationSet LocationSet::without(std::size_t index) const {
  require(index < sites_.size(), "LocationSet::without: index out of range");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < sites_.size(); ++i)
    if (i != index) keep.push_back(i);
  return subset(keep);
}

double distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

LongitudinalTable::LongitudinalTable(const LocationSet& locations,
                                     std::span<const Observation> rows)
    : site_ids_(locations.ids()), series_(locations.size()), num_rows_(rows.size()) {
  std::vector<std::vector<std::pair<double, double>>> grouped(locations.size());
  for (const auto& row : rows) {
    const auto idx = locations.index_of(row.site_id);
    if (!idx) throw DataError("observation references unknown site '" + row.site_id + "'");
    if (!std::isfinite(row.t) || !std::isfinite(row.value))
      throw DataError("non-finite observation at site '" + row.site_id + "'");
    grouped[*idx].emplace_back(row.t, row.value);
  }
  for (std::size_t i = 0; i < grouped.size(); ++i) {
    auto& g = grouped[i];
    std::stable_sort(g.begin(), g.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t j = 1; j < g.size(); ++j)
      if (g[j].first == g[j - 1].first)
        throw DataError("site '" + site_ids_[i] + "' has repeated time " + format_real(g[j].first));
    series_[i].t.reserve(g.size());
    series_[i].x.reserve(g.size());
    for (const auto& [t, x] : g) {
      series_[i].t.push_back(t);
      series_[i].x.push_back(x);
    }
  }
}

std::pair<double, double> LongitudinalTable::time_range() const {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series_) {
    if (s.t.empty()) continue;
    lo = std::min(lo, s.t.front());
    hi = std::max(hi, s.t.back());
  }
  return {lo, hi};
}

LongitudinalTable LongitudinalTable::subset(std::span<const std::size_t> indices) const {
  LongitudinalTable out;
  for (auto i : indices) {
    require(i < series_.size(), "LongitudinalTable::subset: index out of range");
    out.site_ids_.push_back(site_ids_[i]);
    out.series_.push_back(series_[i]);
    out.num_rows_ += series_[i].t.size();
  }
  return out;
}

// ---------------------------------------------------------------------------

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(where(path, line_no) + ": expected " + std::to_string(table.header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (!have_header) throw DataError(path.string() + ": empty file");
  return table;
}

double parse_real(std::string_view text, std::string_view context) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw DataError(std::string(context) + ": not a finite decimal number: '" +
                    std::string(text) + "'");
  return value;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out << ',';
      out << fields[k];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------

LocationSet load_locations(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "site_id")
    throw DataError(path.string() + ": expected header 'site_id,x1[,x2,...]'");
  for (std::size_t k = 1; k < table.header.size(); ++k)
    if (table.header[k] != "x" + std::to_string(k))
      throw DataError(path.string() + ": coordinate column " + std::to_string(k) +
                      " must be named x" + std::to_string(k));
  if (table.rows.empty()) throw DataError(path.string() + ": no sites");

  std::vector<Site> sites;
  sites.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto ctx = where(path, table.line_numbers[r]);
    Site site{row[0], {}};
    for (std::size_t k = 1; k < row.size(); ++k) site.coords.push_back(parse_real(row[k], ctx));
    sites.push_back(std::move(site));
  }
  return LocationSet(std::move(sites));
}

LongitudinalTable load_longitudinal(const std::filesystem::path& path,
                                    const LocationSet& locations, std::size_t min_rows) {
  const auto table = read_csv(path);
  expect_header(table, {"site_id", "t", "value"}, path);
  if (table.rows.empty()) throw DataError(path.string() + ": no observations");

  std::vector<Observation> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto ctx = where(path, table.line_numbers[r]);
    rows.push_back({row[0], parse_real(row[1], ctx), parse_real(row[2], ctx)});
  }
  LongitudinalTable out(locations, rows);
  for (std::size_t i = 0; i < out.num_sites(); ++i) {
    const auto count = out.series(i).t.size();
    if (count < min_rows)
      out.add_warning("site '" + out.site_ids()[i] + "' has " + std::to_string(count) +
                      " observations, fewer than " + std::to_string(min_rows));
  }
  return out;
}

void write_locations(const std::filesystem::path& path, const LocationSet& locations) {
  std::vector<std::string> header{"site_id"};
  for (std::size_t k = 0; k < locations.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : locations.sites()) {
    std::vector<std::string> row{s.id};
    for (double c : s.coords) row.push_back(format_real(c));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_longitudinal(const std::filesystem::path& path, const LongitudinalTable& table) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(table.num_rows());
  for (std::size_t i = 0; i < table.num_sites(); ++i) {
    const auto& s = table.series(i);
    for (std::size_t j = 0; j < s.t.size(); ++j)
      rows.push_back({table.site_ids()[i], format_real(s.t[j]), format_real(s.x[j])});
  }
  write_csv(path, {"site_id", "t", "value"}, rows);
}

void write_weights(const std::filesystem::path& path, std::span<const std::string> site_ids,
                   std::span<const double> weights) {
  require(site_ids.size() == weights.size(), "write_weights: site_ids and weights differ in length");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    rows.push_back({site_ids[i], format_real(weights[i])});
  write_csv(path, {"site_id", "lambda"}, rows);
}

void write_prediction(const std::filesystem::path& path, std::span<const double> times,
                      std::span<const double> values) {
  require(times.size() == values.size(), "write_prediction: times and values differ in length");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    rows.push_back({format_real(times[i]), format_real(values[i])});
  write_csv(path, {"t", "value"}, rows);
}

WeightsFile read_weights(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  expect_header(table, {"site_id", "lambda"}, path);
  WeightsFile out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.site_ids.push_back(table.rows[r][0]);
    out.weights.push_back(parse_real(table.rows[r][1], where(path, table.line_numbers[r])));
  }
  return out;
}

CurveFile read_prediction(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  expect_header(table, {"t", "value"}, path);
  CurveFile out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto ctx = where(path, table.line_numbers[r]);
    out.t.push_back(parse_real(table.rows[r][0], ctx));
    out.values.push_back(parse_real(table.rows[r][1], ctx));
  }
  return out;
}

}  // namespace fkrige
