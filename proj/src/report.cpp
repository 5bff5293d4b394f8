#include "fkrige/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fkrige/error.hpp"
#include "fkrige/svg.hpp"

namespace fkrige {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<DistanceBinStats> weight_distance_table(std::span<const DistanceWeight> weights,
                                                    std::size_t n_bins) {
  require(n_bins >= 1, "weight_distance_table: n_bins must be positive");
  if (weights.empty()) return {};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& w : weights) {
    lo = std::min(lo, w.distance);
    hi = std::max(hi, w.distance);
  }
  if (hi == lo) n_bins = 1;
  const double width = (hi - lo) / static_cast<double>(n_bins);

  std::vector<std::vector<double>> members(n_bins);
  for (const auto& w : weights) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(n_bins - 1, static_cast<std::size_t>((w.distance - lo) / width));
    members[b].push_back(w.weight);
  }

  std::vector<DistanceBinStats> out;
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& m = members[b];
    if (m.empty()) continue;
    std::sort(m.begin(), m.end());
    DistanceBinStats s;
    s.lo = lo + width * static_cast<double>(b);
    s.hi = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
    s.count = m.size();
    s.zero_count = static_cast<std::size_t>(std::count(m.begin(), m.end(), 0.0));
    s.zero_fraction = static_cast<double>(s.zero_count) / static_cast<double>(s.count);
    s.min = m.front();
    s.q1 = quantile_sorted(m, 0.25);
    s.median = quantile_sorted(m, 0.5);
    s.q3 = quantile_sorted(m, 0.75);
    s.max = m.back();
    out.push_back(s);
  }
  return out;
}

NearestSummary nearest_zero_summary(std::span<const DistanceWeight> weights) {
  std::map<std::string, double> nearest;
  for (const auto& w : weights) {
    auto [it, inserted] = nearest.emplace(w.target, w.distance);
    if (!inserted) it->second = std::min(it->second, w.distance);
  }
  NearestSummary s;
  for (const auto& w : weights) {
    if (w.distance > nearest.at(w.target) * (1.0 + 1e-9)) continue;
    ++s.count;
    if (w.weight == 0.0) ++s.zero_count;
  }
  if (s.count > 0) s.zero_fraction = static_cast<double>(s.zero_count) / static_cast<double>(s.count);
  return s;
}

std::vector<DistanceWeight> weights_with_distances(const WeightsFile& weights, const LocationSet& locations,
                                                   std::span<const double> target,
                                                   const std::string& target_id) {
  std::vector<DistanceWeight> out;
  for (std::size_t i = 0; i < weights.site_ids.size(); ++i) {
    const auto idx = locations.index_of(weights.site_ids[i]);
    if (!idx) throw DataError("weights reference unknown site '" + weights.site_ids[i] + "'");
    out.push_back({target_id, distance(locations.coords(*idx), target), weights.weights[i]});
  }
  return out;
}

std::vector<DistanceWeight> read_weight_records(const std::filesystem::path& path, const std::string& column,
                                                std::optional<double> range) {
  require(column == "sofk_lambda" || column == "ofk_lambda", "read_weight_records: unknown column " + column);
  const auto table = read_csv(path);
  const std::vector<std::string> expected{"n",       "range",    "replicate",   "target_id",
                                          "site_id", "distance", "sofk_lambda", "ofk_lambda"};
  if (table.header != expected) throw DataError(path.string() + ": not an experiment weight file");
  const std::size_t col = column == "ofk_lambda" ? 7 : 6;
  std::vector<DistanceWeight> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (range && parse_real(row[1], path.string()) != *range) continue;
    out.push_back({row[0] + "/" + row[1] + "/" + row[2] + "/" + row[3], parse_real(row[5], path.string()),
                   parse_real(row[col], path.string())});
  }
  return out;
}

void write_distance_table(const std::filesystem::path& path, std::span<const DistanceBinStats> bins) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : bins)
    rows.push_back({format_real(b.lo), format_real(b.hi), std::to_string(b.count), std::to_string(b.zero_count),
                    format_real(b.zero_fraction), format_real(b.min), format_real(b.q1), format_real(b.median),
                    format_real(b.q3), format_real(b.max)});
  write_csv(path, {"bin_lo", "bin_hi", "count", "zero_count", "zero_fraction", "min", "q1", "median", "q3", "max"},
            rows);
}

void write_boxplot_svg(const std::filesystem::path& path, std::span<const DistanceBinStats> bins,
                       const std::string& title) {
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& b : bins) {
    y_lo = std::min(y_lo, b.min);
    y_hi = std::max(y_hi, b.max);
  }
  const double x_hi = bins.empty() ? 1.0 : bins.back().hi;
  const double x_lo = bins.empty() ? 0.0 : bins.front().lo;
  const double pad = 0.05 * std::max(x_hi - x_lo, 1e-12);
  SvgPlot plot(x_lo - pad, x_hi + pad, y_lo, y_hi);
  plot.title(title);
  plot.x_label("distance to target");
  plot.y_label("weight");
  plot.line(x_lo - pad, 0.0, x_hi + pad, 0.0, "#bbbbbb");
  for (const auto& b : bins) {
    const double mid = 0.5 * (b.lo + b.hi);
    const double half = std::max(0.35 * (b.hi - b.lo), 0.3 * pad);
    plot.line(mid, b.min, mid, b.q1, "black");
    plot.line(mid, b.q3, mid, b.max, "black");
    plot.rect(mid - half, b.q1, mid + half, b.q3, "#d9d9d9", "black");
    plot.line(mid - half, b.median, mid + half, b.median, "black", 2.0);
  }
  plot.write(path);
}

void write_zero_histogram_svg(const std::filesystem::path& path, std::span<const DistanceBinStats> bins,
                              const std::string& title) {
  double top = 1.0;
  for (const auto& b : bins) top = std::max(top, static_cast<double>(b.count));
  const double x_lo = bins.empty() ? 0.0 : bins.front().lo;
  const double x_hi = bins.empty() ? 1.0 : bins.back().hi;
  const double pad = 0.05 * std::max(x_hi - x_lo, 1e-12);
  SvgPlot plot(x_lo - pad, x_hi + pad, 0.0, top);
  plot.title(title);
  plot.x_label("distance to target");
  plot.y_label("count (dark: zero weights)");
  for (const auto& b : bins) {
    const double l = b.lo, r = std::max(b.hi, b.lo + pad);
    const auto zeros = static_cast<double>(b.zero_count);
    plot.rect(l, 0.0, r, zeros, "#404040", "white");
    plot.rect(l, zeros, r, static_cast<double>(b.count), "#c8c8c8", "white");
  }
  plot.write(path);
}

void write_curves_svg(const std::filesystem::path& path, const CurveFile& observed, const CurveFile& predicted,
                      const std::string& title) {
  double t_lo = std::numeric_limits<double>::infinity(), t_hi = -t_lo, y_lo = t_lo, y_hi = -t_lo;
  for (const auto* c : {&observed, &predicted}) {
    for (std::size_t i = 0; i < c->t.size(); ++i) {
      t_lo = std::min(t_lo, c->t[i]);
      t_hi = std::max(t_hi, c->t[i]);
      y_lo = std::min(y_lo, c->values[i]);
      y_hi = std::max(y_hi, c->values[i]);
    }
  }
  if (!std::isfinite(t_lo)) t_lo = 0.0, t_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  SvgPlot plot(t_lo, t_hi, y_lo, y_hi);
  plot.title(title);
  plot.x_label("t");
  plot.y_label("value");
  plot.polyline(observed.t, observed.values, "black");
  plot.polyline(predicted.t, predicted.values, "#1f5fbf", 1.5, true);
  plot.write(path);
}

}  // namespace fkrige
