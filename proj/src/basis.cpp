#include "fkrige/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <gsl/gsl_integration.h>

#include "fkrige/error.hpp"
#include "fkrige/parallel.hpp"

namespace fkrige {

namespace {

// Fixed-order Gauss-Legendre rule mapped onto [a, b].
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t points) : table_(gsl_integration_glfixed_table_alloc(points)) {
    if (!table_) throw Error("gsl_integration_glfixed_table_alloc failed");
  }
  ~GaussLegendre() { gsl_integration_glfixed_table_free(table_); }
  GaussLegendre(const GaussLegendre&) = delete;
  GaussLegendre& operator=(const GaussLegendre&) = delete;

  std::size_t size() const { return table_->n; }
  std::pair<double, double> point(double a, double b, std::size_t i) const {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(a, b, i, &x, &w, table_);
    return {x, w};
  }

 private:
  gsl_integration_glfixed_table* table_;
};

}  // namespace

BasisDescriptor BasisDescriptor::bspline(int num_basis, double t0, double t1, int order) {
  require(order >= 1, "bspline: order must be >= 1");
  require(num_basis >= order, "bspline: need at least `order` basis functions");
  require(t0 < t1, "bspline: empty domain");
  const int pieces = num_basis - order + 1;
  std::vector<double> breaks(pieces + 1);
  for (int i = 0; i <= pieces; ++i) breaks[i] = t0 + (t1 - t0) * i / pieces;
  breaks.back() = t1;
  return bspline_with_breakpoints(std::move(breaks), order);
}

BasisDescriptor BasisDescriptor::bspline_with_breakpoints(std::vector<double> breakpoints,
                                                          int order) {
  require(order >= 1, "bspline: order must be >= 1");
  require(breakpoints.size() >= 2, "bspline: need at least two breakpoints");
  require(std::is_sorted(breakpoints.begin(), breakpoints.end()),
          "bspline: knot vector must be nondecreasing");
  require(breakpoints.front() < breakpoints.back(), "bspline: empty domain");
  for (double b : breakpoints) require(std::isfinite(b), "bspline: non-finite knot");

  BasisDescriptor d;
  d.kind_ = BasisKind::bspline;
  d.order_ = order;
  d.t0_ = breakpoints.front();
  d.t1_ = breakpoints.back();
  d.num_basis_ = static_cast<int>(breakpoints.size()) - 2 + order;
  d.knots_.assign(order, d.t0_);
  d.knots_.insert(d.knots_.end(), breakpoints.begin() + 1, breakpoints.end() - 1);
  d.knots_.insert(d.knots_.end(), order, d.t1_);
  d.breakpoints_ = std::move(breakpoints);
  return d;
}

BasisDescriptor BasisDescriptor::fourier(int num_basis, double t0, double t1, double period) {
  require(num_basis >= 1 && num_basis % 2 == 1, "fourier: number of basis functions must be odd");
  require(t0 < t1, "fourier: empty domain");
  if (period == 0.0) period = t1 - t0;
  require(period > 0.0 && std::isfinite(period), "fourier: period must be positive");
  BasisDescriptor d;
  d.kind_ = BasisKind::fourier;
  d.num_basis_ = num_basis;
  d.t0_ = t0;
  d.t1_ = t1;
  d.period_ = period;
  return d;
}

// Cox-de Boor recurrence for the `order` nonzero functions on the span
// containing t, written straight into the full output vector.
void BasisDescriptor::evaluate_bspline(double t, double* out) const {
  const int k = order_;
  // Span index: knots_[span] <= t < knots_[span+1], clamped at t1.
  auto it = std::upper_bound(knots_.begin() + k - 1, knots_.end() - k, t);
  int span = static_cast<int>(it - knots_.begin()) - 1;
  span = std::min(span, num_basis_ - 1);
  while (span > k - 1 && knots_[span] == knots_[span + 1]) --span;

  double local[32];
  double left[32], right[32];
  require(k <= 32, "bspline: order above 32 not supported");
  local[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    left[j] = t - knots_[span + 1 - j];
    right[j] = knots_[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = local[r] / (right[r + 1] + left[j - r]);
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }
  std::fill(out, out + num_basis_, 0.0);
  for (int r = 0; r < k; ++r) out[span - k + 1 + r] = local[r];
}

Eigen::VectorXd BasisDescriptor::evaluate(double t) const {
  if (!contains(t))
    throw DomainError("basis evaluated at t=" + format_real(t) + " outside [" + format_real(t0_) +
                      ", " + format_real(t1_) + "]");
  Eigen::VectorXd v(num_basis_);
  if (kind_ == BasisKind::bspline) {
    evaluate_bspline(t, v.data());
    return v;
  }
  const double scale = std::sqrt(2.0 / period_);
  v[0] = 1.0 / std::sqrt(period_);
  for (int j = 1; 2 * j - 1 < num_basis_; ++j) {
    const double arg = 2.0 * std::numbers::pi * j * t / period_;
    v[2 * j - 1] = scale * std::sin(arg);
    v[2 * j] = scale * std::cos(arg);
  }
  return v;
}

Eigen::MatrixXd BasisDescriptor::design_matrix(std::span<const double> times) const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(times.size()), num_basis_);
  for (std::size_t j = 0; j < times.size(); ++j) X.row(j) = evaluate(times[j]).transpose();
  return X;
}

Eigen::MatrixXd gram_matrix(const BasisDescriptor& basis) {
  const int m = basis.size();
  if (basis.kind() == BasisKind::fourier &&
      std::abs(basis.period() - (basis.t1() - basis.t0())) <= 1e-12 * basis.period())
    return Eigen::MatrixXd::Identity(m, m);

  // Piecewise polynomial integrand of degree 2(k-1): k Gauss points per knot
  // span integrate it exactly. Fourier on a non-matching period falls back
  // to a composite rule over many panels.
  std::vector<double> panels;
  std::size_t points = 0;
  if (basis.kind() == BasisKind::bspline) {
    panels = basis.breakpoints();
    points = static_cast<std::size_t>(basis.order());
  } else {
    const std::size_t count = 64 + 8 * static_cast<std::size_t>(m);
    panels = uniform_grid(basis.t0(), basis.t1(), count + 1);
    points = 12;
  }
  const GaussLegendre rule(points);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
    const double a = panels[p], b = panels[p + 1];
    if (b <= a) continue;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto [x, w] = rule.point(a, b, i);
      const Eigen::VectorXd phi = basis.evaluate(std::clamp(x, basis.t0(), basis.t1()));
      gram.noalias() += w * phi * phi.transpose();
    }
  }
  return 0.5 * (gram + gram.transpose());
}

// ---------------------------------------------------------------------------

FunctionalDataset::FunctionalDataset(LocationSet locs, BasisDescriptor b, Eigen::MatrixXd w)
    : locations(std::move(locs)), basis(std::move(b)), coefficients(std::move(w)) {
  require(coefficients.rows() == static_cast<Eigen::Index>(locations.size()),
          "FunctionalDataset: one coefficient row per site required");
  require(coefficients.cols() == basis.size(),
          "FunctionalDataset: coefficient width must equal basis size");
  if (!coefficients.allFinite()) throw DataError("FunctionalDataset: non-finite coefficients");
}

FunctionalDataset FunctionalDataset::subset(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd w(static_cast<Eigen::Index>(indices.size()), coefficients.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) w.row(r) = coefficients.row(indices[r]);
  return FunctionalDataset(locations.subset(indices), basis, std::move(w));
}

FunctionalDataset FunctionalDataset::without(std::size_t site) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < size(); ++i)
    if (i != site) keep.push_back(i);
  return subset(keep);
}

FunctionalDataset smooth(const LongitudinalTable& table, const LocationSet& locations,
                         const BasisDescriptor& basis, double ridge, std::size_t jobs) {
  require(ridge >= 0.0 && std::isfinite(ridge), "smooth: ridge must be a finite value >= 0");
  require(table.num_sites() == locations.size(), "smooth: table and locations differ in size");
  const int m = basis.size();
  Eigen::MatrixXd w(static_cast<Eigen::Index>(locations.size()), m);

  parallel_for(locations.size(), jobs, [&](std::size_t i) {
    const auto& series = table.series(i);
    const auto& id = table.site_ids()[i];
    for (double t : series.t)
      if (!basis.contains(t))
        throw SmoothingError("site '" + id + "': time " + format_real(t) +
                             " lies outside the basis domain");
    const Eigen::MatrixXd X = basis.design_matrix(series.t);
    const Eigen::Map<const Eigen::VectorXd> x(series.x.data(),
                                              static_cast<Eigen::Index>(series.x.size()));
    if (ridge == 0.0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
      if (X.rows() < m || qr.rank() < m)
        throw SmoothingError("site '" + id + "': design has rank " + std::to_string(qr.rank()) +
                             " < " + std::to_string(m) + " with " +
                             std::to_string(series.t.size()) + " observations");
      w.row(i) = qr.solve(x).transpose();
    } else {
      Eigen::MatrixXd normal = X.transpose() * X;
      normal.diagonal().array() += ridge;
      w.row(i) = normal.llt().solve(X.transpose() * x).transpose();
    }
  });
  return FunctionalDataset(locations, basis, std::move(w));
}

Eigen::VectorXd evaluate_function(const BasisDescriptor& basis, const Eigen::VectorXd& w,
                                  std::span<const double> grid) {
  require(w.size() == basis.size(), "evaluate_function: coefficient length mismatch");
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) values[j] = basis.evaluate(grid[j]).dot(w);
  return values;
}

Eigen::VectorXd evaluate_function(const FunctionalDataset& dataset, std::size_t site,
                                  std::span<const double> grid) {
  require(site < dataset.size(), "evaluate_function: site index out of range");
  return evaluate_function(dataset.basis, dataset.coefficient(site), grid);
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t count) {
  require(count >= 1, "uniform_grid: count must be positive");
  if (count == 1) return {t0};
  std::vector<double> g(count);
  for (std::size_t j = 0; j < count; ++j)
    g[j] = t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(count - 1);
  g.back() = t1;
  return g;
}

}  // namespace fkrige
