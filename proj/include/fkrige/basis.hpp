#pragma once

// Finite basis systems on a time interval, least-squares smoothing of
// longitudinal observations into coefficient vectors, and the Gram matrix
// of the basis.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/io.hpp"

namespace fkrige {

enum class BasisKind { bspline, fourier };

class BasisDescriptor {
 public:
  /// B-splines of the given order with equally spaced breakpoints on
  /// [t0, t1]; num_basis - order interior knots.
  static BasisDescriptor bspline(int num_basis, double t0, double t1, int order = 4);

  /// B-splines on explicit breakpoints (t0, interior knots..., t1).
  static BasisDescriptor bspline_with_breakpoints(std::vector<double> breakpoints, int order = 4);

  /// Orthonormal Fourier system: 1/sqrt(P), then sqrt(2/P) sin / cos pairs.
  /// num_basis must be odd; period defaults to t1 - t0.
  static BasisDescriptor fourier(int num_basis, double t0, double t1, double period = 0.0);

  BasisKind kind() const { return kind_; }
  int size() const { return num_basis_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int order() const { return order_; }
  double period() const { return period_; }
  /// Breakpoints (t0, interior knots, t1); empty for Fourier.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  bool contains(double t) const { return t >= t0_ && t <= t1_; }

  /// (phi_1(t), ..., phi_M(t)). Throws DomainError outside [t0, t1].
  Eigen::VectorXd evaluate(double t) const;

  /// Row j holds evaluate(times[j]).
  Eigen::MatrixXd design_matrix(std::span<const double> times) const;

  friend bool operator==(const BasisDescriptor&, const BasisDescriptor&) = default;

 private:
  BasisDescriptor() = default;
  void evaluate_bspline(double t, double* out) const;

  BasisKind kind_ = BasisKind::bspline;
  int num_basis_ = 0;
  double t0_ = 0.0;
  double t1_ = 1.0;
  int order_ = 0;
  double period_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<double> knots_;  // full knot sequence, end knots repeated `order` times
};

/// Phi = int phi(t) phi(t)^T dt over [t0, t1].
Eigen::MatrixXd gram_matrix(const BasisDescriptor& basis);

struct FunctionalDataset {
  LocationSet locations;
  BasisDescriptor basis;
  Eigen::MatrixXd coefficients;  // n x M, row i is w_i

  FunctionalDataset(LocationSet locations, BasisDescriptor basis, Eigen::MatrixXd coefficients);

  std::size_t size() const { return locations.size(); }
  Eigen::VectorXd coefficient(std::size_t site) const { return coefficients.row(site).transpose(); }

  /// Dataset restricted to the given sites (order preserved).
  FunctionalDataset subset(std::span<const std::size_t> indices) const;
  FunctionalDataset without(std::size_t site) const;
};

/// Per-site least squares: w_i = argmin sum_j (x_ij - w^T phi(t_ij))^2 + ridge |w|^2.
/// With ridge == 0 a rank-deficient design raises SmoothingError naming the
/// site. Sites are processed independently (up to `jobs` threads).
FunctionalDataset smooth(const LongitudinalTable& table, const LocationSet& locations,
                         const BasisDescriptor& basis, double ridge = 0.0, std::size_t jobs = 1);

Eigen::VectorXd evaluate_function(const BasisDescriptor& basis, const Eigen::VectorXd& w,
                                  std::span<const double> grid);
Eigen::VectorXd evaluate_function(const FunctionalDataset& dataset, std::size_t site,
                                  std::span<const double> grid);

/// `count` equally spaced points covering [t0, t1] inclusive.
std::vector<double> uniform_grid(double t0, double t1, std::size_t count);

}  // namespace fkrige
