#pragma once

// Reference computations used as oracles by the unit and acceptance tests.
// They deliberately avoid the library's own algorithms: B-splines via de
// Boor's point algorithm instead of the basis recurrence, integrals by a
// fine trapezoid rule, kriging weights through an explicit dense inverse,
// optimization by exhaustive grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fkrige/io.hpp"
#include "fkrige/ofk.hpp"
#include "fkrige/sofk.hpp"
#include "fkrige/variogram.hpp"

namespace fkrige::testing {

// ---------------------------------------------------------------------------
// B-splines

/// Clamped knot vector for `num_basis` functions of the given order with
/// equally spaced breakpoints on [t0, t1].
inline std::vector<double> clamped_knots(int num_basis, int order, double t0, double t1) {
  const int interior = num_basis - order;
  std::vector<double> k(static_cast<std::size_t>(order), t0);
  for (int j = 1; j <= interior; ++j) k.push_back(t0 + (t1 - t0) * j / (interior + 1));
  k.insert(k.end(), static_cast<std::size_t>(order), t1);
  return k;
}

/// Value at t of the spline with the given coefficients, by de Boor's
/// triangular scheme on the control points.
inline double de_boor(const std::vector<double>& knots, int order, const std::vector<double>& coef, double t) {
  const int p = order - 1;
  const int n = static_cast<int>(coef.size());
  int k = p;
  while (k + 1 < n && t >= knots[static_cast<std::size_t>(k + 1)]) ++k;
  std::vector<double> d(static_cast<std::size_t>(p + 1));
  for (int j = 0; j <= p; ++j) d[static_cast<std::size_t>(j)] = coef[static_cast<std::size_t>(j + k - p)];
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const double lo = knots[static_cast<std::size_t>(j + k - p)];
      const double hi = knots[static_cast<std::size_t>(j + 1 + k - r)];
      const double a = hi == lo ? 0.0 : (t - lo) / (hi - lo);
      d[static_cast<std::size_t>(j)] = (1.0 - a) * d[static_cast<std::size_t>(j - 1)] + a * d[static_cast<std::size_t>(j)];
    }
  }
  return d[static_cast<std::size_t>(p)];
}

/// All basis values at t via de Boor with unit coefficient vectors.
inline std::vector<double> de_boor_basis(const std::vector<double>& knots, int order, int num_basis, double t) {
  std::vector<double> out(static_cast<std::size_t>(num_basis));
  std::vector<double> e(static_cast<std::size_t>(num_basis), 0.0);
  for (int m = 0; m < num_basis; ++m) {
    e[static_cast<std::size_t>(m)] = 1.0;
    out[static_cast<std::size_t>(m)] = de_boor(knots, order, e, t);
    e[static_cast<std::size_t>(m)] = 0.0;
  }
  return out;
}

/// Trapezoid rule with `points` nodes for the Gram matrix of a clamped
/// B-spline basis.
inline Eigen::MatrixXd trapezoid_gram(int num_basis, int order, double t0, double t1, std::size_t points) {
  const auto knots = clamped_knots(num_basis, order, t0, t1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(num_basis, num_basis);
  const double h = (t1 - t0) / static_cast<double>(points - 1);
  Eigen::VectorXd v(num_basis);
  for (std::size_t j = 0; j < points; ++j) {
    const double t = j + 1 == points ? t1 : t0 + h * static_cast<double>(j);
    const auto b = de_boor_basis(knots, order, num_basis, t);
    for (int m = 0; m < num_basis; ++m) v[m] = b[static_cast<std::size_t>(m)];
    const double w = (j == 0 || j + 1 == points) ? 0.5 * h : h;
    g.selfadjointView<Eigen::Lower>().rankUpdate(v, w);
  }
  return g.selfadjointView<Eigen::Lower>();
}

/// Trapezoid integral of f over [a, b].
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t points) {
  const double h = (b - a) / static_cast<double>(points - 1);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t j = 1; j + 1 < points; ++j) s += f(a + h * static_cast<double>(j));
  return s * h;
}

// ---------------------------------------------------------------------------
// Kriging

/// (lambda, mu) from the explicit inverse of the bordered matrix.
inline std::pair<Eigen::VectorXd, double> dense_ofk(const Eigen::MatrixXd& C, const Eigen::VectorXd& c0) {
  const auto n = C.rows();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
  B.topLeftCorner(n, n) = C;
  B.block(0, n, n, 1).setOnes();
  B.block(n, 0, 1, n).setOnes();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = c0;
  rhs[n] = 1.0;
  const Eigen::MatrixXd inv = B.fullPivLu().inverse();
  const Eigen::VectorXd sol = inv * rhs;
  return {sol.head(n), sol[n]};
}

struct RandomInstance {
  LocationSet locations;
  VariogramModel model;
  std::vector<double> target;
  std::shared_ptr<const KrigingSystem> system;
};

inline LocationSet random_sites(std::mt19937_64& gen, std::size_t n, std::size_t dim = 2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Site> sites;
  for (std::size_t i = 0; i < n; ++i) {
    Site s{"s" + std::to_string(i), {}};
    for (std::size_t d = 0; d < dim; ++d) s.coords.push_back(u(gen));
    sites.push_back(std::move(s));
  }
  return LocationSet(std::move(sites));
}

inline VariogramModel random_model(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VariogramModel m;
  const int pick = static_cast<int>(u(gen) * 3.0);
  m.family = pick == 0 ? VariogramFamily::exponential : pick == 1 ? VariogramFamily::gaussian : VariogramFamily::matern;
  m.nu = m.family == VariogramFamily::matern ? (u(gen) < 0.5 ? 1.5 : 2.5) : 0.5;
  m.nugget = 0.2 * u(gen);
  m.psill = 0.5 + 1.5 * u(gen);
  m.range = 0.2 + 0.8 * u(gen);
  return m;
}

inline RandomInstance random_instance(std::mt19937_64& gen, std::size_t n) {
  RandomInstance r;
  r.locations = random_sites(gen, n);
  r.model = random_model(gen);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.target = {u(gen), u(gen)};
  r.system = std::make_shared<const KrigingSystem>(build_system(r.model, r.locations, r.target));
  return r;
}

/// A random SPD matrix with a controlled spectrum and a matching c0.
inline std::shared_ptr<const KrigingSystem> random_spd_system(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = z(gen);
  Eigen::MatrixXd C = A * A.transpose() / static_cast<double>(n) + 0.5 * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::VectorXd c0(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c0.size(); ++i) c0[i] = u(gen);
  return std::make_shared<const KrigingSystem>(C, c0);
}

/// Empirical variogram whose bins sit exactly on the model curve.
inline EmpiricalTraceVariogram synthetic_bins(const VariogramModel& m, int count, double cutoff) {
  EmpiricalTraceVariogram emp;
  emp.cutoff = cutoff;
  for (int b = 0; b < count; ++b) {
    const double r = cutoff * (b + 0.5) / count;
    emp.bins.push_back({r, model_gamma(m, r), static_cast<std::size_t>(10 + 7 * b)});
  }
  return emp;
}

// ---------------------------------------------------------------------------
// Brute-force minimization

/// Minimum of f over the plane sum(lambda) = 1 for n = 3, parametrized by
/// (lambda_1, lambda_2). A `coarse` grid over [-box, box]^2 locates the
/// basin, a `step` grid covers two coarse cells around it, and a compass
/// search refines the winner. Sound for convex f.
inline std::pair<Eigen::Vector3d, double> constrained_grid_min(const std::function<double(const Eigen::VectorXd&)>& f,
                                                               double box, double coarse, double step) {
  Eigen::VectorXd l(3);
  double best = std::numeric_limits<double>::infinity();
  double b1 = 0.0, b2 = 0.0;
  const auto scan = [&](double c1, double c2, double half, double h) {
    const auto count = static_cast<long>(std::llround(2.0 * half / h));
    const double s1 = c1 - half, s2 = c2 - half;
    for (long i = 0; i <= count; ++i) {
      const double a = s1 + h * static_cast<double>(i);
      for (long j = 0; j <= count; ++j) {
        const double b = s2 + h * static_cast<double>(j);
        l << a, b, 1.0 - a - b;
        const double v = f(l);
        if (v < best) best = v, b1 = a, b2 = b;
      }
    }
  };
  scan(0.0, 0.0, box, coarse);
  scan(b1, b2, 2.0 * coarse, step);
  double h = step;
  while (h > 1e-10) {
    bool moved = false;
    for (const auto& d : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}}) {
      const double a = b1 + h * d.first, b = b2 + h * d.second;
      l << a, b, 1.0 - a - b;
      const double v = f(l);
      if (v < best) {
        best = v, b1 = a, b2 = b;
        moved = true;
      }
    }
    if (!moved) h *= 0.5;
  }
  Eigen::Vector3d out(b1, b2, 1.0 - b1 - b2);
  return {out, best};
}

/// Minimum of f over R^3 by a coarse grid on [-box, box]^3, a step-sized
/// grid around the coarse winner, and compass refinement.
inline double unconstrained_grid_min(const std::function<double(const Eigen::VectorXd&)>& f, double box,
                                     double coarse, double step) {
  Eigen::VectorXd l(3), best_l(3);
  double best = std::numeric_limits<double>::infinity();
  const auto scan = [&](const Eigen::VectorXd& center, double half, double h) {
    const auto count = static_cast<long>(std::llround(2.0 * half / h));
    Eigen::VectorXd local_best = center;
    for (long i = 0; i <= count; ++i)
      for (long j = 0; j <= count; ++j)
        for (long k = 0; k <= count; ++k) {
          l << center[0] - half + h * static_cast<double>(i), center[1] - half + h * static_cast<double>(j),
              center[2] - half + h * static_cast<double>(k);
          const double v = f(l);
          if (v < best) best = v, local_best = l;
        }
    return local_best;
  };
  best_l = scan(Eigen::VectorXd::Zero(3), box, coarse);
  best_l = scan(best_l, 2.0 * coarse, step);
  double h = step;
  while (h > 1e-10) {
    bool moved = false;
    for (int d = 0; d < 3; ++d)
      for (double s : {h, -h}) {
        l = best_l;
        l[d] += s;
        const double v = f(l);
        if (v < best) best = v, best_l = l, moved = true;
      }
    if (!moved) h *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Files

/// Fresh empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fkrige_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fkrige::testing
