#pragma once

#include <Eigen/Dense>

#include "poscert/interval.hpp"

namespace poscert {

/// Dense matrix of intervals, stored as a pair of endpoint matrices.
class IntervalMatrix {
 public:
  using Index = Eigen::Index;

  IntervalMatrix() = default;
  /// Zero matrix.
  IntervalMatrix(Index rows, Index cols);

  static IntervalMatrix from_point(const Eigen::MatrixXd& a);
  static IntervalMatrix from_bounds(const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi);
  /// Enclosure of { M : |M - mid| <= rad }.
  static IntervalMatrix from_mid_rad(const Eigen::MatrixXd& mid, const Eigen::MatrixXd& rad);
  static IntervalMatrix identity(Index n);

  [[nodiscard]] Index rows() const noexcept { return lo_.rows(); }
  [[nodiscard]] Index cols() const noexcept { return lo_.cols(); }

  [[nodiscard]] Interval operator()(Index i, Index j) const { return Interval(lo_(i, j), hi_(i, j)); }
  void set(Index i, Index j, const Interval& v) {
    lo_(i, j) = v.lo();
    hi_(i, j) = v.hi();
  }

  [[nodiscard]] const Eigen::MatrixXd& lo() const noexcept { return lo_; }
  [[nodiscard]] const Eigen::MatrixXd& hi() const noexcept { return hi_; }

  /// Floating midpoints and radii with [lo,hi] contained in [mid-rad, mid+rad].
  void mid_rad(Eigen::MatrixXd& mid, Eigen::MatrixXd& rad) const;
  [[nodiscard]] Eigen::MatrixXd mid() const;
  /// Entrywise upper bound of |x| over each entry.
  [[nodiscard]] Eigen::MatrixXd mag() const;

  [[nodiscard]] bool is_point() const { return lo_ == hi_; }
  /// Exact entrywise symmetry of the stored endpoints.
  [[nodiscard]] bool is_symmetric() const;
  /// Whether every point matrix of other lies in this one.
  [[nodiscard]] bool contains(const IntervalMatrix& other) const;

  [[nodiscard]] IntervalMatrix transpose() const;

 private:
  Eigen::MatrixXd lo_;
  Eigen::MatrixXd hi_;
};

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a);

/// Enclosure of every product A*B with A in a, B in b. Uses midpoint-radius
/// arithmetic with floating-point BLAS-3 products and an a priori bound on
/// their rounding error, so the cost is a few dense products.
IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator*(const Eigen::MatrixXd& a, const IntervalMatrix& b);
IntervalMatrix operator*(const IntervalMatrix& a, const Eigen::MatrixXd& b);

/// Upper bound for the induced 1-norm and infinity-norm over the matrix set.
double norm1_upper(const IntervalMatrix& m);
double norm_inf_upper(const IntervalMatrix& m);

/// [0, u] with u >= ||A||_2 for every point matrix A in m, via
/// sqrt(||A||_1 ||A||_inf) on the entrywise magnitude.
Interval spectral_norm_upper(const IntervalMatrix& m);

}  // namespace poscert
