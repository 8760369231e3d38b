#pragma once

// Range enclosures of spectral functions over sub-boxes of the unit square.
//
// Two enclosures are intersected on every box: a second-order Taylor form of
// f itself, and the factored form f = x(1-x) y(1-y) v with v = sum u_ij Q_i Q_j,
// Q_n = P_n' / (n(n+1)). The factored form gives exact zeros on the boundary,
// which is what makes the minimum over a boundary collar certifiable.

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "poscert/basis.hpp"
#include "poscert/interval.hpp"

namespace poscert {

class SpectralRange {
 public:
  explicit SpectralRange(const SpectralFn& f);

  [[nodiscard]] const SpectralFn& function() const noexcept { return f_; }

  /// One-level enclosure of f over b.
  [[nodiscard]] Interval enclose(const Box& b) const;
  /// Enclosure refined by uniform bisection to the given depth; every level
  /// is intersected with its parent, so width never grows with depth.
  [[nodiscard]] Interval enclose(const Box& b, int depth) const;
  /// Enclosure of f at a point (exact evaluation, one rounding per term).
  [[nodiscard]] Interval at(double x, double y) const;

  /// Certified bounds [lower bound of min f, upper bound of max f] over b by
  /// branch and bound. Stops once both extremes are pinned to within
  /// tol * max(1, |extreme|) or after max_boxes subdivisions per extreme.
  [[nodiscard]] Interval global_range(const Box& b, double tol = 1e-6, int max_boxes = 20000) const;

 private:
  struct Row {
    std::vector<Interval> phi;   // phi_n(c)
    std::vector<Interval> dphi;  // phi_n'(c)
    std::vector<Interval> q;     // Q_n(c)
    std::vector<Interval> dq;    // Q_n'(c)
  };
  const Row& row(double c) const;
  [[nodiscard]] Interval bilinear(const std::vector<Interval>& a, const std::vector<Interval>& b) const;
  [[nodiscard]] double extreme(const Box& b, bool upper, double tol, int max_boxes) const;

  SpectralFn f_;
  Eigen::MatrixXd absu_;  // |coefficients|
  int n_;
  // Global bounds of second derivatives on the unit square.
  double fxx_ = 0, fxy_ = 0, fyy_ = 0;
  double vxx_ = 0, vxy_ = 0, vyy_ = 0;

  mutable std::mutex mu_;
  mutable std::map<double, std::unique_ptr<Row>> rows_;
};

/// Tight enclosure of x(1-x) over X subset of [0,1].
Interval bubble(const Interval& X);

}  // namespace poscert
