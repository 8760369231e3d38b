#pragma once

// Positive definiteness certificates via a floating Cholesky factorization
// of a shifted, power-of-two scaled midpoint matrix. If the factorization of
// fl(C - alpha I) succeeds, the standard backward error bound
//   |Delta| <= gamma_{k+1} |R^T||R|,   (|R^T||R|)_ij <= sqrt(a_ii a_jj)/(1-gamma)
// bounds lambda_min(C - alpha I) from below by -gamma/(1-gamma) trace, and the
// shift alpha is chosen to dominate that plus the radius norm.

#include <vector>

#include "poscert/interval_matrix.hpp"

namespace poscert {

/// True only if every symmetric matrix in C is positive definite. C must have
/// symmetric endpoints. A false result means "not certified".
bool verified_pd(const IntervalMatrix& C);

/// Symmetric band matrix in lower band storage: entry (i, j) with
/// 0 <= i - j <= bw is stored at (j, i - j). Each entry is an interval.
class BandMatrix {
 public:
  BandMatrix(int n, int bw);

  [[nodiscard]] int size() const noexcept { return n_; }
  [[nodiscard]] int bandwidth() const noexcept { return bw_; }
  /// Adds v to entry (i, j) (and implicitly (j, i)); |i - j| <= bw.
  void add(int i, int j, const Interval& v);
  [[nodiscard]] Interval get(int i, int j) const;

 private:
  friend bool verified_pd(const BandMatrix& C);
  [[nodiscard]] std::size_t idx(int i, int j) const;

  int n_;
  int bw_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

bool verified_pd(const BandMatrix& C);

}  // namespace poscert
