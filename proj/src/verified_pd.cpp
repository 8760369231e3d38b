#include "poscert/verified_pd.hpp"

#include <cmath>
#include <limits>

namespace poscert {

namespace {

using namespace rounding;

constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;

// gamma_k / (1 - gamma_k), rounded up.
double gamma_ratio(long k) {
  const double ku = mul_up(static_cast<double>(k), kUnit);
  const double g = div_up(ku, sub_down(1.0, ku));
  return div_up(g, sub_down(1.0, g));
}

// Power of two close to 1/sqrt(d), so that scaling is exact.
double inv_sqrt_scale(double d) {
  if (!(d > 0) || !std::isfinite(d)) return 1.0;
  int e = 0;
  std::frexp(d, &e);
  return std::ldexp(1.0, -(e / 2));
}

}  // namespace

bool verified_pd(const IntervalMatrix& C) {
  const Eigen::Index n = C.rows();
  if (n != C.cols()) throw Error(ErrorCode::NonSquare, "verified_pd needs a square matrix");
  if (n == 0) return true;
  if (!C.is_symmetric()) throw Error(ErrorCode::ArgumentOutOfRange, "verified_pd needs symmetric endpoints");
  Eigen::MatrixXd mid, rad;
  C.mid_rad(mid, rad);
  if (!mid.allFinite() || !rad.allFinite()) return false;

  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(mid(i, i) > 0)) return false;
    s(i) = inv_sqrt_scale(mid(i, i));
  }
  mid = s.asDiagonal() * mid * s.asDiagonal();
  rad = s.asDiagonal() * rad * s.asDiagonal();

  // rho >= ||rad||_2 via sqrt(||.||_1 ||.||_inf); rad is symmetric.
  double rho = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0;
    for (Eigen::Index i = 0; i < n; ++i) col = add_up(col, rad(i, j));
    rho = std::max(rho, col);
  }
  double trace = 0;
  for (Eigen::Index i = 0; i < n; ++i) trace = add_up(trace, mid(i, i));
  const double beta0 = add_up(mul_up(gamma_ratio(n + 1), trace), mul_up(static_cast<double>(n), 1e-290));
  const double alpha = mul_up(2.0, add_up(beta0, rho));

  // A = fl(mid - alpha I); its trace bounds the Cholesky backward error.
  Eigen::MatrixXd L = mid;
  double min_shift = kInf;
  double trace_a = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = mid(i, i) - alpha;
    if (!(a > 0)) return false;
    L(i, i) = a;
    min_shift = std::min(min_shift, sub_down(mid(i, i), a));
    trace_a = add_up(trace_a, a);
  }
  const double beta = add_up(mul_up(gamma_ratio(n + 1), trace_a), mul_up(static_cast<double>(n), 1e-290));

  // Plain Cholesky R^T R on the upper triangle (column-major, so the inner
  // products run over contiguous memory); every entry is one inner product,
  // which is what the gamma_{n+1} bound assumes.
  Eigen::MatrixXd& R = L;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* rj = R.col(j).data();
    for (Eigen::Index i = 0; i < j; ++i) {
      const double* ri = R.col(i).data();
      double v = R(i, j);
      for (Eigen::Index k = 0; k < i; ++k) v -= ri[k] * rj[k];
      R(i, j) = v / R(i, i);
    }
    double d = R(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= rj[k] * rj[k];
    if (!(d > 0)) return false;
    R(j, j) = std::sqrt(d);
  }
  if (!R.allFinite()) return false;
  return min_shift > add_up(beta, rho);
}

BandMatrix::BandMatrix(int n, int bw)
    : n_(n), bw_(bw), lo_(static_cast<std::size_t>(n) * (bw + 1), 0.0), hi_(lo_.size(), 0.0) {
  if (n < 0 || bw < 0) throw Error(ErrorCode::ArgumentOutOfRange, "band matrix needs n, bw >= 0");
}

std::size_t BandMatrix::idx(int i, int j) const {
  if (i < j) std::swap(i, j);
  if (j < 0 || i >= n_ || i - j > bw_) throw Error(ErrorCode::ArgumentOutOfRange, "entry outside the band");
  // Row-major within the band: row i holds columns i-bw..i in order.
  return static_cast<std::size_t>(i) * (bw_ + 1) + static_cast<std::size_t>(bw_ - (i - j));
}

void BandMatrix::add(int i, int j, const Interval& v) {
  const std::size_t k = idx(i, j);
  lo_[k] = rounding::add_down(lo_[k], v.lo());
  hi_[k] = rounding::add_up(hi_[k], v.hi());
}

Interval BandMatrix::get(int i, int j) const {
  const std::size_t k = idx(i, j);
  return Interval(lo_[k], hi_[k]);
}

bool verified_pd(const BandMatrix& C) {
  const int n = C.n_;
  const int bw = C.bw_;
  if (n == 0) return true;
  const std::size_t stride = static_cast<std::size_t>(bw) + 1;
  std::vector<double> mid(C.lo_.size()), rad(C.lo_.size());
  for (std::size_t k = 0; k < mid.size(); ++k) {
    const double lo = C.lo_[k];
    const double hi = C.hi_[k];
    if (!std::isfinite(lo) || !std::isfinite(hi)) return false;
    const double m = lo + 0.5 * (hi - lo);
    mid[k] = m;
    rad[k] = std::max(sub_up(m, lo), sub_up(hi, m));
  }
  auto pos = [&](int i, int j) {
    return static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(bw - (i - j));
  };
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double d = mid[pos(i, i)];
    if (!(d > 0)) return false;
    s[static_cast<std::size_t>(i)] = inv_sqrt_scale(d);
  }
  std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);
  double trace = 0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - bw); j <= i; ++j) {
      const std::size_t k = pos(i, j);
      const double sc = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
      mid[k] *= sc;
      rad[k] *= sc;
      rowsum[static_cast<std::size_t>(i)] = add_up(rowsum[static_cast<std::size_t>(i)], rad[k]);
      if (j < i) rowsum[static_cast<std::size_t>(j)] = add_up(rowsum[static_cast<std::size_t>(j)], rad[k]);
      else trace = add_up(trace, mid[k]);
    }
  double rho = 0;
  for (double r : rowsum) rho = std::max(rho, r);
  const double g = gamma_ratio(bw + 2);
  const double alpha = mul_up(2.0, add_up(add_up(mul_up(g, trace), mul_up(static_cast<double>(n), 1e-290)), rho));

  std::vector<double>& L = mid;
  double min_shift = kInf;
  double trace_a = 0;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = pos(i, i);
    const double a = L[k] - alpha;
    if (!(a > 0)) return false;
    min_shift = std::min(min_shift, sub_down(L[k], a));
    L[k] = a;
    trace_a = add_up(trace_a, a);
  }
  const double beta = add_up(mul_up(g, trace_a), mul_up(static_cast<double>(n), 1e-290));

  // Row-oriented band Cholesky L L^T: row i of L is finished from the rows
  // above it, so both operands of each inner product are contiguous.
  for (int i = 0; i < n; ++i) {
    const int k0 = std::max(0, i - bw);
    double* li = &L[pos(i, k0)];
    for (int j = k0; j < i; ++j) {
      const int kk = std::max(k0, j - bw);
      const double* lj = &L[pos(j, kk)];
      const double* lik = li + (kk - k0);
      double v = li[j - k0];
      for (int k = 0; k < j - kk; ++k) v -= lik[k] * lj[k];
      li[j - k0] = v / L[pos(j, j)];
    }
    double d = li[i - k0];
    for (int k = 0; k < i - k0; ++k) d -= li[k] * li[k];
    if (!(d > 0)) return false;
    li[i - k0] = std::sqrt(d);
    for (int k = 0; k <= i - k0; ++k)
      if (!std::isfinite(li[k])) return false;
  }
  return min_shift > add_up(beta, rho);
}

}  // namespace poscert
