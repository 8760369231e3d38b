#include "poscert/interval_matrix.hpp"

#include <limits>

namespace poscert {

using namespace rounding;
using Eigen::MatrixXd;

namespace {

constexpr double kUnit = 0x1p-53;
constexpr double kEta = std::numeric_limits<double>::denorm_min();

void check_same_shape(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "interval matrix shapes differ");
  }
}

// Upper bound of gamma_k / (1 - gamma_k) with a margin, for inner products of
// length k in any summation order (FMA included).
double gamma_factor(Eigen::Index k) {
  const double kk = static_cast<double>(k) + 2.0;
  if (kk * kUnit > 1e-3) throw Error(ErrorCode::DimensionMismatch, "inner dimension too large");
  return mul_up(1.01 * kk, kUnit);
}

// Entrywise bound: rad = g*T1 + (1+g)*T2 + c*eta, evaluated with upward rounding.
MatrixXd combine_radius(const MatrixXd& t1, const MatrixXd* t2, double g, double tail) {
  MatrixXd r(t1.rows(), t1.cols());
  const double one_g = add_up(1.0, g);
  for (Eigen::Index j = 0; j < t1.cols(); ++j) {
    for (Eigen::Index i = 0; i < t1.rows(); ++i) {
      double v = mul_up(g, t1(i, j));
      if (t2 != nullptr) v = add_up(v, mul_up(one_g, (*t2)(i, j)));
      r(i, j) = add_up(v, tail);
    }
  }
  return r;
}

// Product of midpoint-radius matrices. ar/br may be null for point factors.
IntervalMatrix mid_rad_product(const MatrixXd& am, const MatrixXd* ar, const MatrixXd& bm, const MatrixXd* br) {
  if (am.cols() != bm.rows()) throw Error(ErrorCode::DimensionMismatch, "inner dimensions differ");
  const Eigen::Index k = am.cols();
  const double g = gamma_factor(2 * k + 1);
  const double tail = mul_up(static_cast<double>(4 * k + 4), kEta);

  const MatrixXd cm = am * bm;
  const MatrixXd aabs = am.cwiseAbs();
  const MatrixXd babs = bm.cwiseAbs();
  const MatrixXd t1 = aabs * babs;

  MatrixXd t2;
  bool have_t2 = false;
  if (br != nullptr) {
    t2 = aabs * (*br);
    have_t2 = true;
  }
  if (ar != nullptr) {
    MatrixXd bsum = babs;
    if (br != nullptr) {
      for (Eigen::Index j = 0; j < bsum.cols(); ++j)
        for (Eigen::Index i = 0; i < bsum.rows(); ++i) bsum(i, j) = add_up(bsum(i, j), (*br)(i, j));
    }
    const MatrixXd p = (*ar) * bsum;
    if (have_t2) {
      for (Eigen::Index j = 0; j < t2.cols(); ++j)
        for (Eigen::Index i = 0; i < t2.rows(); ++i) t2(i, j) = add_up(t2(i, j), p(i, j));
    } else {
      t2 = p;
      have_t2 = true;
    }
  }
  // The floating products underestimate |A||B|-type sums by at most a factor
  // (1+g); two summed products add one more rounding, absorbed by g's margin.
  const MatrixXd rad = combine_radius(t1, have_t2 ? &t2 : nullptr, g, tail);
  return IntervalMatrix::from_mid_rad(cm, rad);
}

}  // namespace

IntervalMatrix::IntervalMatrix(Index rows, Index cols)
    : lo_(MatrixXd::Zero(rows, cols)), hi_(MatrixXd::Zero(rows, cols)) {}

IntervalMatrix IntervalMatrix::from_point(const MatrixXd& a) {
  IntervalMatrix m;
  m.lo_ = a;
  m.hi_ = a;
  return m;
}

IntervalMatrix IntervalMatrix::from_bounds(const MatrixXd& lo, const MatrixXd& hi) {
  if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "endpoint matrices differ in shape");
  }
  if ((lo.array() > hi.array()).any()) throw Error(ErrorCode::ArgumentOutOfRange, "lo > hi in interval matrix");
  IntervalMatrix m;
  m.lo_ = lo;
  m.hi_ = hi;
  return m;
}

IntervalMatrix IntervalMatrix::from_mid_rad(const MatrixXd& mid, const MatrixXd& rad) {
  IntervalMatrix m(mid.rows(), mid.cols());
  for (Index j = 0; j < mid.cols(); ++j) {
    for (Index i = 0; i < mid.rows(); ++i) {
      m.lo_(i, j) = sub_down(mid(i, j), rad(i, j));
      m.hi_(i, j) = add_up(mid(i, j), rad(i, j));
    }
  }
  return m;
}

IntervalMatrix IntervalMatrix::identity(Index n) { return from_point(MatrixXd::Identity(n, n)); }

void IntervalMatrix::mid_rad(MatrixXd& mid, MatrixXd& rad) const {
  mid.resize(rows(), cols());
  rad.resize(rows(), cols());
  for (Index j = 0; j < cols(); ++j) {
    for (Index i = 0; i < rows(); ++i) {
      const double l = lo_(i, j);
      const double h = hi_(i, j);
      if (l == h) {
        mid(i, j) = l;
        rad(i, j) = 0.0;
        continue;
      }
      const double m = Interval(l, h).mid();
      mid(i, j) = m;
      rad(i, j) = std::fmax(sub_up(h, m), sub_up(m, l));
    }
  }
}

MatrixXd IntervalMatrix::mid() const {
  MatrixXd m;
  MatrixXd r;
  mid_rad(m, r);
  return m;
}

MatrixXd IntervalMatrix::mag() const { return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()); }

bool IntervalMatrix::is_symmetric() const {
  if (rows() != cols()) return false;
  return lo_ == lo_.transpose() && hi_ == hi_.transpose();
}

bool IntervalMatrix::contains(const IntervalMatrix& other) const {
  if (rows() != other.rows() || cols() != other.cols()) return false;
  return (lo_.array() <= other.lo_.array()).all() && (other.hi_.array() <= hi_.array()).all();
}

IntervalMatrix IntervalMatrix::transpose() const {
  IntervalMatrix t;
  t.lo_ = lo_.transpose();
  t.hi_ = hi_.transpose();
  return t;
}

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b) {
  check_same_shape(a, b);
  MatrixXd lo(a.rows(), a.cols());
  MatrixXd hi(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      lo(i, j) = add_down(a.lo()(i, j), b.lo()(i, j));
      hi(i, j) = add_up(a.hi()(i, j), b.hi()(i, j));
    }
  }
  return IntervalMatrix::from_bounds(lo, hi);
}

IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b) {
  check_same_shape(a, b);
  MatrixXd lo(a.rows(), a.cols());
  MatrixXd hi(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      lo(i, j) = sub_down(a.lo()(i, j), b.hi()(i, j));
      hi(i, j) = sub_up(a.hi()(i, j), b.lo()(i, j));
    }
  }
  return IntervalMatrix::from_bounds(lo, hi);
}

IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a) {
  IntervalMatrix r(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) r.set(i, j, s * a(i, j));
  return r;
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
  MatrixXd am;
  MatrixXd ar;
  MatrixXd bm;
  MatrixXd br;
  a.mid_rad(am, ar);
  b.mid_rad(bm, br);
  const bool a_point = a.is_point();
  const bool b_point = b.is_point();
  return mid_rad_product(am, a_point ? nullptr : &ar, bm, b_point ? nullptr : &br);
}

IntervalMatrix operator*(const MatrixXd& a, const IntervalMatrix& b) {
  MatrixXd bm;
  MatrixXd br;
  b.mid_rad(bm, br);
  return mid_rad_product(a, nullptr, bm, b.is_point() ? nullptr : &br);
}

IntervalMatrix operator*(const IntervalMatrix& a, const MatrixXd& b) {
  MatrixXd am;
  MatrixXd ar;
  a.mid_rad(am, ar);
  return mid_rad_product(am, a.is_point() ? nullptr : &ar, b, nullptr);
}

double norm1_upper(const IntervalMatrix& m) {
  const MatrixXd mg = m.mag();
  double best = 0.0;
  for (Eigen::Index j = 0; j < mg.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < mg.rows(); ++i) s = add_up(s, mg(i, j));
    best = std::fmax(best, s);
  }
  return best;
}

double norm_inf_upper(const IntervalMatrix& m) {
  const MatrixXd mg = m.mag();
  double best = 0.0;
  for (Eigen::Index i = 0; i < mg.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < mg.cols(); ++j) s = add_up(s, mg(i, j));
    best = std::fmax(best, s);
  }
  return best;
}

Interval spectral_norm_upper(const IntervalMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NonSquare, "spectral norm bound needs a square matrix");
  const double n1 = norm1_upper(m);
  const double ni = norm_inf_upper(m);
  return Interval(0.0, sqrt_up(mul_up(n1, ni)));
}

}  // namespace poscert
