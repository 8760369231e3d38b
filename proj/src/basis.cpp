#include "poscert/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace poscert {

using namespace rounding;

// ---------------------------------------------------------------- Poly1D --

Poly1D::Poly1D(std::vector<Rational> coeffs) : c(std::move(coeffs)) { trim(); }

void Poly1D::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

Rational Poly1D::operator()(const Rational& x) const {
  Rational r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

Poly1D Poly1D::derivative() const {
  std::vector<Rational> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.emplace_back(c[k] * static_cast<long>(k));
  return Poly1D(std::move(d));
}

Rational Poly1D::integral01() const {
  Rational s = 0;
  for (std::size_t k = 0; k < c.size(); ++k) s += c[k] / Rational(static_cast<long>(k + 1));
  return s;
}

Poly1D operator+(const Poly1D& a, const Poly1D& b) {
  std::vector<Rational> r(std::max(a.c.size(), b.c.size()), Rational(0));
  for (std::size_t k = 0; k < a.c.size(); ++k) r[k] += a.c[k];
  for (std::size_t k = 0; k < b.c.size(); ++k) r[k] += b.c[k];
  return Poly1D(std::move(r));
}

Poly1D operator-(const Poly1D& a, const Poly1D& b) { return a + Rational(-1) * b; }

Poly1D operator*(const Poly1D& a, const Poly1D& b) {
  if (a.c.empty() || b.c.empty()) return Poly1D();
  std::vector<Rational> r(a.c.size() + b.c.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
  return Poly1D(std::move(r));
}

Poly1D operator*(const Rational& s, const Poly1D& a) {
  std::vector<Rational> r = a.c;
  for (auto& v : r) v *= s;
  return Poly1D(std::move(r));
}

// ------------------------------------------------- Legendre coefficients --

namespace {

std::mutex g_coeff_mutex;
std::vector<std::vector<BigInt>> g_legendre;
std::vector<std::vector<BigInt>> g_basis_num;

void ensure_legendre(int n) {
  while (static_cast<int>(g_legendre.size()) <= n) {
    const auto m = static_cast<unsigned long>(g_legendre.size());
    std::vector<BigInt> c(m + 1);
    for (unsigned long k = 0; k <= m; ++k) {
      BigInt a;
      BigInt b;
      mpz_bin_uiui(a.get_mpz_t(), m, k);
      mpz_bin_uiui(b.get_mpz_t(), m + k, k);
      c[k] = a * b;
      if ((m + k) % 2 == 1) c[k] = -c[k];
    }
    g_legendre.push_back(std::move(c));
  }
}

}  // namespace

const std::vector<BigInt>& shifted_legendre_int(int n) {
  if (n < 0) throw Error(ErrorCode::ArgumentOutOfRange, "Legendre index must be >= 0");
  std::lock_guard<std::mutex> lock(g_coeff_mutex);
  ensure_legendre(n);
  return g_legendre[static_cast<std::size_t>(n)];
}

const std::vector<BigInt>& basis_numerator_int(int n) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "basis index must be >= 1");
  std::lock_guard<std::mutex> lock(g_coeff_mutex);
  ensure_legendre(n);
  if (g_basis_num.empty()) g_basis_num.emplace_back();  // slot 0 unused
  while (static_cast<int>(g_basis_num.size()) <= n) {
    const std::size_t m = g_basis_num.size();
    const auto& p = g_legendre[m];
    std::vector<BigInt> r(m + 2);
    // x(1-x) * P_m'(x)
    for (std::size_t k = 1; k <= m; ++k) {
      const BigInt d = p[k] * static_cast<unsigned long>(k);  // coefficient of x^{k-1} in P_m'
      r[k] += d;
      r[k + 1] -= d;
    }
    g_basis_num.push_back(std::move(r));
  }
  return g_basis_num[static_cast<std::size_t>(n)];
}

Poly1D shifted_legendre(int n) {
  const auto& c = shifted_legendre_int(n);
  std::vector<Rational> r;
  r.reserve(c.size());
  for (const auto& v : c) r.emplace_back(v);
  return Poly1D(std::move(r));
}

Poly1D basis_fn(int n) {
  const auto& c = basis_numerator_int(n);
  const Rational s(1, static_cast<unsigned long>(n) * static_cast<unsigned long>(n + 1));
  std::vector<Rational> r;
  r.reserve(c.size());
  for (const auto& v : c) r.emplace_back(Rational(v) * s);
  return Poly1D(std::move(r));
}

Interval eval_int_poly(const std::vector<BigInt>& p, double x, const BigInt& den) {
  if (p.empty()) return Interval(0.0);
  if (!std::isfinite(x)) throw Error(ErrorCode::ArgumentOutOfRange, "evaluation at non-finite point");
  const std::size_t n = p.size() - 1;
  if (x == 0.0) return ratio_to_interval(p[0], den);
  int ex = 0;
  const double f = std::frexp(x, &ex);
  auto m = static_cast<long long>(std::ldexp(f, 53));
  long e = static_cast<long>(ex) - 53;
  while ((m & 1LL) == 0) {
    m >>= 1;
    ++e;
  }
  const BigInt mm(static_cast<long>(m));
  BigInt s = p[n];
  if (e >= 0) {
    BigInt xv = mm;
    mpz_mul_2exp(xv.get_mpz_t(), xv.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    for (std::size_t k = n; k-- > 0;) s = s * xv + p[k];
    return ratio_to_interval(s, den);
  }
  const auto d = static_cast<mp_bitcnt_t>(-e);
  // s_k = s_{k+1} * m + p_k * 2^{d (n-k)}; value = s_0 / 2^{d n}
  BigInt t;
  for (std::size_t k = n; k-- > 0;) {
    s *= mm;
    mpz_mul_2exp(t.get_mpz_t(), p[k].get_mpz_t(), d * (n - k));
    s += t;
  }
  BigInt scale = den;
  mpz_mul_2exp(scale.get_mpz_t(), scale.get_mpz_t(), d * n);
  return ratio_to_interval(s, scale);
}

void basis_values(double x, int N, double* phi, double* dphi) {
  const double t = 2.0 * x - 1.0;
  double pm1 = 1.0;  // P_{n-1}
  double p = t;      // P_n
  double pp1 = 0.0;  // P_{n+1}
  for (int n = 1; n <= N; ++n) {
    pp1 = ((2.0 * n + 1.0) * t * p - n * pm1) / (n + 1.0);
    phi[n - 1] = (pm1 - pp1) / (2.0 * (2.0 * n + 1.0));
    if (dphi != nullptr) dphi[n - 1] = -p;
    pm1 = p;
    p = pp1;
  }
}

std::vector<Interval> basis_enclosures(const Interval& X, int N) {
  if (X.lo() < 0.0 || X.hi() > 1.0) throw Error(ErrorCode::ArgumentOutOfRange, "basis enclosure outside [0,1]");
  const double x0 = X.mid();
  const double r = std::fmax(sub_up(X.hi(), x0), sub_up(x0, X.lo()));
  const Interval spread(-r, r);  // |phi_n'| = |P_n| <= 1 on [0,1]
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    const BigInt den(static_cast<unsigned long>(n) * static_cast<unsigned long>(n + 1));
    Interval v = eval_int_poly(basis_numerator_int(n), x0, den);
    if (r > 0) v += spread;
    out.push_back(v);
  }
  return out;
}

// ------------------------------------------------------------ SpectralFn --

SpectralFn::SpectralFn(Eigen::MatrixXd coeffs) : u(std::move(coeffs)) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::NonSquare, "spectral coefficients must be N x N");
}

double SpectralFn::operator()(double x, double y) const {
  const int N = order();
  Eigen::VectorXd px(N);
  Eigen::VectorXd py(N);
  basis_values(x, N, px.data());
  basis_values(y, N, py.data());
  return px.dot(u * py);
}

SpectralFn SpectralFn::padded(int N) const {
  if (N < order()) throw Error(ErrorCode::ArgumentOutOfRange, "padding to a smaller order");
  SpectralFn r(N);
  r.u.topLeftCorner(order(), order()) = u;
  return r;
}

void write_spectral(std::ostream& os, const SpectralFn& f) {
  const int N = f.order();
  os << N << '\n';
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) os << to_hex(f.u(i, j)) << '\n';
}

SpectralFn read_spectral(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    throw Error(ErrorCode::ParseError, "unexpected end of spectral file");
  };
  const std::string head = next_line();
  int N = 0;
  try {
    N = std::stoi(head);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad order line '" + head + "'");
  }
  if (N < 1 || N > 4096) throw Error(ErrorCode::ParseError, "order out of range");
  SpectralFn f(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) f.u(i, j) = parse_hex(next_line());
  return f;
}

void save_spectral(const std::string& path, const SpectralFn& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_spectral(os, f);
}

SpectralFn load_spectral(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_spectral(is);
}

// ---------------------------------------------------------------- Poly2D --

Poly2D::Poly2D(int deg_x, int deg_y)
    : dx_(deg_x), dy_(deg_y), num_(static_cast<std::size_t>(deg_x + 1) * (deg_y + 1)) {
  if (deg_x < 0 || deg_y < 0) throw Error(ErrorCode::ArgumentOutOfRange, "negative degree");
}

Poly2D Poly2D::constant(const Rational& c) { return monomial(0, 0, c); }

Poly2D Poly2D::monomial(int a, int b, const Rational& c) {
  Poly2D p(a, b);
  p.num(a, b) = c.get_num();
  p.den_ = c.get_den();
  return p;
}

void Poly2D::set_den(BigInt d) {
  if (d <= 0) throw Error(ErrorCode::ArgumentOutOfRange, "denominator must be positive");
  den_ = std::move(d);
}

Rational Poly2D::coeff(int a, int b) const {
  if (a > dx_ || b > dy_) return Rational(0);
  Rational q(num(a, b), den_);
  q.canonicalize();
  return q;
}

bool Poly2D::is_zero() const {
  return std::all_of(num_.begin(), num_.end(), [](const BigInt& v) { return v == 0; });
}

Rational Poly2D::operator()(const Rational& x, const Rational& y) const {
  Rational r = 0;
  for (int a = dx_; a >= 0; --a) {
    Rational row = 0;
    for (int b = dy_; b >= 0; --b) row = row * y + Rational(num(a, b));
    r = r * x + row;
  }
  r /= Rational(den_);
  return r;
}

namespace {

// Coefficients as intervals, row-major (dx+1) x (dy+1).
std::vector<Interval> interval_coeffs(const Poly2D& f) {
  std::vector<Interval> c;
  c.reserve(static_cast<std::size_t>(f.deg_x() + 1) * (f.deg_y() + 1));
  for (int a = 0; a <= f.deg_x(); ++a)
    for (int b = 0; b <= f.deg_y(); ++b) c.push_back(ratio_to_interval(f.num(a, b), f.den()));
  return c;
}

Interval horner2(const std::vector<Interval>& c, int dx, int dy, const Interval& x, const Interval& y) {
  Interval r(0.0);
  for (int a = dx; a >= 0; --a) {
    Interval row(0.0);
    for (int b = dy; b >= 0; --b) row = row * y + c[static_cast<std::size_t>(a) * (dy + 1) + b];
    r = r * x + row;
  }
  return r;
}

}  // namespace

Interval Poly2D::eval(const Interval& x, const Interval& y) const {
  return horner2(interval_coeffs(*this), dx_, dy_, x, y);
}

void Poly2D::normalize() {
  int nx = -1;
  int ny = -1;
  BigInt g = 0;
  for (int a = 0; a <= dx_; ++a) {
    for (int b = 0; b <= dy_; ++b) {
      const BigInt& v = num(a, b);
      if (v == 0) continue;
      nx = std::max(nx, a);
      ny = std::max(ny, b);
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    }
  }
  if (nx < 0) {
    *this = Poly2D(0, 0);
    return;
  }
  mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), den_.get_mpz_t());
  Poly2D r(nx, ny);
  for (int a = 0; a <= nx; ++a) {
    for (int b = 0; b <= ny; ++b) {
      if (g != 1) {
        mpz_divexact(r.num(a, b).get_mpz_t(), num(a, b).get_mpz_t(), g.get_mpz_t());
      } else {
        r.num(a, b) = num(a, b);
      }
    }
  }
  if (g != 1) {
    mpz_divexact(r.den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  } else {
    r.den_ = den_;
  }
  *this = std::move(r);
}

bool operator==(const Poly2D& a, const Poly2D& b) {
  const int dx = std::max(a.dx_, b.dx_);
  const int dy = std::max(a.dy_, b.dy_);
  for (int i = 0; i <= dx; ++i) {
    for (int j = 0; j <= dy; ++j) {
      const BigInt va = (i <= a.dx_ && j <= a.dy_) ? a.num(i, j) : BigInt(0);
      const BigInt vb = (i <= b.dx_ && j <= b.dy_) ? b.num(i, j) : BigInt(0);
      if (va * b.den_ != vb * a.den_) return false;
    }
  }
  return true;
}

namespace {

Poly2D combine(const Poly2D& a, const Poly2D& b, int sign) {
  BigInt l;
  mpz_lcm(l.get_mpz_t(), a.den().get_mpz_t(), b.den().get_mpz_t());
  const BigInt sa = l / a.den();
  const BigInt sb = l / b.den();
  Poly2D r(std::max(a.deg_x(), b.deg_x()), std::max(a.deg_y(), b.deg_y()));
  for (int i = 0; i <= a.deg_x(); ++i)
    for (int j = 0; j <= a.deg_y(); ++j) r.num(i, j) += a.num(i, j) * sa;
  for (int i = 0; i <= b.deg_x(); ++i) {
    for (int j = 0; j <= b.deg_y(); ++j) {
      if (sign > 0) {
        r.num(i, j) += b.num(i, j) * sb;
      } else {
        r.num(i, j) -= b.num(i, j) * sb;
      }
    }
  }
  r.set_den(l);
  r.normalize();
  return r;
}

}  // namespace

Poly2D operator+(const Poly2D& a, const Poly2D& b) { return combine(a, b, +1); }
Poly2D operator-(const Poly2D& a, const Poly2D& b) { return combine(a, b, -1); }

Poly2D operator*(const Rational& s, const Poly2D& a) {
  Poly2D r(a.deg_x(), a.deg_y());
  for (int i = 0; i <= a.deg_x(); ++i)
    for (int j = 0; j <= a.deg_y(); ++j) r.num(i, j) = a.num(i, j) * s.get_num();
  r.set_den(a.den() * s.get_den());
  r.normalize();
  return r;
}

Poly2D coeff_product(const Poly2D& f, const Poly2D& g, int max_degree) {
  const int dx = f.deg_x() + g.deg_x();
  const int dy = f.deg_y() + g.deg_y();
  if (dx > max_degree || dy > max_degree) {
    throw Error(ErrorCode::DegreeOverflow, "product degree " + std::to_string(std::max(dx, dy)) +
                                               " exceeds cap " + std::to_string(max_degree));
  }
  Poly2D r(dx, dy);
  // Collect nonzero terms of g once.
  struct Term {
    int a;
    int b;
    const BigInt* v;
  };
  std::vector<Term> gt;
  for (int c = 0; c <= g.deg_x(); ++c)
    for (int d = 0; d <= g.deg_y(); ++d)
      if (g.num(c, d) != 0) gt.push_back({c, d, &g.num(c, d)});
  for (int a = 0; a <= f.deg_x(); ++a) {
    for (int b = 0; b <= f.deg_y(); ++b) {
      const BigInt& fv = f.num(a, b);
      if (fv == 0) continue;
      for (const Term& t : gt) {
        mpz_addmul(r.num(a + t.a, b + t.b).get_mpz_t(), fv.get_mpz_t(), t.v->get_mpz_t());
      }
    }
  }
  r.set_den(f.den() * g.den());
  r.normalize();
  return r;
}

Poly2D coeff_power(const Poly2D& f, int k, int max_degree) {
  if (k < 0) throw Error(ErrorCode::ArgumentOutOfRange, "negative power");
  if (static_cast<long>(k) * std::max(f.deg_x(), f.deg_y()) > max_degree) {
    throw Error(ErrorCode::DegreeOverflow, "power degree exceeds cap " + std::to_string(max_degree));
  }
  Poly2D result = Poly2D::constant(Rational(1));
  Poly2D base = f;
  while (k > 0) {
    if (k & 1) result = coeff_product(result, base, max_degree);
    k >>= 1;
    if (k > 0) base = coeff_product(base, base, max_degree);
  }
  return result;
}

Poly2D laplacian(const Poly2D& f) {
  Poly2D r(f.deg_x(), f.deg_y());
  for (int a = 0; a <= f.deg_x(); ++a) {
    for (int b = 0; b <= f.deg_y(); ++b) {
      const BigInt& v = f.num(a, b);
      if (v == 0) continue;
      if (a >= 2) r.num(a - 2, b) += v * static_cast<long>(a * (a - 1));
      if (b >= 2) r.num(a, b - 2) += v * static_cast<long>(b * (b - 1));
    }
  }
  r.set_den(f.den());
  r.normalize();
  return r;
}

Poly2D to_poly2d(const SpectralFn& f) {
  const int N = f.order();
  // L = lcm of n(n+1), so that L/(n(n+1)) * x(1-x)P_n' has integer coefficients.
  BigInt L = 1;
  for (int n = 1; n <= N; ++n) {
    const BigInt v(static_cast<unsigned long>(n) * static_cast<unsigned long>(n + 1));
    mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), v.get_mpz_t());
  }
  const int deg = N + 1;
  std::vector<std::vector<BigInt>> ax(static_cast<std::size_t>(deg + 1), std::vector<BigInt>(static_cast<std::size_t>(N)));
  for (int n = 1; n <= N; ++n) {
    const BigInt s = L / BigInt(static_cast<unsigned long>(n) * static_cast<unsigned long>(n + 1));
    const auto& p = basis_numerator_int(n);
    for (std::size_t a = 0; a < p.size(); ++a) ax[a][static_cast<std::size_t>(n - 1)] = p[a] * s;
  }
  // Dyadic coefficients over a common power of two.
  long E = 0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double v = f.u(i, j);
      if (!std::isfinite(v)) throw Error(ErrorCode::ArgumentOutOfRange, "non-finite spectral coefficient");
      if (v == 0.0) continue;
      int ex = 0;
      std::frexp(v, &ex);
      E = std::max(E, 53L - ex);
    }
  }
  std::vector<std::vector<BigInt>> U(static_cast<std::size_t>(N), std::vector<BigInt>(static_cast<std::size_t>(N)));
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double v = f.u(i, j);
      if (v == 0.0) continue;
      int ex = 0;
      const double fr = std::frexp(v, &ex);
      BigInt m(static_cast<long>(std::ldexp(fr, 53)));
      const long shift = ex - 53 + E;  // >= 0 by choice of E
      mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
      U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m;
    }
  }
  // T = U * ax^T  (N x (deg+1)); nums = ax * T.
  std::vector<std::vector<BigInt>> T(static_cast<std::size_t>(N), std::vector<BigInt>(static_cast<std::size_t>(deg + 1)));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const BigInt& uij = U[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (uij == 0) continue;
      for (int b = 0; b <= deg; ++b) {
        const BigInt& w = ax[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
        if (w != 0) mpz_addmul(T[i][b].get_mpz_t(), uij.get_mpz_t(), w.get_mpz_t());
      }
    }
  Poly2D r(deg, deg);
  for (int a = 0; a <= deg; ++a)
    for (int i = 0; i < N; ++i) {
      const BigInt& w = ax[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      if (w == 0) continue;
      for (int b = 0; b <= deg; ++b) mpz_addmul(r.num(a, b).get_mpz_t(), w.get_mpz_t(), T[i][b].get_mpz_t());
    }
  BigInt den = L * L;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(E));
  r.set_den(den);
  r.normalize();
  return r;
}

Poly2D to_poly2d(const Poly1D& px, const Poly1D& py) {
  Poly2D r(std::max(px.degree(), 0), std::max(py.degree(), 0));
  if (px.c.empty() || py.c.empty()) return r;
  BigInt dx = 1;
  BigInt dy = 1;
  for (const auto& v : px.c) mpz_lcm(dx.get_mpz_t(), dx.get_mpz_t(), v.get_den_mpz_t());
  for (const auto& v : py.c) mpz_lcm(dy.get_mpz_t(), dy.get_mpz_t(), v.get_den_mpz_t());
  for (int a = 0; a <= px.degree(); ++a) {
    const BigInt na = px.c[a].get_num() * (dx / px.c[a].get_den());
    for (int b = 0; b <= py.degree(); ++b) {
      r.num(a, b) = na * (py.c[b].get_num() * (dy / py.c[b].get_den()));
    }
  }
  r.set_den(dx * dy);
  r.normalize();
  return r;
}

Interval l2_norm_sq(const Poly2D& f) {
  if (f.is_zero()) return Interval(0.0);
  const int dx = f.deg_x();
  const int dy = f.deg_y();
  auto hankel = [](int d, BigInt& L) {
    L = 1;
    for (int k = 1; k <= 2 * d + 1; ++k) mpz_lcm_ui(L.get_mpz_t(), L.get_mpz_t(), static_cast<unsigned long>(k));
    std::vector<BigInt> h(static_cast<std::size_t>(2 * d + 1));
    for (int s = 0; s <= 2 * d; ++s) h[static_cast<std::size_t>(s)] = L / BigInt(s + 1);
    return h;  // H(a,c) = h[a+c]
  };
  BigInt lx;
  BigInt ly;
  const auto hx = hankel(dx, lx);
  const auto hy = hankel(dy, ly);
  // Y = Hx F, W = Y Hy, result = sum F .* W
  std::vector<BigInt> Y(static_cast<std::size_t>(dx + 1) * (dy + 1));
  for (int c = 0; c <= dx; ++c)
    for (int a = 0; a <= dx; ++a)
      for (int b = 0; b <= dy; ++b) {
        const BigInt& v = f.num(a, b);
        if (v != 0) mpz_addmul(Y[c * (dy + 1) + b].get_mpz_t(), hx[a + c].get_mpz_t(), v.get_mpz_t());
      }
  BigInt total = 0;
  BigInt w;
  for (int c = 0; c <= dx; ++c)
    for (int d = 0; d <= dy; ++d) {
      const BigInt& fv = f.num(c, d);
      if (fv == 0) continue;
      w = 0;
      for (int b = 0; b <= dy; ++b) mpz_addmul(w.get_mpz_t(), Y[c * (dy + 1) + b].get_mpz_t(), hy[b + d].get_mpz_t());
      mpz_addmul(total.get_mpz_t(), fv.get_mpz_t(), w.get_mpz_t());
    }
  const BigInt scale = f.den() * f.den() * lx * ly;
  const Interval r = ratio_to_interval(total, scale);
  return Interval(std::fmax(r.lo(), 0.0), r.hi());
}

namespace {

Interval range_rec(const std::vector<Interval>& c, int dx, int dy, const Box& b, int depth) {
  const Interval here = horner2(c, dx, dy, b.x, b.y);
  if (depth <= 0) return here;
  const double mx = b.x.mid();
  const double my = b.y.mid();
  const Interval xs[2] = {Interval(b.x.lo(), mx), Interval(mx, b.x.hi())};
  const Interval ys[2] = {Interval(b.y.lo(), my), Interval(my, b.y.hi())};
  Interval acc = range_rec(c, dx, dy, Box{xs[0], ys[0]}, depth - 1);
  acc = hull(acc, range_rec(c, dx, dy, Box{xs[0], ys[1]}, depth - 1));
  acc = hull(acc, range_rec(c, dx, dy, Box{xs[1], ys[0]}, depth - 1));
  acc = hull(acc, range_rec(c, dx, dy, Box{xs[1], ys[1]}, depth - 1));
  return intersect(here, acc);
}

}  // namespace

Interval eval_range(const Poly2D& f, const Box& b, int depth) {
  if (depth < 0) throw Error(ErrorCode::ArgumentOutOfRange, "negative subdivision depth");
  return range_rec(interval_coeffs(f), f.deg_x(), f.deg_y(), b, depth);
}

// ------------------------------------------------------------------ Gram --

Gram1D gram_1d(int N) {
  if (N < 1) throw Error(ErrorCode::ArgumentOutOfRange, "order must be >= 1");
  Gram1D g;
  g.stiffness.assign(static_cast<std::size_t>(N), std::vector<Rational>(static_cast<std::size_t>(N), Rational(0)));
  g.mass = g.stiffness;
  for (int n = 1; n <= N; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    g.stiffness[k][k] = Rational(1, static_cast<unsigned long>(2 * n + 1));
    // phi_n = (P_{n-1} - P_{n+1}) / (2(2n+1)) and orthogonality of P_n.
    const Rational s(1, static_cast<unsigned long>(4 * (2 * n + 1) * (2 * n + 1)));
    g.mass[k][k] = s * (Rational(1, static_cast<unsigned long>(2 * n - 1)) + Rational(1, static_cast<unsigned long>(2 * n + 3)));
    if (n + 2 <= N) {
      Rational v(-1, static_cast<unsigned long>(4 * (2 * n + 1) * (2 * n + 3) * (2 * n + 5)));
      v.canonicalize();
      g.mass[k][k + 2] = v;
      g.mass[k + 2][k] = v;
    }
  }
  return g;
}

GramMatrices gram_matrices(int N, const Interval& tau) {
  if (tau.lo() < 0) throw Error(ErrorCode::ArgumentOutOfRange, "tau must be >= 0");
  const Gram1D g = gram_1d(N);
  const int n2 = N * N;
  GramMatrices out{IntervalMatrix(n2, n2), IntervalMatrix(n2, n2), IntervalMatrix(n2, n2)};
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      if (std::abs(i - k) != 0 && std::abs(i - k) != 2) continue;
      for (int j = 0; j < N; ++j)
        for (int l = 0; l < N; ++l) {
          if (std::abs(j - l) != 0 && std::abs(j - l) != 2) continue;
          const Rational& Mik = g.mass[i][k];
          const Rational& Mjl = g.mass[j][l];
          const Rational st = g.stiffness[i][k] * Mjl + Mik * g.stiffness[j][l];
          const Rational ms = Mik * Mjl;
          const int I = i * N + j;
          const int J = k * N + l;
          const Interval sti = to_interval(st);
          const Interval msi = to_interval(ms);
          out.stiffness.set(I, J, sti);
          out.mass.set(I, J, msi);
          out.v_matrix.set(I, J, tau.is_point() && tau.lo() == 0.0 ? sti : sti + tau * msi);
        }
    }
  return out;
}

}  // namespace poscert
