#pragma once

// Shifted Legendre polynomials on [0,1], the Dirichlet basis
//   phi_n(x) = x(1-x) P_n'(x) / (n(n+1)),  n >= 1,
// and exact bivariate polynomial algebra for functions on the unit square.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "poscert/interval.hpp"
#include "poscert/interval_matrix.hpp"
#include "poscert/rational.hpp"

namespace poscert {

/// Exact univariate polynomial, ascending monomial coefficients.
struct Poly1D {
  std::vector<Rational> c;

  Poly1D() = default;
  explicit Poly1D(std::vector<Rational> coeffs);

  /// -1 for the zero polynomial.
  [[nodiscard]] int degree() const { return static_cast<int>(c.size()) - 1; }
  [[nodiscard]] Rational operator()(const Rational& x) const;
  [[nodiscard]] Poly1D derivative() const;
  /// Exact integral over [0,1].
  [[nodiscard]] Rational integral01() const;
  void trim();

  friend bool operator==(const Poly1D&, const Poly1D&) = default;
};

Poly1D operator+(const Poly1D& a, const Poly1D& b);
Poly1D operator-(const Poly1D& a, const Poly1D& b);
Poly1D operator*(const Poly1D& a, const Poly1D& b);
Poly1D operator*(const Rational& s, const Poly1D& a);

Poly1D shifted_legendre(int n);
Poly1D basis_fn(int n);

/// Integer coefficients of P_n.
const std::vector<BigInt>& shifted_legendre_int(int n);
/// Integer coefficients of x(1-x) P_n', so that phi_n = that / (n(n+1)).
const std::vector<BigInt>& basis_numerator_int(int n);

/// Enclosure of p(x)/den for an integer polynomial p at a binary64 point x,
/// evaluated exactly in big-integer arithmetic.
Interval eval_int_poly(const std::vector<BigInt>& p, double x, const BigInt& den);

/// Floating values of phi_1..phi_N (out[0..N-1]) and of their derivatives
/// (-P_1..-P_N) at x. Not rigorous.
void basis_values(double x, int N, double* phi, double* dphi = nullptr);

/// Rigorous enclosures of phi_1..phi_N over a narrow interval X.
std::vector<Interval> basis_enclosures(const Interval& X, int N);

/// Function on the unit square given by its coefficients over phi_i(x) phi_j(y).
struct SpectralFn {
  Eigen::MatrixXd u;  // u(i-1, j-1) multiplies phi_i(x) phi_j(y)

  SpectralFn() = default;
  explicit SpectralFn(int N) : u(Eigen::MatrixXd::Zero(N, N)) {}
  explicit SpectralFn(Eigen::MatrixXd coeffs);

  [[nodiscard]] int order() const { return static_cast<int>(u.rows()); }
  /// Floating evaluation, for sampling and diagnostics.
  [[nodiscard]] double operator()(double x, double y) const;
  /// Coefficients embedded into a larger order (zero padding).
  [[nodiscard]] SpectralFn padded(int N) const;
};

void write_spectral(std::ostream& os, const SpectralFn& f);
SpectralFn read_spectral(std::istream& is);
void save_spectral(const std::string& path, const SpectralFn& f);
SpectralFn load_spectral(const std::string& path);

/// Closed axis-aligned box.
struct Box {
  Interval x;
  Interval y;
};

/// Exact bivariate polynomial: sum num(a,b) x^a y^b / den.
class Poly2D {
 public:
  Poly2D() : Poly2D(0, 0) {}
  /// Zero polynomial with room for the given degrees.
  Poly2D(int deg_x, int deg_y);

  static Poly2D constant(const Rational& c);
  static Poly2D monomial(int a, int b, const Rational& c = Rational(1));

  [[nodiscard]] int deg_x() const noexcept { return dx_; }
  [[nodiscard]] int deg_y() const noexcept { return dy_; }
  [[nodiscard]] const BigInt& num(int a, int b) const { return num_[idx(a, b)]; }
  BigInt& num(int a, int b) { return num_[idx(a, b)]; }
  [[nodiscard]] const BigInt& den() const noexcept { return den_; }
  void set_den(BigInt d);

  [[nodiscard]] Rational coeff(int a, int b) const;
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] Rational operator()(const Rational& x, const Rational& y) const;
  /// Natural interval extension (Horner in y, then in x).
  [[nodiscard]] Interval eval(const Interval& x, const Interval& y) const;

  /// Drops trailing zero rows/columns and divides out the common content.
  void normalize();

  friend bool operator==(const Poly2D& a, const Poly2D& b);

 private:
  [[nodiscard]] std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a) * (dy_ + 1) + b; }

  int dx_ = 0;
  int dy_ = 0;
  std::vector<BigInt> num_;
  BigInt den_ = 1;
};

Poly2D operator+(const Poly2D& a, const Poly2D& b);
Poly2D operator-(const Poly2D& a, const Poly2D& b);
Poly2D operator*(const Rational& s, const Poly2D& a);

/// Exact product. Throws DegreeOverflow when either result degree exceeds
/// max_degree.
Poly2D coeff_product(const Poly2D& f, const Poly2D& g, int max_degree = 1024);
/// f^k by repeated squaring, same degree cap.
Poly2D coeff_power(const Poly2D& f, int k, int max_degree = 1024);

Poly2D laplacian(const Poly2D& f);

/// Exact monomial expansion of a spectral function (its coefficients are
/// dyadic rationals, so nothing is rounded).
Poly2D to_poly2d(const SpectralFn& f);
Poly2D to_poly2d(const Poly1D& px, const Poly1D& py);

/// Enclosure of the integral of f^2 over the unit square.
Interval l2_norm_sq(const Poly2D& f);

/// Enclosure of the range of f on b: hull of natural interval extensions over
/// a uniform 2^depth x 2^depth subdivision.
Interval eval_range(const Poly2D& f, const Box& b, int depth);

/// Exact 1D Gram matrices of phi_1..phi_N: stiffness (diagonal 1/(2n+1)) and mass.
struct Gram1D {
  std::vector<std::vector<Rational>> stiffness;
  std::vector<std::vector<Rational>> mass;
};
Gram1D gram_1d(int N);

/// 2D stiffness and mass matrices over phi_i(x) phi_j(y), indexed by
/// (i-1)*N + (j-1).
struct GramMatrices {
  IntervalMatrix stiffness;
  IntervalMatrix mass;
  /// stiffness + tau * mass
  IntervalMatrix v_matrix;
};
GramMatrices gram_matrices(int N, const Interval& tau);

}  // namespace poscert
