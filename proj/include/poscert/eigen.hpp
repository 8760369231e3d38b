#pragma once

// Verified enclosures for the eigenproblem
//   (u, v)_V = lambda ((tau + F'(u_hat)) u, v)   for all v,
// and the resulting bound K on the inverse of the linearized operator.

#include <string>
#include <vector>

#include "poscert/basis.hpp"
#include "poscert/interval_matrix.hpp"
#include "poscert/problem.hpp"

namespace poscert {

struct EigEnclosure {
  int k = 0;  // 1-based
  double lower = 0.0;
  double upper = 0.0;
};

struct KBound {
  Interval tau;
  double mu0_lower = 0.0;
  double K = 0.0;
};

/// Upper bound of max |u| over the unit square.
double max_abs(const SpectralFn& u);

/// Shift with tau + F'(u) > 0 almost everywhere, from a bound of max |u|.
Interval choose_tau(const SpectralFn& u, const ProblemSpec& problem);
Interval choose_tau(const ProblemSpec& problem, double max_abs_u);

/// Upper bound of sup |tau + F'(u)|.
double weight_sup(const ProblemSpec& problem, const Interval& tau, double max_abs_u);

struct Gevp {
  IntervalMatrix A;  // stiffness + tau mass
  IntervalMatrix B;  // mass weighted by tau + F'(u)
};

/// Matrices over phi_i(x) phi_j(y), i,j <= N, indexed (i-1)N + (j-1). B is
/// integrated by the rigorous Gauss rule, exact for the polynomial integrand.
/// Throws NonPositiveWeight unless tau + F'(u) > 0 almost everywhere is certified.
Gevp assemble_gevp(const SpectralFn& u, const ProblemSpec& problem, const Interval& tau, int N);

/// Verified enclosures of the discrete eigenvalues of A x = lambda B x for
/// symmetric A and symmetric positive definite B.
///
/// A floating decomposition of the midpoints supplies approximate
/// eigenpairs (Lambda, X). Upper bounds are Ritz values on span X_M, enclosed
/// through G = X_M^T B X_M and H = X_M^T A X_M with interval products:
///   theta_k <= (Lambda_k + ||H - Lambda||) / (1 - ||G - I||).
/// Lower bounds use Sylvester inertia: if A - sigma B + Y S Y^T is certified
/// positive definite with Y = B X_{k-1}, S >= 0, then at most k-1 eigenvalues
/// are <= sigma, so lambda_k > sigma. Both routes are per index, which keeps
/// the bounds relative to lambda_k instead of to the largest eigenvalue.
class GevpEnclosure {
 public:
  /// Throws IndefiniteB if the midpoint of B is not numerically definite.
  GevpEnclosure(IntervalMatrix A, IntervalMatrix B);

  [[nodiscard]] int size() const { return static_cast<int>(lambda_.size()); }
  /// Floating approximation of lambda^N_k (1-based).
  [[nodiscard]] double approx(int k) const { return lambda_(k - 1); }
  /// Certified lower bound of lambda^N_k. Throws VerificationFailure.
  double lower(int k);
  /// Certified upper bound of lambda^N_k (Ritz). Throws VerificationFailure.
  double upper(int k);
  Interval enclose(int k) { return Interval(lower(k), upper(k)); }

 private:
  void ritz(int count);

  IntervalMatrix A_, B_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd X_;
  std::vector<double> ritz_;
};

/// Enclosures of lambda^N_1..lambda^N_count, ascending.
std::vector<Interval> enclose_gevp(const IntervalMatrix& A, const IntervalMatrix& B, int count);

/// Upper bounds for lambda^N_1..lambda^N_M (hence for lambda_1..lambda_M).
std::vector<double> ritz_upper_bounds(const IntervalMatrix& A, const IntervalMatrix& B, int M);

/// Certified C_N^0 from the configured table. Throws MissingConstant.
double projection_constant_zero(int N, const std::string& table_path = "");
/// C_N^0 sqrt(1 + tau (C_N^0)^2), rounded up.
double projection_constant(int N, const Interval& tau, const std::string& table_path = "");
std::string default_projection_table();

/// lambda / (lambda C^2 W + 1) for each value, rounded down.
std::vector<double> lower_bounds(const std::vector<double>& lambda_n, double C, double weight_sup);

/// K = 1/mu0 from per-index enclosures and a lower bound of the next
/// eigenvalue. Throws EigenvalueStraddlesOne or TailTooShort.
KBound inverse_bound_K(const std::vector<EigEnclosure>& eigs, double tail_start, const Interval& tau = Interval(0.0));

struct InverseBound {
  Interval tau;
  double max_abs_u = 0.0;
  double weight_sup = 0.0;
  double C0 = 0.0;
  double C = 0.0;
  std::vector<Interval> discrete;  // lambda^N_k enclosures
  std::vector<EigEnclosure> eigs;  // lambda_k enclosures, k <= M
  int M = 0;
  double tail_lower = 0.0;
  KBound K;
};

/// Full computation of K with adaptive M. `order` sets the Legendre space of
/// the eigenproblem (0: the order of u_hat); larger orders tighten the bounds.
InverseBound inverse_bound(const SpectralFn& u, const ProblemSpec& problem, const Interval& tau,
                           const std::string& table_path = "", int order = 0);

}  // namespace poscert
