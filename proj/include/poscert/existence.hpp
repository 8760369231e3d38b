#pragma once

// Existence of a solution near an approximation u_hat, in the V-norm
// ||v||_V^2 = ||grad v||^2 + tau ||v||^2, and the derived L-infinity radius.
//
// Certified data: delta >= ||F(u_hat)||_{V*}, K >= ||F'(u_hat)^{-1}||, and a
// non-decreasing g bounding the Lipschitz modulus of F'. Any alpha with
//   delta <= alpha/K - G(alpha),  K g(alpha) < 1
// is an existence radius.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "poscert/basis.hpp"
#include "poscert/eigen.hpp"
#include "poscert/embedding.hpp"
#include "poscert/problem.hpp"

namespace poscert {

/// Delta(u_hat) + F(u_hat) as an exact polynomial. F(u) = u^p needs odd p.
Poly2D residual_poly(const SpectralFn& u, const ProblemSpec& problem);

/// ||Laplace(u_hat) + F(u_hat)||_{L^2}, exact polynomial route.
Interval residual_l2_exact(const SpectralFn& u, const ProblemSpec& problem);
/// Same norm by an interval Gauss-Legendre rule exact for the squared
/// residual; nodal values come from Legendre recurrences, not monomials.
Interval residual_l2_quadrature(const SpectralFn& u, const ProblemSpec& problem);

/// C2 times the exact residual norm, rounded up.
double residual_delta(const SpectralFn& u, const ProblemSpec& problem, const Interval& C2);

/// Integral of u^q over the unit square for even q.
Interval power_integral_exact(const SpectralFn& u, int q);
Interval power_integral_quadrature(const SpectralFn& u, int q);

struct NormValue {
  int q = 0;
  Interval integral;  // of u^q
  double norm = 0;    // upper bound of ||u||_{L^q}
  std::string method;  // "exact" or "gauss"
};

/// ||u||_{L^q} upper bound. Exact while the power has degree <= exact_degree_limit
/// per variable, Gauss quadrature beyond (still exact in exact arithmetic,
/// enclosed in interval arithmetic).
NormValue lq_norm(const SpectralFn& u, int q, int exact_degree_limit = 200);

/// Smallest x with x^q >= v, rounded up.
double root_up(double v, int q);

/// g(t) = b p (p-1) C^3 K t (n + C t)^(p-2) and its antiderivative, with
/// b = ||b||_inf of F(u) = a u + b u^p, C = C_{p+1}, n = ||u_hat||_{L^{p+1}}.
struct Lipschitz {
  int p = 3;
  double b_sup = 0;
  double C = 0;
  double u_norm = 0;
  double K = 0;

  [[nodiscard]] Interval g(double t) const;
  [[nodiscard]] Interval G(double t) const;
};

Lipschitz lipschitz_g(const ProblemSpec& problem, double K, double C_p1, double u_norm_p1);

struct AlphaSearch {
  double alpha = 0;
  double slack = 0;  // lower bound of alpha/K - G(alpha) - delta at the result
};

/// Smallest alpha on a refined geometric grid over [K delta (1 - 1e-3), 10 K delta]
/// that satisfies both inequalities. Throws NoAdmissibleAlpha.
AlphaSearch find_alpha(double delta, double K, const Lipschitz& lip);

/// Both inequalities in interval arithmetic.
bool alpha_admissible(double alpha, double delta, double K, const Lipschitz& lip);

/// Inputs of the L-infinity estimate ||u - u_hat||_inf <= r2.
struct LinfInputs {
  LinfConstants c;
  double C2 = 0;
  double C3 = 0;
  double Cq = 0;        // C_{6(p-1)} (Lane-Emden) or C_12 (Allen-Cahn)
  double u_norm_q = 0;  // ||u_hat|| in the same L^q
  double residual_l2 = 0;
};

double linf_radius(const ProblemSpec& problem, double rho, const LinfInputs& in);

/// Exponent q of the norm entering linf_radius.
int linf_norm_exponent(const ProblemSpec& problem);

struct ExistenceCertificate {
  ProblemSpec problem;
  std::string u_hash;
  Interval tau;
  double delta = 0;
  double K = 0;
  Lipschitz lip;
  std::string lip_norm_method;
  bool g_includes_K = true;
  double alpha = 0;  // r1
  double rho = 0;    // radius used for r2
  LinfInputs linf;
  std::string linf_norm_method;
  double r2 = 0;
  Interval residual_exact;
  Interval residual_quadrature;
};

/// 64-bit FNV-1a of the serialized coefficients.
std::string spectral_hash(const SpectralFn& u);

struct ExistenceOptions {
  int exact_degree_limit = 200;
  std::string projection_table;
};

/// Full pipeline from u_hat and a computed inverse bound.
ExistenceCertificate verify_existence(const SpectralFn& u, const ProblemSpec& problem, const InverseBound& inv,
                                      const ExistenceOptions& opts = {});

/// Re-verifies both inequalities and the r2 formula from stored fields only.
bool recheck(const ExistenceCertificate& cert);

nlohmann::json to_json(const ExistenceCertificate& cert);
ExistenceCertificate existence_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const ProblemSpec& p);
ProblemSpec problem_from_json(const nlohmann::json& j);

}  // namespace poscert
