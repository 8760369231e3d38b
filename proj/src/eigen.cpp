#include "poscert/eigen.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "poscert/quadrature.hpp"
#include "poscert/range.hpp"
#include "poscert/verified_pd.hpp"

namespace poscert {

namespace {

using namespace rounding;

// The true matrix is symmetric, so both (i,j) and (j,i) enclose it.
IntervalMatrix symmetrized(const IntervalMatrix& m) {
  const Eigen::MatrixXd lo = m.lo().cwiseMax(m.lo().transpose());
  const Eigen::MatrixXd hi = m.hi().cwiseMin(m.hi().transpose());
  if (!(lo.array() <= hi.array()).all())
    throw Error(ErrorCode::VerificationFailure, "symmetric enclosure is empty");
  return IntervalMatrix::from_bounds(lo, hi);
}

bool is_zero_fn(const SpectralFn& u) { return u.u.size() == 0 || (u.u.array() == 0.0).all(); }

Interval weight_at(const ProblemSpec& problem, const Interval& tau, const Interval& u) {
  if (problem.kind == ProblemKind::LaneEmden) return tau + Interval(static_cast<double>(problem.p)) * pow(u, problem.p - 1);
  return tau + problem.inv_eps_sq() * (1.0 - 3.0 * sqr(u));
}

// Lower bound of tau + F'(u) over |u| <= M.
double weight_inf(const ProblemSpec& problem, const Interval& tau, double max_abs_u) {
  if (problem.kind == ProblemKind::LaneEmden) return tau.lo();
  return weight_at(problem, tau, Interval(max_abs_u)).lo();
}

}  // namespace

double max_abs(const SpectralFn& u) {
  if (is_zero_fn(u)) return 0.0;
  const SpectralRange sr(u);
  const Interval r = sr.global_range(Box{Interval(0.0, 1.0), Interval(0.0, 1.0)});
  return std::max(std::fabs(r.lo()), std::fabs(r.hi()));
}

Interval choose_tau(const ProblemSpec& problem, double max_abs_u) {
  problem.validate();
  if (problem.kind == ProblemKind::LaneEmden) return Interval(0.0);
  // -F'(u) = eps^-2 (3u^2 - 1) <= eps^-2 (3M^2 - 1).
  const Interval s = problem.inv_eps_sq() * (3.0 * sqr(Interval(max_abs_u)) - 1.0);
  if (s.hi() < 0) return Interval(0.0);
  return Interval(std::floor(s.hi()) + 1.0);
}

Interval choose_tau(const SpectralFn& u, const ProblemSpec& problem) { return choose_tau(problem, max_abs(u)); }

double weight_sup(const ProblemSpec& problem, const Interval& tau, double max_abs_u) {
  if (problem.kind == ProblemKind::LaneEmden) return weight_at(problem, tau, Interval(max_abs_u)).hi();
  // Affine in u^2 over [0, M^2]: extremes at the ends.
  const double a = abs(weight_at(problem, tau, Interval(0.0))).hi();
  const double b = abs(weight_at(problem, tau, Interval(max_abs_u))).hi();
  return std::max(a, b);
}

Gevp assemble_gevp(const SpectralFn& u, const ProblemSpec& problem, const Interval& tau, int N) {
  problem.validate();
  if (N < 1) throw Error(ErrorCode::ArgumentOutOfRange, "GEVP order must be >= 1");
  if (tau.lo() < 0) throw Error(ErrorCode::ArgumentOutOfRange, "tau must be >= 0");
  const bool zero = is_zero_fn(u);
  const double M = zero ? 0.0 : max_abs(u);
  if (problem.kind == ProblemKind::LaneEmden) {
    // p u^(p-1) >= 0 vanishes only on the zero set of u, a null set unless u = 0.
    if (!(tau.lo() > 0) && zero)
      throw Error(ErrorCode::NonPositiveWeight, "tau + F'(u) vanishes identically");
  } else if (!(weight_inf(problem, tau, M) > 0)) {
    throw Error(ErrorCode::NonPositiveWeight, "tau + F'(u) > 0 is not certified; increase tau");
  }

  Gevp g;
  g.A = gram_matrices(N, tau).v_matrix;

  const int Nu = zero ? 0 : u.order();
  const int wdeg = zero ? 0 : (problem.power() - 1) * (Nu + 1);
  const GaussRule& rule = gauss_legendre(gauss_points_for_degree(wdeg + 2 * (N + 1)));
  const int m = rule.m;
  const IntervalMatrix Phi = basis_table(rule, N);

  // Weight at the tensor nodes times the weight products.
  IntervalMatrix G(m, m);
  {
    IntervalMatrix U(m, m);
    if (!zero) {
      const IntervalMatrix Pu = basis_table(rule, Nu);
      U = Pu * IntervalMatrix::from_point(u.u) * Pu.transpose();
    }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        G.set(a, b, rule.weights[static_cast<std::size_t>(a)] * rule.weights[static_cast<std::size_t>(b)] *
                        weight_at(problem, tau, U(a, b)));
  }

  const int n2 = N * N;
  // T((i,k), b) = sum_a Phi(a,i) Phi(a,k) G(a,b);  R(b, (j,l)) = Phi(b,j) Phi(b,l).
  IntervalMatrix T(n2, m);
  const IntervalMatrix PhiT = Phi.transpose();
  for (int b = 0; b < m; ++b) {
    IntervalMatrix D(m, N);
    for (int a = 0; a < m; ++a)
      for (int k = 0; k < N; ++k) D.set(a, k, G(a, b) * Phi(a, k));
    const IntervalMatrix tb = PhiT * D;
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) T.set(i * N + k, b, tb(i, k));
  }
  IntervalMatrix R(m, n2);
  for (int b = 0; b < m; ++b)
    for (int j = 0; j < N; ++j)
      for (int l = 0; l < N; ++l) R.set(b, j * N + l, Phi(b, j) * Phi(b, l));
  const IntervalMatrix JN = T * R;

  IntervalMatrix B(n2, n2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) B.set(i * N + j, k * N + l, JN(i * N + k, j * N + l));
  g.B = symmetrized(B);
  return g;
}

GevpEnclosure::GevpEnclosure(IntervalMatrix A, IntervalMatrix B) : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() != A_.cols() || B_.rows() != B_.cols() || A_.rows() != B_.rows())
    throw Error(ErrorCode::DimensionMismatch, "GEVP matrices must be square of equal size");
  A_ = symmetrized(A_);
  B_ = symmetrized(B_);
  const Eigen::MatrixXd Am = A_.mid();
  const Eigen::MatrixXd Bm = B_.mid();
  // Solved as B x = nu A x: A is well conditioned while B inherits the
  // degeneracy of the weight, so factoring A keeps the leading eigenvectors
  // accurate. lambda = 1/nu, and x / sqrt(nu) is B-normalized.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Bm, Am, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::IndefiniteB, "generalized eigensolver failed");
  const Eigen::Index n = Am.rows();
  const Eigen::VectorXd& nu = es.eigenvalues();
  if (!(nu(n - 1) > 0)) throw Error(ErrorCode::IndefiniteB, "B has no positive direction");
  lambda_.resize(n);
  X_.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = nu(n - 1 - k);
    lambda_(k) = v > 0 ? 1.0 / v : kInf;
    X_.col(k) = es.eigenvectors().col(n - 1 - k) / (v > 0 ? std::sqrt(v) : 1.0);
  }
}

void GevpEnclosure::ritz(int count) {
  // Compression to span X_count only: later columns are less accurate and
  // would inflate the residual norm for the leading ones.
  const int M = count;
  if (!std::isfinite(lambda_(M - 1))) throw Error(ErrorCode::VerificationFailure, "no approximate eigenpair for this index");
  const Eigen::MatrixXd Xm = X_.leftCols(M);
  const Eigen::MatrixXd XmT = Xm.transpose();
  const IntervalMatrix H = XmT * (A_ * Xm);
  const IntervalMatrix G = XmT * (B_ * Xm);
  const Eigen::VectorXd lam = lambda_.head(M);
  const double phi = spectral_norm_upper(H - IntervalMatrix::from_point(lam.asDiagonal().toDenseMatrix())).hi();
  const double eps = spectral_norm_upper(G - IntervalMatrix::identity(M)).hi();
  if (!(eps < 1)) throw Error(ErrorCode::VerificationFailure, "Ritz vectors are not B-orthonormal enough");
  if (static_cast<int>(ritz_.size()) < M) ritz_.resize(static_cast<std::size_t>(M), kInf);
  ritz_[static_cast<std::size_t>(M - 1)] = div_up(add_up(lam(M - 1), phi), sub_down(1.0, eps));
}

double GevpEnclosure::upper(int k) {
  if (k < 1 || k > size()) throw Error(ErrorCode::ArgumentOutOfRange, "eigenvalue index out of range");
  if (k > static_cast<int>(ritz_.size()) || ritz_[static_cast<std::size_t>(k - 1)] == kInf) ritz(k);
  return ritz_[static_cast<std::size_t>(k - 1)];
}

double GevpEnclosure::lower(int k) {
  if (k < 1 || k > size()) throw Error(ErrorCode::ArgumentOutOfRange, "eigenvalue index out of range");
  const double lk = lambda_(k - 1);
  if (!std::isfinite(lk)) throw Error(ErrorCode::VerificationFailure, "no approximate eigenpair for this index");
  const double scale = std::max(1.0, std::fabs(lk));
  IntervalMatrix P(size(), size());
  if (k > 1) {
    const Eigen::MatrixXd Xd = X_.leftCols(k - 1);
    const IntervalMatrix Y = B_ * Xd;
    // Deflated modes land near Lambda_k + scale, well clear of zero.
    Eigen::VectorXd s(k - 1);
    for (int i = 0; i < k - 1; ++i) s(i) = lk - lambda_(i) + scale;
    P = (Y * s.asDiagonal().toDenseMatrix()) * Y.transpose();
  }
  for (double rel = 1e-9; rel <= 1e-1; rel *= 10) {
    const double sigma = lk - rel * scale;
    if (sigma <= 0) return 0.0;  // A is positive definite, so lambda >= 0 anyway
    const IntervalMatrix C = symmetrized(A_ - Interval(sigma) * B_ + P);
    if (verified_pd(C)) return sigma;
  }
  throw Error(ErrorCode::VerificationFailure, "could not certify a lower bound for eigenvalue " + std::to_string(k));
}

std::vector<Interval> enclose_gevp(const IntervalMatrix& A, const IntervalMatrix& B, int count) {
  GevpEnclosure ge(A, B);
  std::vector<Interval> out;
  for (int k = 1; k <= std::min(count, ge.size()); ++k) out.push_back(ge.enclose(k));
  return out;
}

std::vector<double> ritz_upper_bounds(const IntervalMatrix& A, const IntervalMatrix& B, int M) {
  GevpEnclosure ge(A, B);
  std::vector<double> out;
  for (int k = 1; k <= std::min(M, ge.size()); ++k) out.push_back(ge.upper(k));
  return out;
}

std::string default_projection_table() {
  if (const char* env = std::getenv("POSCERT_CONFIG_DIR")) return std::string(env) + "/projection_constants.json";
  return std::string(POSCERT_CONFIG_DIR) + "/projection_constants.json";
}

double projection_constant_zero(int N, const std::string& table_path) {
  const std::string path = table_path.empty() ? default_projection_table() : table_path;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingConstant, "cannot open projection constant table " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (j.value("dimension", 0) != 2) throw Error(ErrorCode::MissingConstant, "table is not for dimension 2");
  const auto& entries = j.at("entries");
  const std::string key = std::to_string(N);
  if (!entries.contains(key)) throw Error(ErrorCode::MissingConstant, "no C_N^0 configured for N = " + key);
  return parse_hex(entries.at(key).get<std::string>());
}

double projection_constant(int N, const Interval& tau, const std::string& table_path) {
  const Interval c0(projection_constant_zero(N, table_path));
  if (tau.lo() < 0) throw Error(ErrorCode::ArgumentOutOfRange, "tau must be >= 0");
  return (c0 * sqrt(1.0 + tau * sqr(c0))).hi();
}

std::vector<double> lower_bounds(const std::vector<double>& lambda_n, double C, double weight_sup) {
  std::vector<double> out;
  out.reserve(lambda_n.size());
  const double c2w = mul_up(mul_up(C, C), weight_sup);
  for (double l : lambda_n) out.push_back(std::max(0.0, div_down(l, add_up(mul_up(l, c2w), 1.0))));
  return out;
}

namespace {

// Lower bound of |1 - 1/lambda| over the enclosure.
double mu_lower(double lo, double hi, int k) {
  if (lo <= 1.0 && hi >= 1.0)
    throw Error(ErrorCode::EigenvalueStraddlesOne,
                "eigenvalue " + std::to_string(k) + " enclosure [" + std::to_string(lo) + ", " + std::to_string(hi) + "] contains 1");
  if (!(lo > 0)) throw Error(ErrorCode::VerificationFailure, "eigenvalue lower bound is not positive");
  if (hi < 1.0) return sub_down(div_down(1.0, hi), 1.0);
  return sub_down(1.0, div_up(1.0, lo));
}

}  // namespace

KBound inverse_bound_K(const std::vector<EigEnclosure>& eigs, double tail_start, const Interval& tau) {
  double mu = 1.0;
  for (const auto& e : eigs) mu = std::min(mu, mu_lower(e.lower, e.upper, e.k));
  if (!(tail_start > 1.0)) throw Error(ErrorCode::TailTooShort, "tail lower bound does not exceed 1");
  const double tail_mu = sub_down(1.0, div_up(1.0, tail_start));
  if (tail_mu < mu) throw Error(ErrorCode::TailTooShort, "tail does not dominate the explicit eigenvalues");
  if (!(mu > 0)) throw Error(ErrorCode::VerificationFailure, "mu0 lower bound is not positive");
  return KBound{tau, mu, div_up(1.0, mu)};
}

InverseBound inverse_bound(const SpectralFn& u, const ProblemSpec& problem, const Interval& tau,
                           const std::string& table_path, int order) {
  InverseBound r;
  r.tau = tau;
  const int N = order > 0 ? order : u.order();
  if (N < u.order()) throw Error(ErrorCode::ArgumentOutOfRange, "eigen order below the order of u_hat");
  r.max_abs_u = max_abs(u);
  r.weight_sup = weight_sup(problem, tau, r.max_abs_u);
  r.C0 = projection_constant_zero(N, table_path);
  r.C = projection_constant(N, tau, table_path);
  const Gevp g = assemble_gevp(u, problem, tau, N);
  GevpEnclosure ge(g.A, g.B);

  double mu = 1.0;
  for (int k = 1; k <= ge.size(); ++k) {
    const double low_n = ge.lower(k);
    const double low = lower_bounds({low_n}, r.C, r.weight_sup)[0];
    if (k > 1 && low > 1.0 && sub_down(1.0, div_up(1.0, low)) >= mu) {
      r.M = k - 1;
      r.tail_lower = low;
      r.K = inverse_bound_K(r.eigs, low, tau);
      return r;
    }
    const double up = ge.upper(k);
    r.discrete.emplace_back(low_n, up);
    r.eigs.push_back(EigEnclosure{k, low, up});
    mu = std::min(mu, mu_lower(low, up, k));
  }
  throw Error(ErrorCode::TailTooShort, "no tail bound within the discrete spectrum");
}

}  // namespace poscert
