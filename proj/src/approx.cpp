#include "poscert/approx.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "poscert/quadrature.hpp"

namespace poscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Nonlinearity {
  ProblemKind kind;
  int p;
  double c;  // eps^-2 for Allen-Cahn

  [[nodiscard]] double f(double u) const {
    if (kind == ProblemKind::LaneEmden) return std::pow(u, p);
    return c * (u - u * u * u);
  }
  [[nodiscard]] double df(double u) const {
    if (kind == ProblemKind::LaneEmden) return p * std::pow(u, p - 1);
    return c * (1.0 - 3.0 * u * u);
  }
};

// Everything that depends only on N and the quadrature order.
struct Discretization {
  int N;
  Eigen::MatrixXd S;    // 1D stiffness
  Eigen::MatrixXd M;    // 1D mass
  Eigen::MatrixXd Phi;  // m x N basis values at the nodes
  Eigen::VectorXd w;    // weights
  Eigen::MatrixXd W;    // w w^T

  Discretization(int n, int power) : N(n) {
    const Gram1D g = gram_1d(N);
    S.resize(N, N);
    M.resize(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        S(i, j) = g.stiffness[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d();
        M(i, j) = g.mass[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d();
      }
    const GaussRule& rule = gauss_legendre(gauss_points_for_degree((power + 1) * (N + 1)));
    Phi = basis_table_float(rule, N);
    w = Eigen::Map<const Eigen::VectorXd>(rule.w.data(), rule.m);
    W = w * w.transpose();
  }

  [[nodiscard]] Eigen::MatrixXd stiffness_apply(const Eigen::MatrixXd& C) const { return S * C * M + M * C * S; }

  [[nodiscard]] double v_norm(const Eigen::MatrixXd& C) const {
    return std::sqrt(std::max(0.0, (C.array() * stiffness_apply(C).array()).sum()));
  }

  [[nodiscard]] Eigen::MatrixXd residual(const Nonlinearity& nl, const Eigen::MatrixXd& C) const {
    const Eigen::MatrixXd U = Phi * C * Phi.transpose();
    const Eigen::MatrixXd G = W.array() * U.unaryExpr([&](double u) { return nl.f(u); }).array();
    return stiffness_apply(C) - Phi.transpose() * G * Phi;
  }

  [[nodiscard]] Eigen::MatrixXd jacobian(const Nonlinearity& nl, const Eigen::MatrixXd& C) const {
    const int m = static_cast<int>(Phi.rows());
    const int n2 = N * N;
    const Eigen::MatrixXd U = Phi * C * Phi.transpose();
    const Eigen::MatrixXd g = W.array() * U.unaryExpr([&](double u) { return nl.df(u); }).array();
    // T((i,k), b) = sum_a Phi(a,i) Phi(a,k) g(a,b);  R(b, (j,l)) = Phi(b,j) Phi(b,l)
    Eigen::MatrixXd T(n2, m);
    for (int b = 0; b < m; ++b) {
      const Eigen::MatrixXd tb = Phi.transpose() * g.col(b).asDiagonal() * Phi;
      T.col(b) = Eigen::Map<const Eigen::VectorXd>(tb.data(), n2);  // column-major: index k*N + i
    }
    Eigen::MatrixXd R(m, n2);
    for (int b = 0; b < m; ++b)
      for (int l = 0; l < N; ++l)
        for (int j = 0; j < N; ++j) R(b, l * N + j) = Phi(b, j) * Phi(b, l);
    const Eigen::MatrixXd JN = T * R;  // (k*N+i, l*N+j)
    // Unknowns ordered as vec(C) (column-major): index (j*N + i) for u_ij.
    Eigen::MatrixXd J(n2, n2);
    for (int l = 0; l < N; ++l)
      for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j)
          for (int i = 0; i < N; ++i)
            J(j * N + i, l * N + k) = S(i, k) * M(j, l) + M(i, k) * S(j, l) - JN(k * N + i, l * N + j);
    return J;
  }
};

Nonlinearity nonlinearity_for(const ProblemSpec& problem) {
  return Nonlinearity{problem.kind, problem.power(),
                      problem.kind == ProblemKind::AllenCahn ? problem.inv_eps_sq_float() : 0.0};
}

SpectralFn resize(const SpectralFn& f, int N) {
  SpectralFn r(N);
  const int k = std::min(N, f.order());
  r.u.topLeftCorner(k, k) = f.u.topLeftCorner(k, k);
  return r;
}

std::pair<SpectralFn, SolveReport> run_newton(const Nonlinearity& nl, int N, const SpectralFn& init,
                                              const SolveOptions& opts) {
  const Discretization d(N, nl.p);
  Eigen::MatrixXd C = resize(init, N).u;
  SolveReport rep;
  double prev_step = kInf;
  int growing = 0;
  Eigen::MatrixXd res = d.residual(nl, C);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::MatrixXd J = d.jacobian(nl, C);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SingularJacobian, "Newton Jacobian is numerically singular");
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(res.data(), N * N);
    Eigen::VectorXd dv = lu.solve(rhs);
    Eigen::MatrixXd D = Eigen::Map<const Eigen::MatrixXd>(dv.data(), N, N);
    // Backtrack on the residual while it is well above rounding level.
    const double r0 = res.norm();
    const double floor = 1e-10 * (1.0 + d.stiffness_apply(C).norm());
    double lambda = 1.0;
    Eigen::MatrixXd Cn = C + D;
    Eigen::MatrixXd resn = d.residual(nl, Cn);
    while (r0 > floor && resn.norm() > r0 && lambda > 1.0 / 64) {
      lambda *= 0.5;
      Cn = C + lambda * D;
      resn = d.residual(nl, Cn);
    }
    C = Cn;
    res = resn;
    const double step = lambda * d.v_norm(D);
    rep.iterations = it;
    rep.step_norm = step;
    rep.residual_norm = res.norm();
    if (!std::isfinite(step) || !std::isfinite(rep.residual_norm))
      throw Error(ErrorCode::NewtonDivergence, "Newton iterate is no longer finite");
    if (step <= opts.tol * (1.0 + d.v_norm(C))) {
      rep.converged = true;
      break;
    }
    growing = step > prev_step ? growing + 1 : 0;
    if (growing >= opts.divergence_window) throw Error(ErrorCode::NewtonDivergence, "Newton step norm keeps growing");
    prev_step = step;
  }
  const double big = C.cwiseAbs().maxCoeff();
  C = C.unaryExpr([&](double v) { return std::fabs(v) < 1e-30 * big ? 0.0 : v; });
  return {SpectralFn(C), rep};
}

bool plausible_allen_cahn(const SpectralFn& u) {
  const auto [lo, hi] = sample_range(u, 32);
  return lo > -0.1 && hi > 0.5 && hi < 1.2;
}

}  // namespace

SpectralFn default_init(const ProblemSpec& problem) {
  problem.validate();
  double peak = 1.0;
  if (problem.kind == ProblemKind::LaneEmden) {
    if (problem.p == 3) {
      peak = 6.6;
    } else if (problem.p == 5) {
      peak = 3.17;
    } else {
      // Nehari scaling along the ray s phi_1 phi_1: s^(p-1) = ||grad||^2 / int (phi_1 phi_1)^(p+1).
      const int p = problem.p;
      const double beta = std::tgamma(p + 2.0) * std::tgamma(p + 2.0) / std::tgamma(2.0 * p + 4.0);
      const double s = std::pow((1.0 / 45.0) / (beta * beta), 1.0 / (p - 1));
      peak = s / 16.0;
    }
  }
  SpectralFn f(problem.N);
  f.u(0, 0) = 16.0 * peak;
  return f;
}

std::pair<SpectralFn, SolveReport> newton(const ProblemSpec& problem, const SpectralFn& init, const SolveOptions& opts) {
  problem.validate();
  return run_newton(nonlinearity_for(problem), problem.N, init, opts);
}

std::pair<SpectralFn, SolveReport> solve(const ProblemSpec& problem, const std::optional<SpectralFn>& init,
                                         const SolveOptions& opts) {
  problem.validate();
  if (init || problem.kind == ProblemKind::LaneEmden) return newton(problem, init ? *init : default_init(problem), opts);

  const double target = problem.eps.get_d();
  const double start = 0.2;
  if (target >= start) return newton(problem, default_init(problem), opts);

  SolveOptions stage = opts;
  stage.tol = std::max(opts.tol, 1e-10);
  Nonlinearity nl = nonlinearity_for(problem);
  nl.c = 1.0 / (start * start);
  auto [u, rep] = run_newton(nl, problem.N, default_init(problem), stage);
  std::vector<double> path{start};
  double eps = start;
  double step = start - target;
  while (eps > target) {
    const double next = std::max(target, eps - step);
    bool ok = false;
    if (next > target) {
      nl.c = 1.0 / (next * next);
      try {
        auto [v, r] = run_newton(nl, problem.N, u, stage);
        if (r.converged && plausible_allen_cahn(v)) {
          u = v;
          ok = true;
        }
      } catch (const Error&) {
      }
    } else {
      try {
        auto [v, r] = newton(problem, u, opts);
        if (plausible_allen_cahn(v)) {
          path.push_back(target);
          r.eps_path = path;
          return {v, r};
        }
      } catch (const Error&) {
      }
    }
    if (ok) {
      eps = next;
      path.push_back(eps);
    } else {
      step *= 0.5;
      if (step < 1e-4) throw Error(ErrorCode::NewtonDivergence, "eps continuation stalled");
    }
  }
  throw Error(ErrorCode::NewtonDivergence, "eps continuation did not reach the target");
}

SpectralFn continuation(const ProblemSpec& problem, const SpectralFn& coarse) {
  if (coarse.order() > problem.N) throw Error(ErrorCode::ArgumentOutOfRange, "coarse order exceeds target order");
  return coarse.padded(problem.N);
}

Eigen::MatrixXd galerkin_residual(const ProblemSpec& problem, const SpectralFn& u) {
  problem.validate();
  const Discretization d(u.order(), problem.power());
  return d.residual(nonlinearity_for(problem), u.u);
}

std::pair<double, double> sample_range(const SpectralFn& u, int n) {
  double lo = kInf;
  double hi = -kInf;
  const int N = u.order();
  std::vector<std::vector<double>> phi(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(N)));
  for (int a = 0; a <= n; ++a) basis_values(static_cast<double>(a) / n, N, phi[static_cast<std::size_t>(a)].data());
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) {
      double s = 0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s += u.u(i, j) * phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] *
                                          phi[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  return {lo, hi};
}

}  // namespace poscert
