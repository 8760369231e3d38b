#pragma once

// Floating-point Newton-Galerkin solver for the approximate solution. Nothing
// here is rigorous; the verification modules take the result as given.

#include <optional>
#include <utility>
#include <vector>

#include "poscert/basis.hpp"
#include "poscert/problem.hpp"

namespace poscert {

struct SolveReport {
  int iterations = 0;
  double step_norm = 0.0;      // V-norm of the last Newton step
  double residual_norm = 0.0;  // Euclidean norm of the discrete Galerkin residual
  bool converged = false;
  std::vector<double> eps_path;  // Allen-Cahn continuation stages, if any
};

struct SolveOptions {
  double tol = 1e-13;       // stop when step <= tol (1 + ||u||_V)
  int max_iter = 50;
  int divergence_window = 5;  // consecutive growing steps before giving up
};

/// Positive bump c phi_1(x) phi_1(y).
SpectralFn default_init(const ProblemSpec& problem);

/// Plain Newton from init (padded or truncated to problem.N).
std::pair<SpectralFn, SolveReport> newton(const ProblemSpec& problem, const SpectralFn& init,
                                          const SolveOptions& opts = {});

/// Newton from init, or from the default initializer; Allen-Cahn without an
/// init steps eps down from 0.2 with step halving.
std::pair<SpectralFn, SolveReport> solve(const ProblemSpec& problem, const std::optional<SpectralFn>& init = std::nullopt,
                                         const SolveOptions& opts = {});

/// Zero-padded embedding of a coarse solution into order problem.N.
SpectralFn continuation(const ProblemSpec& problem, const SpectralFn& coarse);

/// Floating Galerkin residual K u - (F(u), phi_i phi_j), as an N x N matrix.
Eigen::MatrixXd galerkin_residual(const ProblemSpec& problem, const SpectralFn& u);

/// Min and max of u over a uniform (n+1) x (n+1) sample grid.
std::pair<double, double> sample_range(const SpectralFn& u, int n = 64);

}  // namespace poscert
