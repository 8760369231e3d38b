#pragma once

#include <vector>

#include "poscert/interval.hpp"
#include "poscert/interval_matrix.hpp"

namespace poscert {

/// m-point Gauss-Legendre rule on [0,1]. Exact for polynomials of degree
/// <= 2m-1, so with enclosed nodes and weights it yields rigorous integrals
/// of polynomial integrands.
struct GaussRule {
  int m = 0;
  std::vector<Interval> nodes;    // each contains exactly one root of P_m
  std::vector<Interval> weights;  // enclosure of the weight at that root
  std::vector<double> x;          // floating nodes (midpoints of the enclosures)
  std::vector<double> w;          // floating weights
};

/// Cached, thread-safe. Roots are isolated by exact sign evaluation of the
/// integer shifted Legendre polynomial at binary64 points.
const GaussRule& gauss_legendre(int m);

/// Smallest m exact for total 1D degree deg.
inline int gauss_points_for_degree(int deg) { return deg / 2 + 1; }

/// Enclosures of phi_1..phi_N at the rule nodes: an m x N interval matrix.
IntervalMatrix basis_table(const GaussRule& rule, int N);
/// Floating values phi_n(x_a) (m x N).
Eigen::MatrixXd basis_table_float(const GaussRule& rule, int N);
/// Floating derivative values phi_n'(x_a) (m x N).
Eigen::MatrixXd basis_derivative_table_float(const GaussRule& rule, int N);

}  // namespace poscert
