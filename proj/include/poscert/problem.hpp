#pragma once

#include <string>

#include "poscert/interval.hpp"
#include "poscert/rational.hpp"

namespace poscert {

enum class ProblemKind { LaneEmden, AllenCahn };

/// -Laplace(u) = F(u) on the unit square, u = 0 on the boundary, with
///   LaneEmden:  F(u) = |u|^(p-1) u  (= u^p for odd p)
///   AllenCahn:  F(u) = eps^-2 (u - u^3)
struct ProblemSpec {
  ProblemKind kind = ProblemKind::LaneEmden;
  int p = 3;
  Rational eps = 0;
  int N = 30;

  static ProblemSpec lane_emden(int p, int N);
  static ProblemSpec allen_cahn(const Rational& eps, int N);

  /// Throws ArgumentOutOfRange / UnsupportedNonlinearity on invalid fields.
  void validate() const;

  /// Polynomial degree of F.
  [[nodiscard]] int power() const { return kind == ProblemKind::LaneEmden ? p : 3; }
  /// eps^-2 enclosure (AllenCahn only).
  [[nodiscard]] Interval inv_eps_sq() const;
  [[nodiscard]] double inv_eps_sq_float() const;
  [[nodiscard]] std::string name() const;
  [[nodiscard]] std::string kind_name() const;
};

ProblemKind parse_problem_kind(const std::string& s);

}  // namespace poscert
