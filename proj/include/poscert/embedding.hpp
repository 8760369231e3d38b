#pragma once

// Upper bounds for the embedding constants C_p in ||u||_{L^p} <= C_p ||u||_V,
// ||u||_V^2 = ||grad u||^2 + tau ||u||^2, on the unit square, and the
// constants of the L-infinity estimate
//   ||u||_inf <= c0 ||u|| + c1 ||grad u|| + c2 ||u_xx||.

#include <map>
#include <mutex>
#include <string>

#include "poscert/interval.hpp"

namespace poscert {

/// Best constant of the Sobolev inequality on R^n for 1 < q < n (p = nq/(n-q)).
Interval talenti_constant(int n, const Interval& q);

/// measure^((2-q)/(2q)) T_p with q = np/(n+p); valid for every tau >= 0.
Interval embedding_constant_talenti(int n, const Interval& p, const Interval& measure);

/// Closed-form bound for n = 2 and p >= 2 in terms of a lower bound of the
/// first Dirichlet eigenvalue.
Interval embedding_constant_plum(int n, int p, const Interval& lambda1_lower, const Interval& tau);

/// 1/sqrt(lambda1 + tau), the p = 2 bound.
Interval embedding_constant_l2(const Interval& lambda1_lower, const Interval& tau);

struct EmbeddingBound {
  Interval value;      // enclosure of the chosen candidate; value.hi() is the bound used
  std::string source;  // "talenti", "plum" or "l2"
};

/// Smallest applicable candidate (by upper endpoint) for the unit square.
EmbeddingBound embedding_constant(int p, const Interval& lambda1_lower, const Interval& tau);

/// 2 pi^2 enclosed.
Interval lambda1_unit_square();

struct LinfConstants {
  Interval c0, c1, c2;
  Interval gamma0, gamma1, gamma2;
  /// Which gamma value enters c2 (the coefficient of the Hessian term).
  std::string c2_gamma = "gamma2";
};

/// Constants for n = 2 on the unit square. Throws UnsupportedDomain otherwise.
LinfConstants linf_constants(int n = 2, const std::string& domain = "unit-square");

/// Per-run cache of C_p for fixed lambda1 and tau. Thread-safe.
class EmbeddingConstants {
 public:
  EmbeddingConstants(Interval lambda1_lower, Interval tau) : lambda1_(lambda1_lower), tau_(tau) {}

  [[nodiscard]] const Interval& tau() const noexcept { return tau_; }
  [[nodiscard]] const Interval& lambda1() const noexcept { return lambda1_; }
  EmbeddingBound get(int p) const;
  /// Upper bound of C_p.
  [[nodiscard]] double upper(int p) const { return get(p).value.hi(); }
  [[nodiscard]] std::map<int, EmbeddingBound> table() const;

 private:
  Interval lambda1_;
  Interval tau_;
  mutable std::mutex mu_;
  mutable std::map<int, EmbeddingBound> cache_;
};

}  // namespace poscert
