#include "poscert/embedding.hpp"

#include "poscert/rational.hpp"

namespace poscert {

Interval talenti_constant(int n, const Interval& q) {
  if (n < 2) throw Error(ErrorCode::ArgumentOutOfRange, "Talenti constant needs n >= 2");
  if (!(q.lo() > 1.0 && q.hi() < n)) throw Error(ErrorCode::ArgumentOutOfRange, "Talenti constant needs 1 < q < n");
  const Interval N(static_cast<double>(n));
  const Interval inv_q = Interval(1.0) / q;
  const Interval n_over_q = N * inv_q;
  Interval t = Interval(1.0) / sqrt(pi());
  t *= pow(N, -inv_q);
  t *= pow((q - 1.0) / (N - q), 1.0 - inv_q);
  const Interval g = gamma_enclosure(1.0 + N / 2.0) * gamma_enclosure(N) /
                     (gamma_enclosure(n_over_q) * gamma_enclosure(1.0 + N - n_over_q));
  t *= pow(g, Interval(1.0) / N);
  return t;
}

Interval embedding_constant_talenti(int n, const Interval& p, const Interval& measure) {
  if (!(p.lo() > static_cast<double>(n) / (n - 1)))
    throw Error(ErrorCode::ArgumentOutOfRange, "Talenti bound needs p > n/(n-1)");
  if (n >= 3 && p.hi() > 2.0 * n / (n - 2)) throw Error(ErrorCode::ArgumentOutOfRange, "p above the critical exponent");
  if (!(measure.lo() > 0)) throw Error(ErrorCode::ArgumentOutOfRange, "domain measure must be positive");
  const Interval N(static_cast<double>(n));
  const Interval q = N * p / (N + p);
  return pow(measure, (2.0 - q) / (2.0 * q)) * talenti_constant(n, q);
}

Interval embedding_constant_plum(int n, int p, const Interval& lambda1_lower, const Interval& tau) {
  if (n != 2) throw Error(ErrorCode::ArgumentOutOfRange, "only n = 2 is implemented");
  if (p < 2) throw Error(ErrorCode::ArgumentOutOfRange, "Plum bound needs p >= 2");
  if (!(lambda1_lower.lo() > 0) || tau.lo() < 0) throw Error(ErrorCode::ArgumentOutOfRange, "need lambda1 > 0 and tau >= 0");
  const int nu = p / 2;
  const Interval P(static_cast<double>(p));
  const Interval half_p = P / 2.0;
  Interval bracket(1.0);
  for (int k = 0; k <= nu - 2; ++k) bracket *= half_p - static_cast<double>(k);
  const Interval e = 0.5 + Interval(static_cast<double>(2 * nu - 3)) / P;
  Interval c = pow(Interval(0.5), e);
  c *= pow(bracket, 2.0 / P);
  c *= pow(lambda1_lower + half_p * tau, -(Interval(1.0) / P));
  return c;
}

Interval embedding_constant_l2(const Interval& lambda1_lower, const Interval& tau) {
  if (!(lambda1_lower.lo() > 0) || tau.lo() < 0) throw Error(ErrorCode::ArgumentOutOfRange, "need lambda1 > 0 and tau >= 0");
  return Interval(1.0) / sqrt(lambda1_lower + tau);
}

EmbeddingBound embedding_constant(int p, const Interval& lambda1_lower, const Interval& tau) {
  if (p < 2) throw Error(ErrorCode::ArgumentOutOfRange, "embedding constants need p >= 2");
  EmbeddingBound best{embedding_constant_plum(2, p, lambda1_lower, tau), "plum"};
  auto consider = [&](const Interval& v, const char* name) {
    if (v.hi() < best.value.hi()) best = EmbeddingBound{v, name};
  };
  if (p == 2) consider(embedding_constant_l2(lambda1_lower, tau), "l2");
  else consider(embedding_constant_talenti(2, Interval(static_cast<double>(p)), Interval(1.0)), "talenti");
  return best;
}

Interval lambda1_unit_square() { return 2.0 * sqr(pi()); }

LinfConstants linf_constants(int n, const std::string& domain) {
  if (n != 2 || domain != "unit-square")
    throw Error(ErrorCode::UnsupportedDomain, "L-infinity constants are only available for the unit square, n = 2");
  LinfConstants c;
  c.gamma0 = Interval(1.0);
  c.gamma1 = to_interval(parse_rational("1.1548"));
  c.gamma2 = to_interval(parse_rational("0.22361"));
  // max over x0 of int |x - x0|^(2j): attained at a corner, 1, 2/3, 28/45.
  c.c0 = c.gamma0;
  c.c1 = sqrt(Interval(2.0) / 3.0) * c.gamma1;
  c.c2 = c.gamma2 / 3.0 * sqrt(Interval(28.0) / 5.0);
  return c;
}

EmbeddingBound EmbeddingConstants::get(int p) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(p);
  if (it == cache_.end()) it = cache_.emplace(p, embedding_constant(p, lambda1_, tau_)).first;
  return it->second;
}

std::map<int, EmbeddingBound> EmbeddingConstants::table() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_;
}

}  // namespace poscert
