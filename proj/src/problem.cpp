#include "poscert/problem.hpp"

#include <sstream>

namespace poscert {

ProblemSpec ProblemSpec::lane_emden(int p, int N) {
  ProblemSpec s;
  s.kind = ProblemKind::LaneEmden;
  s.p = p;
  s.N = N;
  s.validate();
  return s;
}

ProblemSpec ProblemSpec::allen_cahn(const Rational& eps, int N) {
  ProblemSpec s;
  s.kind = ProblemKind::AllenCahn;
  s.p = 3;
  s.eps = eps;
  s.N = N;
  s.validate();
  return s;
}

void ProblemSpec::validate() const {
  if (N < 1) throw Error(ErrorCode::ArgumentOutOfRange, "basis order N must be >= 1");
  if (kind == ProblemKind::LaneEmden) {
    if (p < 3) throw Error(ErrorCode::ArgumentOutOfRange, "Lane-Emden exponent must be >= 3");
    if (p % 2 == 0) throw Error(ErrorCode::UnsupportedNonlinearity, "even exponents are not polynomial in |u|^(p-1)u form");
  } else if (eps <= 0) {
    throw Error(ErrorCode::ArgumentOutOfRange, "Allen-Cahn eps must be positive");
  }
}

Interval ProblemSpec::inv_eps_sq() const {
  const Rational e2 = eps * eps;
  const Rational inv = Rational(e2.get_den(), e2.get_num());
  return to_interval(inv);
}

double ProblemSpec::inv_eps_sq_float() const { return inv_eps_sq().mid(); }

std::string ProblemSpec::kind_name() const { return kind == ProblemKind::LaneEmden ? "lane-emden" : "allen-cahn"; }

std::string ProblemSpec::name() const {
  std::ostringstream os;
  if (kind == ProblemKind::LaneEmden)
    os << "lane-emden p=" << p;
  else
    os << "allen-cahn eps=" << to_string(eps);
  os << " N=" << N;
  return os.str();
}

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "lane-emden" || s == "lane_emden" || s == "LaneEmden") return ProblemKind::LaneEmden;
  if (s == "allen-cahn" || s == "allen_cahn" || s == "AllenCahn") return ProblemKind::AllenCahn;
  throw Error(ErrorCode::InvalidConfig, "unknown problem kind: " + s);
}

}  // namespace poscert
