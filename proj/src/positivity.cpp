#include "poscert/positivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "poscert/embedding.hpp"

namespace poscert {

using namespace rounding;

Box DyadicBox::box() const {
  const double s = std::ldexp(1.0, -level);
  return Box{Interval(static_cast<double>(ix) * s, static_cast<double>(ix + 1) * s),
             Interval(static_cast<double>(iy) * s, static_cast<double>(iy + 1) * s)};
}

std::array<DyadicBox, 4> DyadicBox::children() const {
  const int l = level + 1;
  return {DyadicBox{l, 2 * ix, 2 * iy}, DyadicBox{l, 2 * ix + 1, 2 * iy}, DyadicBox{l, 2 * ix, 2 * iy + 1},
          DyadicBox{l, 2 * ix + 1, 2 * iy + 1}};
}

int default_threads() {
  if (const char* env = std::getenv("POSCERT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = default_threads();
  const auto t = static_cast<std::size_t>(std::min<long>(threads, static_cast<long>((n + 63) / 64)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t k = 0; k < t; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

bool on_outer_boundary(const DyadicBox& b) {
  const long last = (1L << b.level) - 1;
  return b.ix == 0 || b.iy == 0 || b.ix == last || b.iy == last;
}

Rational coord(long i, int level) { return Rational(BigInt(i), BigInt(1) << static_cast<mp_bitcnt_t>(level)); }

}  // namespace

RegionDecomposition classify_regions(const SpectralRange& u, double r2, const ClassifyOptions& opts) {
  if (!(r2 > 0)) throw Error(ErrorCode::ArgumentOutOfRange, "r2 must be positive");
  if (opts.max_depth < 0 || opts.max_depth > 30) throw Error(ErrorCode::ArgumentOutOfRange, "max_depth must be in [0, 30]");
  RegionDecomposition d;
  d.max_depth = opts.max_depth;
  enum Status : char { Plus, Minus, Straddle };
  std::vector<DyadicBox> frontier{DyadicBox{}};
  for (int level = 0; level <= opts.max_depth && !frontier.empty(); ++level) {
    std::vector<char> status(frontier.size());
    parallel_for(frontier.size(), opts.threads, [&](std::size_t i) {
      const Interval r = u.enclose(frontier[i].box());
      status[i] = r.lo() > r2 ? Plus : (r.hi() <= r2 ? Minus : Straddle);
    });
    std::vector<DyadicBox> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const DyadicBox& b = frontier[i];
      if (status[i] == Plus) d.omega_plus.push_back(b);
      else if (status[i] == Minus || level == opts.max_depth) d.omega_minus_cover.push_back(b);
      else
        for (const auto& c : b.children()) next.push_back(c);
    }
    frontier = std::move(next);
  }
  if (d.omega_plus.empty())
    throw Error(ErrorCode::OmegaPlusEmpty, "no box with u_hat - r2 > 0 certified at depth " + std::to_string(opts.max_depth));
  d.touches_outer_boundary = std::any_of(d.omega_minus_cover.begin(), d.omega_minus_cover.end(), on_outer_boundary);
  return d;
}

RegionDecomposition classify_regions(const SpectralFn& u, double r2, const ClassifyOptions& opts) {
  return classify_regions(SpectralRange(u), r2, opts);
}

double rigorous_min(const SpectralRange& u, const std::vector<DyadicBox>& cover, int depth, int threads) {
  std::vector<double> lo(cover.size());
  parallel_for(cover.size(), threads, [&](std::size_t i) { lo[i] = u.enclose(cover[i].box(), depth).lo(); });
  double m = kInf;
  for (double v : lo) m = std::min(m, v);
  return m;
}

bool tiles_unit_square(const RegionDecomposition& d) {
  std::set<std::tuple<int, long, long>> seen;
  int top = 0;
  auto all = d.omega_plus;
  all.insert(all.end(), d.omega_minus_cover.begin(), d.omega_minus_cover.end());
  for (const auto& b : all) {
    const long side = 1L << b.level;
    if (b.level < 0 || b.level > 30 || b.ix < 0 || b.iy < 0 || b.ix >= side || b.iy >= side) return false;
    if (!seen.emplace(b.level, b.ix, b.iy).second) return false;
    top = std::max(top, b.level);
  }
  BigInt area = 0;
  for (const auto& b : all) {
    for (int l = b.level - 1, s = 1; l >= 0; --l, ++s)
      if (seen.count({l, b.ix >> s, b.iy >> s})) return false;
    area += BigInt(1) << static_cast<mp_bitcnt_t>(2 * (top - b.level));
  }
  return area == BigInt(1) << static_cast<mp_bitcnt_t>(2 * top);
}

LaneEmdenCheck check_lane_emden(int p, double m_lower, double r2) {
  LaneEmdenCheck c;
  const double x = std::max(0.0, add_up(-m_lower, r2));
  c.threshold = pow(Interval(x), p - 1).hi();
  c.lambda1_lower = lambda1_unit_square().lo();
  c.pass = c.threshold < c.lambda1_lower;
  return c;
}

bool cover_inside_frame(const std::vector<DyadicBox>& cover, const FrameDomain& omega_hat) {
  if (omega_hat.is_square()) return true;
  const Rational& a = omega_hat.a;
  const Rational b = 1 - a;
  for (const auto& box : cover) {
    const bool outside = coord(box.ix + 1, box.level) <= a || coord(box.ix, box.level) >= b ||
                         coord(box.iy + 1, box.level) <= a || coord(box.iy, box.level) >= b;
    if (!outside) return false;
  }
  return true;
}

AllenCahnCheck check_allen_cahn(const Rational& eps, double m_lower, double r2, double lambda1_hat_lower,
                                const RegionDecomposition& d, const FrameDomain& omega_hat) {
  AllenCahnCheck c;
  c.slack = kAssumption3Slack;
  c.a3 = add_up(mul_up(2.0, r2), c.slack) <= 1.0;
  c.a4 = add_up(-m_lower, r2) < 1.0;
  c.eps_inv_sq_upper = ProblemSpec::allen_cahn(eps, 1).inv_eps_sq().hi();
  c.lambda1_hat_lower = lambda1_hat_lower;
  c.a5 = c.eps_inv_sq_upper < lambda1_hat_lower;
  c.containment = cover_inside_frame(d.omega_minus_cover, omega_hat);
  if (!c.containment)
    throw Error(ErrorCode::ContainmentFailure, "a cover box meets the removed square [" + to_string(omega_hat.a) +
                                                   ", 1 - " + to_string(omega_hat.a) + "]^2");
  c.pass = c.a3 && c.a4 && c.a5;
  return c;
}

Lambda1Data lambda1_unit_square_data() {
  const Interval l = lambda1_unit_square();
  return Lambda1Data{FrameDomain{}, l.lo(), l.hi(), "2 pi^2"};
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

// Fills the checks and assumptions 2-5 from the decomposition and m_lower.
void evaluate_checks(PositivityCertificate& c) {
  const auto& d = c.decomposition;
  c.assumptions.clear();
  c.assumptions.push_back({1, !d.omega_plus.empty() && !d.omega_minus_cover.empty(),
                           std::to_string(d.omega_plus.size()) + " boxes with u_hat - r2 > 0, " +
                               std::to_string(d.omega_minus_cover.size()) + " cover boxes"});
  c.assumptions.push_back({2, true, "homogeneous Dirichlet data: u = 0 on the outer boundary"});
  if (c.problem.kind == ProblemKind::LaneEmden) {
    c.allen_cahn.reset();
    LaneEmdenCheck le = check_lane_emden(c.problem.p, c.m_lower, c.r2);
    le.lambda1_lower = c.lambda1.lower;
    le.pass = le.threshold < c.lambda1.lower;
    c.lane_emden = le;
    c.assumptions.push_back({3, true, "f(u) = u^p >= 0 for u >= 0 (odd p)"});
    c.assumptions.push_back({4, true, "f(u) = u^p < 0 for u < 0 (odd p)"});
    const bool inside = cover_inside_frame(d.omega_minus_cover, c.lambda1.omega_hat);
    c.assumptions.push_back({5, le.pass && inside,
                             "(-m + r2)^(p-1) <= " + fmt(le.threshold) + (le.pass ? " < " : " >= ") +
                                 fmt(c.lambda1.lower) + " <= lambda_1 (" + c.lambda1.source + ")" +
                                 (inside ? "" : "; cover escapes Omega_hat")});
    return;
  }
  c.lane_emden.reset();
  try {
    const AllenCahnCheck ac = check_allen_cahn(c.problem.eps, c.m_lower, c.r2, c.lambda1.lower, d, c.lambda1.omega_hat);
    c.allen_cahn = ac;
    c.assumptions.push_back({3, ac.a3, "2 r2 + 2^-20 = " + fmt(add_up(mul_up(2.0, c.r2), ac.slack)) + " <= 1"});
    c.assumptions.push_back({4, ac.a4, "-m + r2 = " + fmt(add_up(-c.m_lower, c.r2)) + " < 1"});
    c.assumptions.push_back({5, ac.a5,
                             "e <= eps^-2 <= " + fmt(ac.eps_inv_sq_upper) + (ac.a5 ? " < " : " >= ") +
                                 fmt(c.lambda1.lower) + " <= lambda_1 (" + c.lambda1.source + "); cover inside Omega_hat"});
  } catch (const Error& e) {
    AllenCahnCheck ac;
    ac.slack = kAssumption3Slack;
    ac.a3 = add_up(mul_up(2.0, c.r2), ac.slack) <= 1.0;
    ac.a4 = add_up(-c.m_lower, c.r2) < 1.0;
    ac.eps_inv_sq_upper = c.problem.inv_eps_sq().hi();
    ac.lambda1_hat_lower = c.lambda1.lower;
    ac.a5 = false;
    c.allen_cahn = ac;
    c.assumptions.push_back({3, ac.a3, "2 r2 + 2^-20 <= 1"});
    c.assumptions.push_back({4, ac.a4, "-m + r2 < 1"});
    c.assumptions.push_back({5, false, e.what()});
  }
}

bool all_pass(const std::vector<Assumption>& as) {
  return as.size() == 5 && std::all_of(as.begin(), as.end(), [](const Assumption& a) { return a.pass; });
}

}  // namespace

PositivityCertificate certify(const ProblemSpec& problem, const SpectralFn& u, const ExistenceCertificate& existence,
                              const Lambda1Data& lambda1, const CertifyOptions& opts) {
  if (existence.u_hash != spectral_hash(u))
    throw Error(ErrorCode::VerificationFailure, "existence certificate belongs to a different u_hat");
  if (problem_to_json(existence.problem) != problem_to_json(problem))
    throw Error(ErrorCode::VerificationFailure, "existence certificate is for a different problem");
  if (!recheck(existence)) throw Error(ErrorCode::VerificationFailure, "existence certificate does not re-check");

  PositivityCertificate c = assess(problem, u, existence.r2, lambda1, opts);
  c.radius_source = "existence";
  return c;
}

PositivityCertificate assess(const ProblemSpec& problem, const SpectralFn& u, double r2, const Lambda1Data& lambda1,
                             const CertifyOptions& opts) {
  problem.validate();
  PositivityCertificate c;
  c.problem = problem;
  c.u_hash = spectral_hash(u);
  c.r2 = r2;
  c.radius_source = "assumed";
  c.lambda1 = lambda1;
  const SpectralRange range(u);
  try {
    c.decomposition = classify_regions(range, c.r2, opts.classify);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OmegaPlusEmpty) throw;
    c.decomposition.max_depth = opts.classify.max_depth;
    c.m_lower = -kInf;
    c.assumptions = {{1, false, e.what()}};
    c.verdict = false;
    return c;
  }
  c.m_lower = rigorous_min(range, c.decomposition.omega_minus_cover, opts.min_refine, opts.classify.threads);
  evaluate_checks(c);
  c.verdict = all_pass(c.assumptions);
  return c;
}

bool recheck(const PositivityCertificate& cert, const SpectralFn& u, int min_refine) {
  if (cert.u_hash != spectral_hash(u)) return false;
  if (!cert.verdict) {
    // A negative verdict needs no proof; only check it is consistent.
    return !all_pass(cert.assumptions);
  }
  const auto& d = cert.decomposition;
  if (!tiles_unit_square(d) || d.omega_plus.empty() || d.omega_minus_cover.empty()) return false;
  const SpectralRange range(u);
  std::atomic<bool> ok{true};
  parallel_for(d.omega_plus.size(), 0, [&](std::size_t i) {
    if (!(range.enclose(d.omega_plus[i].box()).lo() > cert.r2)) ok = false;
  });
  if (!ok) return false;
  if (rigorous_min(range, d.omega_minus_cover, min_refine) < cert.m_lower) return false;
  PositivityCertificate again = cert;
  evaluate_checks(again);
  if (again.assumptions.size() != cert.assumptions.size()) return false;
  for (std::size_t i = 0; i < again.assumptions.size(); ++i)
    if (again.assumptions[i].pass != cert.assumptions[i].pass) return false;
  return all_pass(again.assumptions) == cert.verdict;
}

namespace {

nlohmann::json boxes_json(const std::vector<DyadicBox>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& b : v) a.push_back({b.level, b.ix, b.iy});
  return a;
}

std::vector<DyadicBox> boxes_from(const nlohmann::json& a) {
  std::vector<DyadicBox> v;
  for (const auto& e : a) v.push_back(DyadicBox{e.at(0).get<int>(), e.at(1).get<long>(), e.at(2).get<long>()});
  return v;
}

}  // namespace

nlohmann::json to_json(const PositivityCertificate& c, bool include_boxes) {
  using nlohmann::json;
  json dec{{"max_depth", c.decomposition.max_depth},
           {"omega_plus_count", c.decomposition.omega_plus.size()},
           {"omega_minus_cover_count", c.decomposition.omega_minus_cover.size()},
           {"touches_outer_boundary", c.decomposition.touches_outer_boundary},
           {"boxes_included", include_boxes}};
  if (include_boxes) {
    dec["omega_plus"] = boxes_json(c.decomposition.omega_plus);
    dec["omega_minus_cover"] = boxes_json(c.decomposition.omega_minus_cover);
  }
  json lam{{"inner_offset", to_string(c.lambda1.omega_hat.a)},
           {"lower", to_hex(c.lambda1.lower)},
           {"upper", to_hex(c.lambda1.upper)},
           {"source", c.lambda1.source}};
  json as = json::array();
  for (const auto& a : c.assumptions) as.push_back({{"id", a.id}, {"pass", a.pass}, {"evidence", a.evidence}});
  json j{{"type", "positivity"},
         {"problem", problem_to_json(c.problem)},
         {"u_hash", c.u_hash},
         {"r2", to_hex(c.r2)},
         {"radius_source", c.radius_source},
         {"m_lower", to_hex(c.m_lower)},
         {"decomposition", dec},
         {"lambda1", lam},
         {"assumptions", as},
         {"verdict", c.verdict},
         {"decimal", {{"r2", c.r2}, {"m_lower", c.m_lower}, {"lambda1_lower", c.lambda1.lower}}}};
  if (c.lane_emden)
    j["lane_emden"] = {{"threshold", to_hex(c.lane_emden->threshold)},
                       {"threshold_decimal", c.lane_emden->threshold},
                       {"pass", c.lane_emden->pass}};
  if (c.allen_cahn)
    j["allen_cahn"] = {{"slack", to_hex(c.allen_cahn->slack)},
                       {"a3", c.allen_cahn->a3},
                       {"a4", c.allen_cahn->a4},
                       {"a5", c.allen_cahn->a5},
                       {"eps_inv_sq_upper", to_hex(c.allen_cahn->eps_inv_sq_upper)},
                       {"containment", c.allen_cahn->containment}};
  return j;
}

PositivityCertificate positivity_from_json(const nlohmann::json& j) {
  try {
    PositivityCertificate c;
    c.problem = problem_from_json(j.at("problem"));
    c.u_hash = j.at("u_hash").get<std::string>();
    c.r2 = parse_hex(j.at("r2").get<std::string>());
    c.radius_source = j.value("radius_source", std::string("existence"));
    const auto& m = j.at("m_lower").get<std::string>();
    c.m_lower = m == "-inf" ? -kInf : parse_hex(m);
    const auto& dec = j.at("decomposition");
    c.decomposition.max_depth = dec.at("max_depth").get<int>();
    c.decomposition.touches_outer_boundary = dec.at("touches_outer_boundary").get<bool>();
    if (dec.value("boxes_included", false)) {
      c.decomposition.omega_plus = boxes_from(dec.at("omega_plus"));
      c.decomposition.omega_minus_cover = boxes_from(dec.at("omega_minus_cover"));
    }
    const auto& lam = j.at("lambda1");
    c.lambda1.omega_hat.a = parse_rational(lam.at("inner_offset").get<std::string>());
    c.lambda1.lower = parse_hex(lam.at("lower").get<std::string>());
    c.lambda1.upper = parse_hex(lam.at("upper").get<std::string>());
    c.lambda1.source = lam.at("source").get<std::string>();
    for (const auto& a : j.at("assumptions"))
      c.assumptions.push_back({a.at("id").get<int>(), a.at("pass").get<bool>(), a.at("evidence").get<std::string>()});
    c.verdict = j.at("verdict").get<bool>();
    if (j.contains("lane_emden")) {
      LaneEmdenCheck le;
      le.threshold = parse_hex(j["lane_emden"].at("threshold").get<std::string>());
      le.lambda1_lower = c.lambda1.lower;
      le.pass = j["lane_emden"].at("pass").get<bool>();
      c.lane_emden = le;
    }
    if (j.contains("allen_cahn")) {
      const auto& a = j["allen_cahn"];
      AllenCahnCheck ac;
      ac.slack = parse_hex(a.at("slack").get<std::string>());
      ac.a3 = a.at("a3").get<bool>();
      ac.a4 = a.at("a4").get<bool>();
      ac.a5 = a.at("a5").get<bool>();
      ac.eps_inv_sq_upper = parse_hex(a.at("eps_inv_sq_upper").get<std::string>());
      ac.lambda1_hat_lower = c.lambda1.lower;
      ac.containment = a.at("containment").get<bool>();
      c.allen_cahn = ac;
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("positivity certificate: ") + e.what());
  }
}

}  // namespace poscert
