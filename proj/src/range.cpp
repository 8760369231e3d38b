#include "poscert/range.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace poscert {

using namespace rounding;

namespace {

Interval point_bubble(double t) {
  const Interval T(t);
  return T * (1.0 - T);
}

Interval sym(double r) { return Interval(-r, r); }

double radius_up(const Interval& X, double c) { return std::fmax(sub_up(X.hi(), c), sub_up(c, X.lo())); }

// 0.5 (a hx^2 + 2 b hx hy + c hy^2), rounded up.
double taylor_remainder(double a, double b, double c, double hx, double hy) {
  double s = mul_up(a, mul_up(hx, hx));
  s = add_up(s, mul_up(2.0 * b, mul_up(hx, hy)));
  s = add_up(s, mul_up(c, mul_up(hy, hy)));
  return mul_up(0.5, s);
}

}  // namespace

Interval bubble(const Interval& X) {
  if (X.lo() < 0.0 || X.hi() > 1.0) throw Error(ErrorCode::ArgumentOutOfRange, "bubble needs X in [0,1]");
  const double lo = std::fmin(point_bubble(X.lo()).lo(), point_bubble(X.hi()).lo());
  const double peak = std::clamp(0.5, X.lo(), X.hi());
  return Interval(std::fmax(lo, 0.0), std::fmin(point_bubble(peak).hi(), 0.25));
}

SpectralRange::SpectralRange(const SpectralFn& f) : f_(f), absu_(f.u.cwiseAbs()), n_(f.order()) {
  for (int i = 1; i <= n_; ++i) {
    for (int j = 1; j <= n_; ++j) {
      const double a = std::fabs(f_.u(i - 1, j - 1));
      if (a == 0.0) continue;
      // |phi_n| <= 1/(2n+1), |phi_n'| = |P_n| <= 1, |phi_n''| = |P_n'| <= n(n+1)
      const double phi_i = div_up(1.0, 2.0 * i + 1.0);
      const double phi_j = div_up(1.0, 2.0 * j + 1.0);
      fxx_ = add_up(fxx_, mul_up(a, mul_up(static_cast<double>(i) * (i + 1), phi_j)));
      fyy_ = add_up(fyy_, mul_up(a, mul_up(static_cast<double>(j) * (j + 1), phi_i)));
      fxy_ = add_up(fxy_, a);
      // |Q_n| <= 1, |Q_n'| <= (n+2)(n-1)/2, |Q_n''| <= (n+3)(n+2)(n-1)(n-2)/6
      const double q1i = 0.5 * (i + 2.0) * (i - 1.0);
      const double q1j = 0.5 * (j + 2.0) * (j - 1.0);
      const double q2i = div_up((i + 3.0) * (i + 2.0) * (i - 1.0) * (i - 2.0), 6.0);
      const double q2j = div_up((j + 3.0) * (j + 2.0) * (j - 1.0) * (j - 2.0), 6.0);
      vxx_ = add_up(vxx_, mul_up(a, q2i));
      vyy_ = add_up(vyy_, mul_up(a, q2j));
      vxy_ = add_up(vxy_, mul_up(a, mul_up(q1i, q1j)));
    }
  }
}

const SpectralRange::Row& SpectralRange::row(double c) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = rows_.find(c);
  if (it != rows_.end()) return *it->second;
  auto r = std::make_unique<Row>();
  // Interval three-term recurrences for P_n, P_n' and P_n'' of the shifted
  // polynomials at the point c.
  const Interval C(c);
  const Interval T = 2.0 * C - 1.0;
  const Interval B = C * (1.0 - C);
  const Interval unit(-1.0, 1.0);
  Interval p0(1.0), p1 = T, d0(0.0), d1(2.0), e0(0.0), e1(0.0);
  for (int n = 1; n <= n_; ++n) {
    const double nn = static_cast<double>(n) * (n + 1);
    r->phi.push_back(B * d1 / nn);
    r->dphi.push_back(-p1);
    r->q.push_back(d1 / nn);
    r->dq.push_back(e1 / nn);
    const double k = 2.0 * n + 1.0;
    const Interval p2 = intersect((k * T * p1 - static_cast<double>(n) * p0) / static_cast<double>(n + 1), unit);
    const Interval d2 = d0 + 2.0 * k * p1;
    const Interval e2 = e0 + 2.0 * k * d1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
    e0 = e1;
    e1 = e2;
  }
  return *rows_.emplace(c, std::move(r)).first->second;
}

Interval SpectralRange::bilinear(const std::vector<Interval>& a, const std::vector<Interval>& b) const {
  // Midpoint-radius evaluation of a^T U b. With |a - am| <= ar, |b - bm| <= br
  // the exact value differs from am^T U bm by at most
  //   |am|^T |U| br + ar^T |U| (|bm| + br),
  // and the floating evaluation of am^T U bm (2n terms per output) by
  // gamma_{2n} |am|^T |U| |bm|.
  const int n = n_;
  Eigen::VectorXd am(n), ar(n), bm(n), br(n);
  for (int i = 0; i < n; ++i) {
    const Interval& x = a[static_cast<std::size_t>(i)];
    const Interval& y = b[static_cast<std::size_t>(i)];
    am(i) = x.mid();
    ar(i) = std::fmax(sub_up(x.hi(), am(i)), sub_up(am(i), x.lo()));
    bm(i) = y.mid();
    br(i) = std::fmax(sub_up(y.hi(), bm(i)), sub_up(bm(i), y.lo()));
  }
  const Eigen::VectorXd w = f_.u * bm;
  const double s = am.dot(w);
  const Eigen::VectorXd abm = bm.cwiseAbs();
  const Eigen::VectorXd aw = absu_ * abm;
  const Eigen::VectorXd awr = absu_ * br;
  const double ku = 2.0 * n * std::numeric_limits<double>::epsilon() / 2;
  const double gamma = ku / (1.0 - ku);
  double e = gamma * am.cwiseAbs().dot(aw);
  e += am.cwiseAbs().dot(awr);
  e += ar.dot(aw + awr);
  // The error terms were themselves evaluated in floating point; inflate.
  e = mul_up(e, 1.0 + 8.0 * n * std::numeric_limits<double>::epsilon()) + 1e-300;
  return Interval(sub_down(s, e), add_up(s, e));
}

Interval SpectralRange::at(double x, double y) const {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) throw Error(ErrorCode::ArgumentOutOfRange, "point outside the unit square");
  return bilinear(row(x).phi, row(y).phi);
}

Interval SpectralRange::enclose(const Box& b) const {
  if (b.x.lo() < 0.0 || b.x.hi() > 1.0 || b.y.lo() < 0.0 || b.y.hi() > 1.0)
    throw Error(ErrorCode::ArgumentOutOfRange, "box outside the unit square");
  const double cx = b.x.mid();
  const double cy = b.y.mid();
  const double hx = radius_up(b.x, cx);
  const double hy = radius_up(b.y, cy);
  const Row& rx = row(cx);
  const Row& ry = row(cy);

  Interval t = bilinear(rx.phi, ry.phi);
  if (hx > 0.0 || hy > 0.0) {
    t += bilinear(rx.dphi, ry.phi) * sym(hx) + bilinear(rx.phi, ry.dphi) * sym(hy);
    t += sym(taylor_remainder(fxx_, fxy_, fyy_, hx, hy));
  }
  Interval v = bilinear(rx.q, ry.q);
  if (hx > 0.0 || hy > 0.0) {
    v += bilinear(rx.dq, ry.q) * sym(hx) + bilinear(rx.q, ry.dq) * sym(hy);
    v += sym(taylor_remainder(vxx_, vxy_, vyy_, hx, hy));
  }
  const Interval factored = bubble(b.x) * bubble(b.y) * v;
  return intersect(t, factored);
}

Interval SpectralRange::enclose(const Box& b, int depth) const {
  const Interval r = enclose(b);
  if (depth <= 0) return r;
  const double mx = b.x.mid();
  const double my = b.y.mid();
  const Interval xs[2] = {Interval(b.x.lo(), mx), Interval(mx, b.x.hi())};
  const Interval ys[2] = {Interval(b.y.lo(), my), Interval(my, b.y.hi())};
  Interval h = enclose(Box{xs[0], ys[0]}, depth - 1);
  for (const auto& X : xs)
    for (const auto& Y : ys) h = hull(h, enclose(Box{X, Y}, depth - 1));
  return intersect(r, h);
}

double SpectralRange::extreme(const Box& b, bool upper, double tol, int max_boxes) const {
  struct Node {
    double key;  // bound on the extreme over this box (negated for minima)
    Box box;
    Interval range;
  };
  auto cmp = [](const Node& a, const Node& c) { return a.key < c.key; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> queue(cmp);
  auto key_of = [&](const Interval& r) { return upper ? r.hi() : -r.lo(); };
  // Best attained value so far (a point value), in the same orientation as key.
  double best = -kInf;
  auto sample = [&](const Box& bx) {
    const Interval v = at(bx.x.mid(), bx.y.mid());
    best = std::fmax(best, upper ? v.lo() : -v.hi());
  };
  const Interval r0 = enclose(b);
  sample(b);
  queue.push(Node{key_of(r0), b, r0});
  for (int count = 0; count < max_boxes; ++count) {
    const Node top = queue.top();
    if (top.key - best <= tol * std::fmax(1.0, std::fabs(best))) break;
    queue.pop();
    const double mx = top.box.x.mid();
    const double my = top.box.y.mid();
    if (!(mx > top.box.x.lo() && mx < top.box.x.hi() && my > top.box.y.lo() && my < top.box.y.hi())) {
      // Cannot split further in binary64; keep the box as is.
      queue.push(top);
      break;
    }
    const Interval xs[2] = {Interval(top.box.x.lo(), mx), Interval(mx, top.box.x.hi())};
    const Interval ys[2] = {Interval(top.box.y.lo(), my), Interval(my, top.box.y.hi())};
    for (const auto& X : xs)
      for (const auto& Y : ys) {
        const Box child{X, Y};
        const Interval r = intersect(enclose(child), top.range);
        sample(child);
        queue.push(Node{key_of(r), child, r});
      }
  }
  const double k = queue.top().key;
  return upper ? k : -k;
}

Interval SpectralRange::global_range(const Box& b, double tol, int max_boxes) const {
  return Interval(extreme(b, false, tol, max_boxes), extreme(b, true, tol, max_boxes));
}

}  // namespace poscert
