#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace c1lab {

template <class F>
concept Invertible = C1Function<F> && requires(const F& f, double y) {
  { f.inverse(y) } -> std::convertible_to<double>;
};

// n-th iterate (negative n uses the inverse) with the chain rule
template <Invertible F>
Jet iterate(const F& f, double x, long n) {
  double d = 1.0;
  if (n >= 0) {
    for (long k = 0; k < n; ++k) {
      Jet j = f.eval(x);
      x = j.v;
      d *= j.d;
    }
  } else {
    for (long k = 0; k < -n; ++k) {
      x = f.inverse(x);
      d /= f.eval(x).d;
    }
  }
  return {x, d};
}

template <C1Function F>
int direction_of(const F& f) {
  Interval D = f.domain();
  double m = 0.5 * (D.lo + D.hi);
  double v = f.eval(m).v - m;
  if (v == 0) throw hypothesis_error("map has a fixed point at the domain centre");
  return v > 0 ? 1 : -1;
}

struct CoincidenceZones {
  double a;  // g = f on [lo, a]
  double b;  // g = f on [b, hi]
};

template <C1Function F, C1Function G>
CoincidenceZones coincidence_zones(const F& f, const G& g, double tol = 1e-12) {
  Interval D = f.domain();
  auto s = dense_samples(merge_grids(nodes_of(f), nodes_of(g)), D, 4);
  auto same = [&](double x) {
    Jet a = f.eval(x), b = g.eval(x);
    return std::abs(a.v - b.v) <= tol * D.length() && std::abs(a.d - b.d) <= 1e3 * tol;
  };
  std::size_t i = 0;
  while (i + 1 < s.size() && same(s[i + 1])) ++i;
  std::size_t j = s.size() - 1;
  while (j > 0 && same(s[j - 1])) --j;
  if (i + 1 >= s.size()) return {D.hi, D.lo};
  return {s[i], s[j]};
}

// reflection x -> W.lo + W.hi - x applied on both sides of a map between subintervals of W
inline C1Map reflect_in(const C1Map& f, Interval W) {
  double c = W.lo + W.hi;
  std::size_t n = f.size();
  std::vector<double> x(n), y(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = n - 1 - i;
    x[i] = c - f.nodes()[k];
    y[i] = c - f.values()[k];
    d[i] = f.derivs()[k];
  }
  Interval D{c - f.domain().hi, c - f.domain().lo};
  Interval T{c - f.target().hi, c - f.target().lo};
  return C1Map(D, T, std::move(x), std::move(y), std::move(d));
}

namespace detail {

inline bool ahead(int dir, double a, double b) { return dir > 0 ? a > b : a < b; }

}  // namespace detail

template <Invertible F, Invertible G>
C1Map unitary_conjugacy(const F& f, const G& g, double x0, Interval upto, int per_domain = 64) {
  Interval D = f.domain();
  int dir = direction_of(f);
  if (direction_of(g) != dir) throw coincidence_error("unitary_conjugacy: f and g on opposite sides of id");
  auto z = coincidence_zones(f, g);
  double rep_edge = dir > 0 ? z.a : z.b;
  double fx0 = f.eval(x0).v;
  if (dir > 0 ? !(z.a > D.lo) : !(z.b < D.hi)) throw coincidence_error("unitary_conjugacy: g does not coincide with f near the repelling end");
  if (!detail::ahead(dir, rep_edge, fx0)) throw coincidence_error("unitary_conjugacy: f(x0) outside the coincidence zone");
  if (dir > 0 ? upto.hi >= D.hi : upto.lo <= D.lo) throw truncation_error("unitary_conjugacy: requested interval reaches the attracting end");
  double far = dir > 0 ? upto.hi : upto.lo;
  std::vector<double> xs, ys, ds;
  // identity part behind x0
  for (double x : nodes_of(f))
    if (detail::ahead(dir, x0, x)) {
      xs.push_back(x);
      ys.push_back(x);
      ds.push_back(1.0);
    }
  std::vector<double> w(per_domain);
  for (int k = 0; k < per_domain; ++k) w[k] = x0 + (fx0 - x0) * k / per_domain;
  std::vector<Jet> fx(per_domain), gx(per_domain);
  for (int k = 0; k < per_domain; ++k) {
    fx[k] = {w[k], 1.0};
    gx[k] = {w[k], 1.0};
  }
  bool done = false;
  for (int n = 0; n < 100000 && !done; ++n) {
    for (int k = 0; k < per_domain; ++k) {
      if (!detail::ahead(dir, far, fx[k].v)) {
        done = true;
        break;
      }
      xs.push_back(fx[k].v);
      ys.push_back(gx[k].v);
      ds.push_back(gx[k].d / fx[k].d);
    }
    for (int k = 0; k < per_domain && !done; ++k) {
      Jet a = f.eval(fx[k].v), b = g.eval(gx[k].v);
      fx[k] = {a.v, fx[k].d * a.d};
      gx[k] = {b.v, gx[k].d * b.d};
    }
  }
  // endpoint at `far`
  long m = 0;
  double u = far;
  while (detail::ahead(dir, u, fx0) || u == fx0) {
    u = f.inverse(u);
    ++m;
    if (m > 100000) throw cap_error("unitary_conjugacy: orbit cap");
  }
  Jet fu = iterate(f, u, m), gu = iterate(g, u, m);
  xs.push_back(far);
  ys.push_back(gu.v);
  ds.push_back(gu.d / fu.d);
  if (dir < 0) {
    std::reverse(xs.begin(), xs.end());
    std::reverse(ys.begin(), ys.end());
    std::reverse(ds.begin(), ds.end());
  }
  std::vector<double> X, Y, Dd;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!X.empty() && !(xs[i] > X.back() && ys[i] > Y.back())) continue;
    X.push_back(xs[i]);
    Y.push_back(ys[i]);
    Dd.push_back(ds[i]);
  }
  Interval dom{X.front(), X.back()}, tgt{Y.front(), Y.back()};
  return C1Map(dom, tgt, std::move(X), std::move(Y), std::move(Dd));
}

// f-commuting map stored as a germ on one fundamental domain I plus a shift:
// M(f^j u) = f^{j+shift}(germ(u)) for u in I
struct CommutingRep {
  C1Map base_map;
  C1Map germ;
  long shift = 0;
  int direction = 1;
  double y0 = 0;  // I runs from y0 to f(y0)
  int cap = 400;

  Interval fundamental() const {
    double y1 = base_map(y0);
    return direction > 0 ? Interval{y0, y1} : Interval{y1, y0};
  }

  // x = f^j(u) with u in the half-open domain [y0, f(y0)) in dynamic order
  std::pair<long, double> coords(double x) const {
    double y1 = base_map(y0);
    long j = 0;
    double u = x;
    int it = 0;
    while (detail::ahead(direction, y0, u)) {
      u = base_map(u);
      --j;
      if (++it > cap) throw truncation_error("CommutingRep: orbit cap reached");
    }
    while (!detail::ahead(direction, y1, u)) {
      u = base_map.inverse(u);
      ++j;
      if (++it > cap) throw truncation_error("CommutingRep: orbit cap reached");
    }
    return {j, u};
  }

  Jet eval(double x) const {
    if (x <= base_map.domain().lo || x >= base_map.domain().hi) return {x, 1.0};
    auto [j, u] = coords(x);
    Jet back = iterate(base_map, u, j);  // f^j at u
    Jet gv = germ.eval(u);
    Jet fw = iterate(base_map, gv.v, j + shift);
    return {fw.v, fw.d * gv.d / back.d};
  }

  Interval domain() const { return base_map.domain(); }
  double operator()(double x) const { return eval(x).v; }
};

// normalize a map given on I so the germ lands within [I.lo, f²(I.lo)) in dynamic order
template <class H>
CommutingRep make_commuting_rep(const C1Map& f, const H& h_on_I, double y0, int dir, int per_domain = 129) {
  double y1 = f(y0);
  double hy0 = h_on_I(y0);
  long s = 0;
  double v = hy0;
  int it = 0;
  while (detail::ahead(dir, y0, v)) {
    v = f(v);
    --s;
    if (++it > 100000) throw cap_error("make_commuting_rep: shift cap");
  }
  while (!detail::ahead(dir, y1, v)) {
    v = f.inverse(v);
    ++s;
    if (++it > 100000) throw cap_error("make_commuting_rep: shift cap");
  }
  Interval I = dir > 0 ? Interval{y0, y1} : Interval{y1, y0};
  auto grid = uniform_grid(I, per_domain);
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet hj = h_on_I.eval(grid[i]);
    Jet b = iterate(f, hj.v, -s);
    y[i] = b.v;
    d[i] = b.d * hj.d;
  }
  Interval tgt{y.front(), y.back()};
  CommutingRep rep{f, C1Map(I, tgt, grid, std::move(y), std::move(d)), s, dir, y0};
  return rep;
}

template <Invertible F>
double commutation_residual(const CommutingRep& M, const F& f, int domains = 3, int per_domain = 50) {
  double y = M.y0;
  for (int k = 0; k < domains / 2; ++k) y = f.inverse(y);
  double worst = 0;
  for (int k = 0; k < domains; ++k) {
    double y1 = f.eval(y).v;
    for (int i = 0; i < per_domain; ++i) {
      double x = y + (y1 - y) * (i + 0.5) / per_domain;
      worst = std::max(worst, std::abs(M(f.eval(x).v) - f.eval(M(x)).v));
    }
    y = y1;
  }
  return worst;
}

inline CommutingRep mather_invariant(const C1Map& f, const C1Map& g, int per_domain = 129) {
  Interval D = f.domain();
  int dir = direction_of(f);
  if (direction_of(g) != dir) throw coincidence_error("mather_invariant: f and g on opposite sides of id");
  for (auto& c : fixed_points(f))
    if (c.span.hi > D.lo && c.span.lo < D.hi) throw hypothesis_error("mather_invariant: f has interior fixed points");
  auto z = coincidence_zones(f, g);
  if (!(z.a > D.lo) || !(z.b < D.hi)) throw coincidence_error("mather_invariant: g does not coincide with f near both ends");
  if (z.a >= z.b) return make_commuting_rep(f, IdentityFn{D}, 0.5 * (D.lo + D.hi), dir, per_domain);
  double rep_edge = dir > 0 ? z.a : z.b;
  double att_edge = dir > 0 ? z.b : z.a;
  double target_fx0 = dir > 0 ? D.lo + 0.9 * (rep_edge - D.lo) : D.hi - 0.9 * (D.hi - rep_edge);
  double x0 = f.inverse(target_fx0);
  // first n with g^n(x0) inside the attracting coincidence zone
  long n = 0;
  double gy = x0;
  while (!detail::ahead(dir, gy, att_edge) && gy != att_edge) {
    gy = g(gy);
    if (++n > 100000) throw cap_error("mather_invariant: orbit cap");
  }
  double fy = iterate(f, x0, n).v;
  struct Unitary {
    const C1Map& f;
    const C1Map& g;
    long n;
    Jet eval(double x) const {
      Jet back = iterate(f, x, -n);
      Jet fw = iterate(g, back.v, n);
      return {fw.v, fw.d * back.d};
    }
    double operator()(double x) const { return eval(x).v; }
  } h{f, g, n};
  return make_commuting_rep(f, h, fy, dir, per_domain);
}

// C1Map h commuting with f, restricted to a fundamental domain through y0
inline CommutingRep to_commuting_rep(const C1Map& f, const C1Map& h, double y0 = -1, double tol = 1e-7) {
  Interval D = f.domain();
  int dir = direction_of(f);
  if (y0 < 0) y0 = 0.5 * (D.lo + D.hi);
  double y1 = f(y0);
  double worst = 0;
  for (int k = 0; k < 2; ++k) {
    double a = k == 0 ? y0 : y1, b = f(a);
    for (int i = 0; i < 64; ++i) {
      double x = a + (b - a) * (i + 0.5) / 64;
      worst = std::max(worst, std::abs(h(f(x)) - f(h(x))));
    }
  }
  if (worst > tol) throw commutation_error("to_commuting_rep: h does not commute with f", worst);
  return make_commuting_rep(f, h, y0, dir);
}

struct TranslationEstimate {
  double estimate = 0;
  double halfwidth = 0;
  std::vector<double> per_point;
  double spread = 0;
};

// m(n)/n with f^{m} x <= h^n x < f^{m+1} x, counted in domain coordinates
inline double translation_at(const CommutingRep& M, double x, long n) {
  auto [j0, u0] = M.coords(x);
  const C1Map& f = M.base_map;
  double y0 = M.y0, y1 = f(y0);
  long J = j0;
  double U = u0;
  for (long k = 0; k < n; ++k) {
    double v = M.germ(U);
    J += M.shift;
    while (detail::ahead(M.direction, y0, v)) {
      v = f(v);
      --J;
    }
    while (!detail::ahead(M.direction, y1, v)) {
      v = f.inverse(v);
      ++J;
    }
    U = v;
  }
  long m = J - j0 - (detail::ahead(M.direction, u0, U) ? 1 : 0);
  return double(m) / double(n);
}

inline TranslationEstimate translation_number(const CommutingRep& M, long n, std::vector<double> points = {}) {
  if (n < 1) throw precondition_error("translation_number: n must be >= 1");
  if (points.empty()) {
    Interval I = M.fundamental();
    points = {I.lo + 0.1 * I.length(), I.lo + 0.5 * I.length(), I.lo + 0.9 * I.length()};
  }
  TranslationEstimate t;
  t.halfwidth = 1.0 / double(n);
  for (double x : points) t.per_point.push_back(translation_at(M, x, n));
  auto [lo, hi] = std::minmax_element(t.per_point.begin(), t.per_point.end());
  t.spread = *hi - *lo;
  t.estimate = t.per_point[t.per_point.size() / 2];
  return t;
}

inline TranslationEstimate translation_number(const C1Map& f, const C1Map& h, long n, std::vector<double> points = {}) {
  return translation_number(to_commuting_rep(f, h), n, std::move(points));
}

struct DelayResult {
  long delay = 0;
  long n_used = 0;
  double tau = 0;
};

inline DelayResult delay(const CommutingRep& M, long n_max = 1L << 16) {
  Interval I = M.fundamental();
  double x = I.lo + 0.5 * I.length();
  double prev = -1;
  for (long n = 16; n <= n_max; n *= 2) {
    double tau = translation_at(M, x, n);
    double a = std::abs(tau);
    if (std::floor(a - 1.0 / n) == std::floor(a + 1.0 / n)) return {long(std::floor(a)), n, tau};
    // an exactly integral count at two successive n
    if (a == std::round(a) && a == prev) return {long(a), n, tau};
    prev = a;
  }
  throw indeterminate_error("delay: floor of |tau| not stable at n_max");
}

inline DelayResult delay(const C1Map& f, const C1Map& g, long n_max = 1L << 16) { return delay(mather_invariant(f, g), n_max); }

}  // namespace c1lab
