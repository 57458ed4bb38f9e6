#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace c1lab {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : error { using error::error; };
struct composition_error : error { using error::error; };
struct builder_error : error { using error::error; };
struct invariance_error : error { using error::error; };
struct margin_error : error {
  double norm_left = 0, norm_right = 0;
  margin_error(const std::string& m, double l, double r) : error(m), norm_left(l), norm_right(r) {}
};
struct precondition_error : error { using error::error; };
struct matching_error : error { using error::error; };
struct hypothesis_error : error { using error::error; };
struct coincidence_error : error { using error::error; };
struct truncation_error : error { using error::error; };
struct commutation_error : error {
  double residual = 0;
  commutation_error(const std::string& m, double r) : error(m), residual(r) {}
};
struct indeterminate_error : error { using error::error; };
struct cap_error : error { using error::error; };
struct divergence_error : error { using error::error; };
struct normalization_error : error { using error::error; };
struct geometry_error : error { using error::error; };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
  bool operator==(const Interval&) const = default;
};

inline Interval checked_interval(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw domain_error("invalid interval");
  return {lo, hi};
}

struct Jet {
  double v;
  double d;
};

template <class F>
concept C1Function = requires(const F& f, double x) {
  { f.eval(x) } -> std::convertible_to<Jet>;
  { f.domain() } -> std::convertible_to<Interval>;
};

namespace detail {

// cubic Hermite on the unit cell; m0, m1 are slopes in cell units
inline Jet hermite(double t, double y0, double y1, double m0, double m1, double h) {
  double t2 = t * t, t3 = t2 * t;
  double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
  double dv = (6 * t2 - 6 * t) * (y0 - y1) + (3 * t2 - 4 * t + 1) * m0 + (3 * t2 - 2 * t) * m1;
  return {v, dv / h};
}

// min over [0,1] of the Hermite derivative (cell units)
inline double hermite_min_slope(double delta, double m0, double m1) {
  double a = -6 * delta + 3 * m0 + 3 * m1;
  double b = 6 * delta - 4 * m0 - 2 * m1;
  double lo = std::min(m0, m1);
  if (a > 0) {
    double ts = -b / (2 * a);
    if (ts > 0 && ts < 1) lo = std::min(lo, m0 - b * b / (4 * a));
  }
  return lo;
}

}  // namespace detail

class C1Map {
 public:
  C1Map() = default;

  C1Map(Interval dom, Interval tgt, std::vector<double> x, std::vector<double> y, std::vector<double> d)
      : dom_(dom), tgt_(tgt), x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {
    validate();
  }

  // endpoint-fixing self map
  C1Map(Interval dom, std::vector<double> x, std::vector<double> y, std::vector<double> d)
      : C1Map(dom, dom, std::move(x), std::move(y), std::move(d)) {}

  const Interval& domain() const { return dom_; }
  const Interval& target() const { return tgt_; }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& derivs() const { return d_; }
  std::size_t size() const { return x_.size(); }
  std::size_t clamped_cells() const { return clamped_; }

  Jet eval(double x) const {
    double slack = 1e-12 * dom_.length();
    if (!(x >= dom_.lo - slack && x <= dom_.hi + slack))
      throw domain_error("eval outside domain: " + std::to_string(x));
    x = std::clamp(x, dom_.lo, dom_.hi);
    std::size_t i = cell(x);
    if (x == x_[i]) return {y_[i], d_[i]};
    if (x == x_[i + 1]) return {y_[i + 1], d_[i + 1]};
    double h = x_[i + 1] - x_[i];
    double t = (x - x_[i]) / h;
    return detail::hermite(t, y_[i], y_[i + 1], d_[i] * h, d_[i + 1] * h, h);
  }

  double operator()(double x) const { return eval(x).v; }

  // root of f(x) = y by bisection inside the bracketing cell, then one Newton step
  double inverse(double y) const {
    double slack = 1e-12 * tgt_.length();
    if (!(y >= tgt_.lo - slack && y <= tgt_.hi + slack))
      throw domain_error("inverse outside target: " + std::to_string(y));
    y = std::clamp(y, tgt_.lo, tgt_.hi);
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = it == y_.begin() ? 0 : std::size_t(it - y_.begin()) - 1;
    if (i >= y_.size() - 1) return x_.back();
    if (y == y_[i]) return x_[i];
    double h = x_[i + 1] - x_[i];
    double m0 = d_[i] * h, m1 = d_[i + 1] * h;
    double a = 0, b = 1;
    for (int k = 0; k < 200 && b - a > 1e-13; ++k) {
      double m = 0.5 * (a + b);
      if (detail::hermite(m, y_[i], y_[i + 1], m0, m1, h).v < y)
        a = m;
      else
        b = m;
    }
    double t = 0.5 * (a + b);
    // a few Newton steps keep relative precision when y sits near a cell end at 0
    for (int k = 0; k < 4; ++k) {
      Jet j = detail::hermite(t, y_[i], y_[i + 1], m0, m1, h);
      if (!(j.d > 0)) break;
      double tn = t - (j.v - y) / (j.d * h);
      if (!(tn >= a - 1e-13 && tn <= b + 1e-13) || tn == t) break;
      t = tn;
    }
    return x_[i] + std::clamp(t, 0.0, 1.0) * h;
  }

  Jet inverse_jet(double y) const {
    double x = inverse(y);
    return {x, 1.0 / eval(x).d};
  }

 private:
  std::size_t cell(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : std::size_t(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  void validate() {
    std::size_t n = x_.size();
    if (n < 2 || y_.size() != n || d_.size() != n) throw builder_error("C1Map needs matching node arrays of size >= 2");
    if (!(dom_.lo < dom_.hi) || !(tgt_.lo < tgt_.hi)) throw builder_error("C1Map interval invalid");
    double sx = 1e-9 * dom_.length(), sy = 1e-9 * tgt_.length();
    if (std::abs(x_.front() - dom_.lo) > sx || std::abs(x_.back() - dom_.hi) > sx)
      throw builder_error("C1Map nodes must span the domain");
    if (std::abs(y_.front() - tgt_.lo) > sy || std::abs(y_.back() - tgt_.hi) > sy)
      throw builder_error("C1Map values must span the target");
    x_.front() = dom_.lo;
    x_.back() = dom_.hi;
    y_.front() = tgt_.lo;
    y_.back() = tgt_.hi;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]) || !std::isfinite(d_[i]))
        throw builder_error("C1Map non-finite data");
      if (!(d_[i] > 0)) throw builder_error("C1Map derivative must be positive");
      if (i + 1 < n && !(x_[i + 1] > x_[i])) throw builder_error("C1Map nodes must increase");
      if (i + 1 < n && !(y_[i + 1] > y_[i])) throw builder_error("C1Map values must increase");
    }
    // Fritsch-Carlson shrink only on cells whose Hermite cubic is not increasing
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double h = x_[i + 1] - x_[i];
      double delta = y_[i + 1] - y_[i];
      double m0 = d_[i] * h, m1 = d_[i + 1] * h;
      if (detail::hermite_min_slope(delta, m0, m1) > 0) continue;
      double al = m0 / delta, be = m1 / delta;
      double tau = 2.9 / std::hypot(al, be);
      d_[i] *= tau;
      d_[i + 1] *= tau;
      ++clamped_;
    }
  }

  Interval dom_{}, tgt_{};
  std::vector<double> x_, y_, d_;
  std::size_t clamped_ = 0;
};

// default grid: uniform bulk plus geometric refinement toward both ends;
// the depth at an endpoint p is floored at 1e-6·|p| so node values keep relative precision
inline std::vector<double> make_grid(Interval I, int n = 513, double depth = 1e-12) {
  int ng = (n - 1) / 4;
  int nu = n - 2 * ng;
  if (nu < 2) nu = 2;
  double L = I.length();
  double hu = 1.0 / (nu - 1);
  std::vector<double> g;
  g.reserve(n);
  for (int i = 0; i < nu; ++i) g.push_back(I.lo + L * i / (nu - 1));
  auto side = [&](double p, double sgn) {
    double floor_rel = std::max(depth, 1e-6 * std::abs(p) / L);
    if (ng == 0 || floor_rel >= hu) return;
    double q = std::pow(hu / floor_rel, 1.0 / ng);
    double r = hu;
    for (int k = 1; k <= ng; ++k) {
      r /= q;
      g.push_back(p + sgn * L * r);
    }
  };
  side(I.lo, 1.0);
  side(I.hi, -1.0);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  out.reserve(g.size());
  for (double x : g) {
    if (x < I.lo || x > I.hi) continue;
    if (!out.empty() && x - out.back() <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), 1e-300)) continue;
    out.push_back(x);
  }
  out.front() = I.lo;
  out.back() = I.hi;
  return out;
}

inline std::vector<double> uniform_grid(Interval I, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = I.lo + I.length() * i / (n - 1);
  g.back() = I.hi;
  return g;
}

// sorted union with near-duplicates removed
inline std::vector<double> merge_grids(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  out.reserve(a.size());
  for (double x : a) {
    if (!out.empty()) {
      double tol = 8 * std::numeric_limits<double>::epsilon() * std::max({std::abs(x), std::abs(out.back()), 1e-300});
      if (x - out.back() <= tol) continue;
    }
    out.push_back(x);
  }
  return out;
}

template <C1Function F>
C1Map materialize(const F& f, const std::vector<double>& grid) {
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet j = f.eval(grid[i]);
    y[i] = j.v;
    d[i] = j.d;
  }
  Interval tgt{y.front(), y.back()};
  return C1Map(Interval{grid.front(), grid.back()}, tgt, grid, std::move(y), std::move(d));
}

inline C1Map identity_map(Interval I = {0, 1}, int n = 513) {
  auto g = make_grid(I, n);
  std::vector<double> d(g.size(), 1.0);
  return C1Map(I, I, g, g, d);
}

template <class F>
concept HasNodes = requires(const F& f) {
  { f.nodes() } -> std::convertible_to<const std::vector<double>&>;
};

template <class F>
std::vector<double> nodes_of(const F& f) {
  if constexpr (HasNodes<F>)
    return f.nodes();
  else
    return make_grid(f.domain());
}

// 10 samples per cell of the merged node set, restricted to R
inline std::vector<double> dense_samples(const std::vector<double>& grid, Interval R, int per_cell = 10) {
  std::vector<double> s;
  s.reserve(grid.size() * per_cell + 2);
  s.push_back(R.lo);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double a = grid[i], b = grid[i + 1];
    if (b < R.lo || a > R.hi) continue;
    for (int k = 0; k < per_cell; ++k) {
      double x = a + (b - a) * k / per_cell;
      if (x >= R.lo && x <= R.hi) s.push_back(x);
    }
  }
  s.push_back(R.hi);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

struct DistanceParts {
  double c0 = 0;
  double c1 = 0;
  double total() const { return c0 + c1; }
};

template <C1Function A, C1Function B>
DistanceParts c1_distance_parts(const A& f, const B& g, Interval R) {
  auto s = dense_samples(merge_grids(nodes_of(f), nodes_of(g)), R);
  DistanceParts p;
  for (double x : s) {
    Jet a = f.eval(x), b = g.eval(x);
    p.c0 = std::max(p.c0, std::abs(a.v - b.v));
    p.c1 = std::max(p.c1, std::abs(a.d - b.d));
  }
  return p;
}

template <C1Function A, C1Function B>
DistanceParts c1_distance_parts(const A& f, const B& g) {
  Interval fa = f.domain(), gb = g.domain();
  double tol = 1e-12 * std::max(fa.length(), gb.length());
  if (std::abs(fa.lo - gb.lo) > tol || std::abs(fa.hi - gb.hi) > tol) throw domain_error("c1_distance domain mismatch");
  return c1_distance_parts(f, g, fa);
}

template <C1Function A, C1Function B>
double c1_distance(const A& f, const B& g) {
  return c1_distance_parts(f, g).total();
}

template <C1Function A, C1Function B>
double c1_distance(const A& f, const B& g, Interval R) {
  return c1_distance_parts(f, g, R).total();
}

struct IdentityFn {
  Interval dom{0, 1};
  Jet eval(double x) const { return {x, 1.0}; }
  double operator()(double x) const { return x; }
  double inverse(double y) const { return y; }
  Interval domain() const { return dom; }
};

template <C1Function A>
double distance_to_id(const A& f) {
  return c1_distance(f, IdentityFn{f.domain()});
}

// f∘g on g's nodes and g-preimages of f's nodes
inline C1Map compose(const C1Map& f, const C1Map& g) {
  double tol = 1e-9 * f.domain().length();
  if (g.target().lo < f.domain().lo - tol || g.target().hi > f.domain().hi + tol)
    throw composition_error("compose: target of g not inside domain of f");
  std::vector<double> pre;
  for (double x : f.nodes())
    if (x > g.target().lo && x < g.target().hi) pre.push_back(g.inverse(x));
  std::size_t cap = 4 * std::max(f.size(), g.size());
  if (g.size() + pre.size() > cap) {
    std::size_t keep = cap > g.size() ? cap - g.size() : 0;
    std::vector<double> thin;
    if (keep > 0) {
      double step = double(pre.size()) / keep;
      for (std::size_t k = 0; k < keep; ++k) thin.push_back(pre[std::size_t(k * step)]);
    }
    pre.swap(thin);
  }
  auto grid = merge_grids(g.nodes(), pre);
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet gj = g.eval(grid[i]);
    Jet fj = f.eval(std::clamp(gj.v, f.domain().lo, f.domain().hi));
    y[i] = fj.v;
    d[i] = fj.d * gj.d;
  }
  Interval tgt{f(std::clamp(g.target().lo, f.domain().lo, f.domain().hi)),
               f(std::clamp(g.target().hi, f.domain().lo, f.domain().hi))};
  return C1Map(g.domain(), tgt, std::move(grid), std::move(y), std::move(d));
}

// swapped node data plus exact samples at cell midpoints
inline C1Map invert(const C1Map& f) {
  std::size_t n = f.size();
  std::vector<double> x, y, d;
  x.reserve(2 * n);
  y.reserve(2 * n);
  d.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(f.values()[i]);
    y.push_back(f.nodes()[i]);
    d.push_back(1.0 / f.derivs()[i]);
    if (i + 1 < n) {
      double m = 0.5 * (f.nodes()[i] + f.nodes()[i + 1]);
      Jet j = f.eval(m);
      if (j.v > f.values()[i] && j.v < f.values()[i + 1]) {
        x.push_back(j.v);
        y.push_back(m);
        d.push_back(1.0 / j.d);
      }
    }
  }
  return C1Map(f.target(), f.domain(), std::move(x), std::move(y), std::move(d));
}

// h∘f∘h⁻¹ evaluated pointwise through h's root finder
inline C1Map conjugate(const C1Map& f, const C1Map& h) {
  double tol = 1e-9 * f.domain().length();
  if (std::abs(h.domain().lo - f.domain().lo) > tol || std::abs(h.domain().hi - f.domain().hi) > tol ||
      std::abs(h.target().lo - h.domain().lo) > tol || std::abs(h.target().hi - h.domain().hi) > tol)
    throw composition_error("conjugate: h must be a self-diffeomorphism of f's domain");
  std::vector<double> img;
  img.reserve(f.size());
  for (double x : f.nodes()) img.push_back(h(x));
  auto grid = merge_grids(h.values(), img);
  std::size_t cap = 4 * std::max(f.size(), h.size());
  if (grid.size() > cap) {
    std::vector<double> thin;
    double step = double(grid.size() - 1) / (cap - 1);
    for (std::size_t k = 0; k + 1 < cap; ++k) thin.push_back(grid[std::size_t(k * step)]);
    thin.push_back(grid.back());
    grid = merge_grids(thin, {});
  }
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = h.inverse(grid[i]);
    Jet fj = f.eval(x);
    Jet hf = h.eval(fj.v);
    Jet hx = h.eval(x);
    y[i] = hf.v;
    d[i] = hf.d * fj.d / hx.d;
  }
  return C1Map(f.domain(), f.target(), std::move(grid), std::move(y), std::move(d));
}

struct FixedComponent {
  Interval span;  // lo == hi for an isolated zero
  bool plateau = false;
  int left_sign = 0;   // sign of f - id just left; 0 at the domain end
  int right_sign = 0;
};

template <C1Function F>
std::vector<FixedComponent> fixed_points(const F& f, double tol = 1e-9) {
  Interval I = f.domain();
  auto s = dense_samples(nodes_of(f), I);
  std::size_t n = s.size();
  std::vector<double> g(n), dg(n);
  for (std::size_t i = 0; i < n; ++i) {
    Jet j = f.eval(s[i]);
    g[i] = j.v - s[i];
    dg[i] = j.d - 1.0;
  }
  auto sgn = [&](std::size_t i) { return std::abs(g[i]) <= tol ? 0 : (g[i] > 0 ? 1 : -1); };
  auto bisect = [&](double a, double b) {
    double ga = f.eval(a).v - a;
    for (int k = 0; k < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++k) {
      double m = 0.5 * (a + b);
      double gm = f.eval(m).v - m;
      if ((gm > 0) == (ga > 0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  std::vector<FixedComponent> out;
  int last_sign = 0;
  std::size_t i = 0;
  while (i < n) {
    int si = sgn(i);
    if (si != 0) {
      if (i + 1 < n && sgn(i + 1) == -si) {
        double z = bisect(s[i], s[i + 1]);
        out.push_back({{z, z}, false, si, -si});
      }
      last_sign = si;
      ++i;
      continue;
    }
    std::size_t j = i;
    double maxd = 0;
    while (j + 1 < n && sgn(j + 1) == 0) ++j;
    for (std::size_t k = i; k <= j; ++k) maxd = std::max(maxd, std::abs(dg[k]));
    int left = i == 0 ? 0 : last_sign;
    int right = j + 1 < n ? sgn(j + 1) : 0;
    FixedComponent c;
    c.left_sign = left;
    c.right_sign = right;
    if (j > i && maxd <= 1e-6) {
      c.plateau = true;
      c.span = {s[i], s[j]};
    } else {
      double z;
      if (i == 0)
        z = s[0];
      else if (j + 1 == n)
        z = s[n - 1];
      else if (left != 0 && right == -left)
        z = bisect(s[i - 1], s[j + 1]);
      else {
        std::size_t best = i;
        for (std::size_t k = i; k <= j; ++k)
          if (std::abs(g[k]) < std::abs(g[best])) best = k;
        z = s[best];
      }
      c.span = {z, z};
    }
    out.push_back(c);
    last_sign = right;
    i = j + 1;
  }
  return out;
}

// drop interior nodes whose offset from an endpoint p is below 1e-6·|p|,
// where doubles no longer resolve the cell
inline bool resolvable(double x, Interval I) {
  if (x <= I.lo || x >= I.hi) return true;
  return x - I.lo >= 1e-6 * std::abs(I.lo) && I.hi - x >= 1e-6 * std::abs(I.hi);
}

// A∘(f|sub)∘A⁻¹ with A the increasing affine map sub -> [0,1]
inline C1Map affine_renormalize(const C1Map& f, Interval sub, int min_nodes = 513) {
  double L = sub.length();
  double tol = 1e-9 * std::max(L, 1e-300);
  if (!f.domain().contains(sub.lo, tol) || !f.domain().contains(sub.hi, tol))
    throw invariance_error("affine_renormalize: sub-interval outside domain");
  if (std::abs(f(sub.lo) - sub.lo) > tol || std::abs(f(sub.hi) - sub.hi) > tol)
    throw invariance_error("affine_renormalize: sub-interval not invariant");
  std::vector<double> xs;
  for (double x : f.nodes())
    if (x > sub.lo && x < sub.hi && resolvable(x, sub)) xs.push_back(x);
  xs = merge_grids(xs, {sub.lo, sub.hi});
  if (int(xs.size()) < min_nodes) xs = merge_grids(xs, make_grid(sub, min_nodes));
  xs.front() = sub.lo;
  xs.back() = sub.hi;
  std::vector<double> u, y, d;
  for (double x : xs) {
    Jet j = f.eval(x);
    double uu = (x - sub.lo) / L;
    if (!u.empty() && uu <= u.back()) continue;
    u.push_back(uu);
    y.push_back(std::clamp((j.v - sub.lo) / L, 0.0, 1.0));
    d.push_back(j.d);
  }
  u.front() = 0;
  u.back() = 1;
  y.front() = 0;
  y.back() = 1;
  return C1Map({0, 1}, {0, 1}, std::move(u), std::move(y), std::move(d));
}

// inverse of affine_renormalize: a map of [0,1] placed on sub
inline C1Map affine_place(const C1Map& g, Interval sub) {
  double L = sub.length();
  std::vector<double> x, y;
  for (double u : g.nodes()) x.push_back(sub.lo + L * u);
  for (double v : g.values()) y.push_back(sub.lo + L * v);
  return C1Map(sub, sub, std::move(x), std::move(y), g.derivs());
}

// R∘f∘R with R the orientation reversing isometry of the domain
inline C1Map reflect(const C1Map& f) {
  Interval D = f.domain();
  Interval T = f.target();
  std::size_t n = f.size();
  std::vector<double> x, y, d;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = n - 1 - i;
    double xr = D.lo + D.hi - f.nodes()[k];
    double yr = T.lo + T.hi - f.values()[k];
    if (i > 0 && i + 1 < n && !(resolvable(xr, D) && resolvable(yr, T))) continue;
    if (!x.empty() && !(xr > x.back() && yr > y.back())) {
      if (i + 1 < n) continue;
      x.pop_back();
      y.pop_back();
      d.pop_back();
    }
    x.push_back(xr);
    y.push_back(yr);
    d.push_back(f.derivs()[k]);
  }
  return C1Map(D, T, std::move(x), std::move(y), std::move(d));
}

template <C1Function F>
double sup_minus_id(const F& f, Interval R) {
  double m = 0;
  for (double x : dense_samples(nodes_of(f), R)) m = std::max(m, std::abs(f.eval(x).v - x));
  return m;
}

}  // namespace c1lab
