#pragma once

#include <string>
#include <vector>

#include "core.hpp"

namespace c1lab {

// 1 on [0,1/2], 0 on [3/4,1], cubic smoothstep in between
struct BumpProfile {
  Jet phi(double x) const {
    if (x <= 0.5) return {1.0, 0.0};
    if (x >= 0.75) return {0.0, 0.0};
    double s = (x - 0.5) * 4;
    return {1 - s * s * (3 - 2 * s), -24 * s * (1 - s)};
  }

  double m_phi() const {
    static const double m = [this] {
      double best = 0;
      for (int i = 0; i <= 100000; ++i) best = std::max(best, std::abs(phi(i / 100000.0).d));
      return best;
    }();
    return m;
  }
};

inline const BumpProfile& default_profile() {
  static const BumpProfile p;
  return p;
}

inline double bump(double x) {
  if (x < 0 || x > 1) throw domain_error("bump: x outside [0,1]");
  return default_profile().phi(x).v;
}

inline double marg(double eps, double m_phi) {
  if (!(eps > 0)) throw precondition_error("marg: eps must be positive");
  return std::min(eps / 2, eps / (4 * m_phi));
}

inline double marg(double eps) { return marg(eps, default_profile().m_phi()); }

inline double default_eps_tilde(double eps) { return 0.9 * marg(eps); }

struct Zone {
  Interval span;
  std::string source;
};

struct GlueReport {
  C1Map result;
  double achieved_distance = 0;
  std::vector<Zone> coincidence_zones;
};

template <C1Function F, C1Function G>
bool in_U(const F& f, const G& g, double eps, double a, double b) {
  Interval D = g.domain();
  double l = c1_distance(f, g, {D.lo, a});
  double r = c1_distance(f, g, {b, D.hi});
  return l < eps && r < eps;
}

namespace detail {

inline std::vector<double> ramp_nodes(double a, double b, int n = 32) {
  std::vector<double> v;
  for (int k = 0; k <= n; ++k) v.push_back(a + (b - a) * k / n);
  return v;
}

// Φ₀·F + (1-Φ₀)·G on a grid; Φ₀ given as a jet-valued weight
template <C1Function F, C1Function G, class W>
C1Map blend_on(const F& f, const G& g, const std::vector<double>& grid, W weight, Interval dom, Interval tgt) {
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid[i];
    Jet w = weight(x);
    if (w.v == 1.0 && w.d == 0.0) {
      Jet a = f.eval(x);
      y[i] = a.v;
      d[i] = a.d;
    } else if (w.v == 0.0 && w.d == 0.0) {
      Jet b = g.eval(x);
      y[i] = b.v;
      d[i] = b.d;
    } else {
      Jet a = f.eval(x), b = g.eval(x);
      y[i] = w.v * a.v + (1 - w.v) * b.v;
      d[i] = w.d * (a.v - b.v) + w.v * a.d + (1 - w.v) * b.d;
    }
  }
  return C1Map(dom, tgt, grid, std::move(y), std::move(d));
}

}  // namespace detail

template <C1Function F, C1Function G>
GlueReport glue_endpoints(const F& f, const G& g, double a, double b, double eps) {
  Interval D = g.domain();
  if (!(eps > 0)) throw precondition_error("glue_endpoints: eps must be positive");
  if (a >= b) {
    auto r = materialize(f, nodes_of(f));
    return {r, c1_distance(r, g), {{D, "f"}}};
  }
  if (!(a > D.lo && b < D.hi)) throw precondition_error("glue_endpoints: need lo < a < b < hi");
  double l = c1_distance(f, g, {D.lo, a});
  double r = c1_distance(f, g, {b, D.hi});
  double m = marg(eps);
  if (!(l < m && r < m)) throw margin_error("glue_endpoints: restricted norms exceed marg(eps)", l, r);
  const BumpProfile& P = default_profile();
  double la = a - D.lo, lb = D.hi - b;
  auto weight = [&](double x) -> Jet {
    if (x <= a) {
      Jet p = P.phi((x - D.lo) / la);
      return {p.v, p.d / la};
    }
    if (x >= b) {
      Jet p = P.phi((D.hi - x) / lb);
      return {p.v, -p.d / lb};
    }
    return {0.0, 0.0};
  };
  std::vector<double> must{D.lo, D.lo + la / 2, D.lo + 0.75 * la, a, b, D.hi - 0.75 * lb, D.hi - lb / 2, D.hi};
  auto grid = merge_grids(merge_grids(nodes_of(f), nodes_of(g)), must);
  grid = merge_grids(grid, detail::ramp_nodes(D.lo + la / 2, D.lo + 0.75 * la));
  grid = merge_grids(grid, detail::ramp_nodes(D.hi - 0.75 * lb, D.hi - lb / 2));
  C1Map res = detail::blend_on(f, g, grid, weight, D, Interval{f.eval(D.lo).v, f.eval(D.hi).v});
  GlueReport rep{res, c1_distance(res, g), {}};
  rep.coincidence_zones = {{{D.lo, D.lo + la / 2}, "f"}, {{a, b}, "g"}, {{D.hi - lb / 2, D.hi}, "f"}};
  return rep;
}

// f only needs to be defined on [a, hi]
template <C1Function F, C1Function G>
GlueReport glue_partial(const F& f, const G& g, double a, double b, double eps) {
  Interval D = g.domain();
  if (!(eps > 0)) throw precondition_error("glue_partial: eps must be positive");
  if (!(a > D.lo && b < D.hi)) throw precondition_error("glue_partial: need lo < a, b < hi");
  double mid_a = 0.5 * (a + D.hi), mid_b = 0.5 * (b + D.hi);
  if (!(b > mid_a)) throw precondition_error("glue_partial: need b > (a+1)/2");
  double n = c1_distance(f, g, {a, D.hi});
  double m = marg(eps);
  if (!(n < m)) throw margin_error("glue_partial: restricted norm exceeds marg(eps)", n, n);
  const BumpProfile& P = default_profile();
  double wa = (D.hi - a) / 2, wb = (D.hi - b) / 2;
  // weight on g: 1 on [lo,a] and [mid_b,hi], 0 on [mid_a,b]
  auto wg = [&](double x) -> Jet {
    if (x <= a) return {1.0, 0.0};
    if (x <= mid_a) {
      Jet p = P.phi((x - a) / wa);
      return {p.v, p.d / wa};
    }
    if (x <= b) return {0.0, 0.0};
    if (x <= mid_b) {
      Jet p = P.phi((mid_b - x) / wb);
      return {p.v, -p.d / wb};
    }
    return {1.0, 0.0};
  };
  std::vector<double> must{D.lo, a, a + wa / 2, a + 0.75 * wa, mid_a, b, mid_b - 0.75 * wb, mid_b - wb / 2, mid_b, D.hi};
  std::vector<double> fn;
  for (double x : nodes_of(f))
    if (x >= a) fn.push_back(x);
  auto grid = merge_grids(merge_grids(nodes_of(g), fn), must);
  grid = merge_grids(grid, detail::ramp_nodes(a + wa / 2, a + 0.75 * wa));
  grid = merge_grids(grid, detail::ramp_nodes(mid_b - 0.75 * wb, mid_b - wb / 2));
  C1Map res = detail::blend_on(g, f, grid, wg, D, g.domain() == D ? Interval{g.eval(D.lo).v, g.eval(D.hi).v} : D);
  GlueReport rep{res, c1_distance(res, g), {}};
  rep.coincidence_zones = {{{D.lo, a}, "g"}, {{mid_a, b}, "f"}, {{mid_b, D.hi}, "g"}};
  return rep;
}

// the blended window of a local gluing: f on [x0-η, x0+η], g outside [x0-3η/2, x0+3η/2]
template <C1Function F, C1Function G>
C1Map glue_local_patch(const F& f, const G& g, double x0, double eta, const std::vector<double>& extra = {}) {
  const BumpProfile& P = default_profile();
  Interval W{x0 - 2 * eta, x0 + 2 * eta};
  auto weight = [&](double x) -> Jet {
    double r = std::abs(x - x0) / (2 * eta);
    if (r > 1) return {0.0, 0.0};
    Jet p = P.phi(r);
    double s = x >= x0 ? 1.0 : -1.0;
    return {p.v, p.d * s / (2 * eta)};
  };
  auto grid = uniform_grid(W, 49);
  for (double x : extra)
    if (x > W.lo && x < W.hi) grid.push_back(x);
  grid = merge_grids(grid, {x0 - eta, x0 + eta, x0 - 1.5 * eta, x0 + 1.5 * eta});
  return detail::blend_on(f, g, grid, weight, W, Interval{g.eval(W.lo).v, g.eval(W.hi).v});
}

inline C1Map splice(const C1Map& g, const C1Map& patch) {
  Interval W = patch.domain();
  std::vector<double> x, y, d;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes()[i] < W.lo) {
      x.push_back(g.nodes()[i]);
      y.push_back(g.values()[i]);
      d.push_back(g.derivs()[i]);
    }
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (!x.empty() && patch.nodes()[i] <= x.back()) continue;
    x.push_back(patch.nodes()[i]);
    y.push_back(patch.values()[i]);
    d.push_back(patch.derivs()[i]);
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes()[i] > W.hi) {
      x.push_back(g.nodes()[i]);
      y.push_back(g.values()[i]);
      d.push_back(g.derivs()[i]);
    }
  return C1Map(g.domain(), g.target(), std::move(x), std::move(y), std::move(d));
}

template <C1Function F>
GlueReport glue_local(const F& f, const C1Map& g, double x0, double eta, double eps) {
  Interval D = g.domain();
  if (!(eps > 0)) throw precondition_error("glue_local: eps must be positive");
  double fx = f.eval(x0).v, gx = g.eval(x0).v;
  if (std::abs(fx - gx) > 1e-10 * D.length()) throw matching_error("glue_local: f(x0) != g(x0)");
  if (!(eta > 0 && eta < std::min(x0 - D.lo, D.hi - x0) / 2)) throw precondition_error("glue_local: eta too large");
  Interval W{x0 - 2 * eta, x0 + 2 * eta};
  double n = c1_distance(f, g, W);
  double m = marg(eps);
  if (!(n < m)) throw margin_error("glue_local: window norm exceeds marg(eps)", n, n);
  std::vector<double> extra;
  for (double x : nodes_of(f))
    if (W.contains(x)) extra.push_back(x);
  for (double x : g.nodes())
    if (W.contains(x)) extra.push_back(x);
  C1Map res = splice(g, glue_local_patch(f, g, x0, eta, extra));
  GlueReport rep{res, c1_distance(res, g), {}};
  rep.coincidence_zones = {{{x0 - eta, x0 + eta}, "f"}, {{D.lo, W.lo}, "g"}, {{W.hi, D.hi}, "g"}};
  return rep;
}

}  // namespace c1lab
