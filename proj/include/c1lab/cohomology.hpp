#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "core.hpp"

namespace c1lab {

// lift of a circle diffeomorphism, stored on one period: F(1) = F(0) + 1
class CircleLift {
 public:
  explicit CircleLift(C1Map lift) : f_(std::move(lift)) {
    if (!(f_.domain() == Interval{0, 1})) throw invariance_error("CircleLift: lift must live on [0,1]");
    double gap = f_.target().hi - f_.target().lo - 1;
    if (std::abs(gap) > 1e-12) throw invariance_error("CircleLift: F(1) != F(0) + 1");
    if (gap != 0) {
      auto y = f_.values();
      y.back() = y.front() + 1;
      f_ = C1Map({0, 1}, {y.front(), y.back()}, f_.nodes(), y, f_.derivs());
    }
  }

  Jet eval(double x) const {
    double k = std::floor(x);
    Jet j = f_.eval(x - k);
    return {j.v + k, j.d};
  }
  double operator()(double x) const { return eval(x).v; }
  double inverse(double y) const {
    double k = std::floor(y - f_.target().lo);
    return f_.inverse(y - k) + k;
  }
  Interval domain() const { return {0, 1}; }
  const std::vector<double>& nodes() const { return f_.nodes(); }
  const C1Map& period() const { return f_; }

 private:
  C1Map f_;
};

inline double frac(double x) { return x - std::floor(x); }

inline CircleLift rigid_rotation(double alpha, int n = 257) {
  auto g = uniform_grid({0, 1}, n);
  std::vector<double> y(g.size()), d(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) y[i] = g[i] + alpha;
  return CircleLift(C1Map({0, 1}, {alpha, alpha + 1}, g, y, d));
}

// ψ R_α ψ⁻¹ with ψ(x) = x + eps·sin(2πx)/(2π)
inline CircleLift perturbed_rotation(double alpha, double eps, int n = 513) {
  if (!(std::abs(eps) < 1)) throw builder_error("perturbed_rotation: |eps| must be < 1");
  const double tau = 2 * std::numbers::pi;
  auto psi = [&](double u) { return u + eps * std::sin(tau * u) / tau; };
  auto dpsi = [&](double u) { return 1 + eps * std::cos(tau * u); };
  auto psi_inv = [&](double x) {
    double u = x;
    for (int k = 0; k < 60; ++k) {
      double du = (psi(u) - x) / dpsi(u);
      u -= du;
      if (std::abs(du) < 1e-16) break;
    }
    return u;
  };
  auto g = uniform_grid({0, 1}, n);
  std::vector<double> y(g.size()), d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double u = psi_inv(g[i]);
    y[i] = psi(u + alpha);
    d[i] = dpsi(u + alpha) / dpsi(u);
  }
  y.back() = y.front() + 1;
  d.back() = d.front();
  return CircleLift(C1Map({0, 1}, {y.front(), y.back()}, g, y, d));
}

namespace detail {

inline double step(const C1Map& f, double x) { return f(x); }
inline double step(const CircleLift& F, double x) { return frac(F(x)); }
inline bool periodic(const C1Map&) { return false; }
inline bool periodic(const CircleLift&) { return true; }

}  // namespace detail

template <class M>
concept Dynamics = requires(const M& f, double x) {
  { detail::step(f, x) } -> std::convertible_to<double>;
  { f.eval(x) } -> std::convertible_to<Jet>;
  { f.nodes() } -> std::convertible_to<const std::vector<double>&>;
};

template <Dynamics M>
std::vector<double> orbit(const M& f, double x, int len) {
  std::vector<double> o(len);
  for (int i = 0; i < len; ++i) {
    o[i] = x;
    if (i + 1 < len) x = detail::step(f, x);
  }
  return o;
}

template <Dynamics M>
double log_deriv(const M& f, double x) {
  return std::log(f.eval(x).d);
}

struct GridFunction {
  std::vector<double> x, y;

  double operator()(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    std::size_t i = std::size_t(it - x.begin()) - 1;
    double s = (t - x[i]) / (x[i + 1] - x[i]);
    return (1 - s) * y[i] + s * y[i + 1];
  }
  double sup_abs() const {
    double m = 0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
  }
};

template <Dynamics M>
GridFunction birkhoff_sum(const M& f, const std::function<double(double)>& phi, int k) {
  if (k < 1) throw precondition_error("birkhoff_sum: k must be >= 1");
  GridFunction S{f.nodes(), {}};
  S.y.resize(S.x.size());
  for (std::size_t j = 0; j < S.x.size(); ++j) {
    double s = 0;
    for (double p : orbit(f, S.x[j], k)) s += phi(p);
    S.y[j] = s;
  }
  return S;
}

template <Dynamics M>
std::vector<double> working_samples(const M& f, int per_cell = 4) {
  auto s = dense_samples(f.nodes(), f.domain(), per_cell);
  if (detail::periodic(f)) s.pop_back();
  return s;
}

// sup |S_n(log Df)| / n
template <Dynamics M>
double lyapunov_sup(const M& f, int n) {
  if (n < 1) throw precondition_error("lyapunov_sup: n must be >= 1");
  double m = 0;
  for (double x : working_samples(f)) {
    double s = 0;
    for (double p : orbit(f, x, n)) s += log_deriv(f, p);
    m = std::max(m, std::abs(s) / n);
  }
  return m;
}

struct Cocycle {
  Interval dom{0, 1};
  std::vector<double> nodes;
  std::vector<double> rho;  // at nodes, normalization shift applied
  std::function<double(double)> eval;  // pointwise, shift applied
  double residual = 0;
  bool normalized = false;
  double quad_tol = 0;
  int n = 0;
  double lambda = 1;
  bool periodic = false;

  double operator()(double x) const { return eval(x); }
};

namespace detail {

struct Quadrature {
  std::vector<double> cumulative;  // ∫ exp ρ from the left end to each node
  double total = 0;
  double err = 0;  // Richardson estimate of the Simpson error
};

inline Quadrature simpson_exp(const std::vector<double>& x, const std::function<double(double)>& rho) {
  Quadrature q;
  q.cumulative.assign(x.size(), 0.0);
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = std::exp(rho(x[i]));
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    double a = x[i], b = x[i + 1], h = b - a;
    double em = std::exp(rho(0.5 * (a + b)));
    double e1 = std::exp(rho(a + 0.25 * h)), e3 = std::exp(rho(a + 0.75 * h));
    double coarse = h / 6 * (e[i] + 4 * em + e[i + 1]);
    double fine = h / 12 * (e[i] + 4 * e1 + 2 * em + 4 * e3 + e[i + 1]);
    q.err += std::abs(fine - coarse) / 15;
    q.cumulative[i + 1] = q.cumulative[i] + fine;
  }
  q.total = q.cumulative.back();
  return q;
}

}  // namespace detail

// bisect cells until ρ is nearly linear on each; the conjugator's derivative is interpolated between nodes
inline std::vector<double> refine_nodes(const std::vector<double>& nodes, const std::function<double(double)>& rho,
                                        double tol = 2e-6, std::size_t max_nodes = 40000) {
  struct Cell {
    double a, b, ra, rb;
    int depth;
  };
  std::vector<double> out{nodes.front()};
  std::vector<Cell> stack;
  std::vector<double> r(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) r[i] = rho(nodes[i]);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    stack.push_back({nodes[i], nodes[i + 1], r[i], r[i + 1], 0});
    while (!stack.empty()) {
      Cell c = stack.back();
      stack.pop_back();
      double m = 0.5 * (c.a + c.b), rm = rho(m);
      bool split = std::abs(rm - 0.5 * (c.ra + c.rb)) > tol && c.depth < 12 && out.size() + stack.size() < max_nodes;
      if (split) {
        stack.push_back({m, c.b, rm, c.rb, c.depth + 1});
        stack.push_back({c.a, m, c.ra, rm, c.depth + 1});
      } else {
        out.push_back(c.b);
      }
    }
  }
  return out;
}

// subtract log ∫exp ρ so that ∫exp ρ = 1
inline Cocycle normalize(Cocycle c) {
  auto raw = c.eval;
  auto q = detail::simpson_exp(c.nodes, raw);
  double shift = std::log(q.total);
  c.eval = [raw, shift](double x) { return raw(x) - shift; };
  for (double& r : c.rho) r -= shift;
  c.quad_tol = q.err / q.total;
  c.normalized = true;
  return c;
}

template <Dynamics M>
double cocycle_residual(const M& f, const std::function<double(double)>& rho) {
  double m = 0;
  for (double x : working_samples(f)) {
    double fx = detail::step(f, x);
    m = std::max(m, std::abs(rho(x) - rho(fx) - log_deriv(f, x)));
  }
  return m;
}

namespace detail {

template <Dynamics M>
double cesaro_point(const M& f, int n, double x) {
  double s = 0;
  for (int i = 0; i < n; ++i) {
    s += double(n - i) * log_deriv(f, x);
    x = step(f, x);
  }
  return s / n;
}

}  // namespace detail

// ρ_n = (S_1 + ... + S_n)/n of log Df, evaluated through point orbits
template <Dynamics M>
Cocycle cesaro_rho(const M& f, int n) {
  if (n < 1) throw precondition_error("cesaro_rho: n must be >= 1");
  auto fp = std::make_shared<const M>(f);
  Cocycle c;
  c.dom = f.domain();
  c.nodes = f.nodes();
  c.n = n;
  c.periodic = detail::periodic(f);
  c.eval = [fp, n](double x) { return detail::cesaro_point(*fp, n, x); };
  c.nodes = refine_nodes(c.nodes, c.eval);
  c.rho.resize(c.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) c.rho[i] = c.eval(c.nodes[i]);
  c = normalize(std::move(c));
  c.residual = cocycle_residual(f, c.eval);
  return c;
}

struct ResidualPoint {
  int n;
  double residual;  // sup |ρ_n − ρ_n∘f − log Df|
  double telescoped;  // sup |S_n(log Df)∘f| / n
  double lyapunov;  // sup |S_n(log Df)| / n
};

// all three quantities for several n from one orbit per sample point
template <Dynamics M>
std::vector<ResidualPoint> residual_trace(const M& f, const std::vector<int>& ns) {
  int nmax = *std::max_element(ns.begin(), ns.end());
  std::vector<ResidualPoint> out;
  for (int n : ns) out.push_back({n, 0, 0, 0});
  std::vector<double> phi(nmax + 1);
  for (double x : working_samples(f)) {
    auto o = orbit(f, x, nmax + 1);
    for (int i = 0; i <= nmax; ++i) phi[i] = log_deriv(f, o[i]);
    for (auto& r : out) {
      int n = r.n;
      double rx = 0, rfx = 0, sn = 0, snf = 0;
      for (int i = 0; i < n; ++i) {
        rx += double(n - i) * phi[i];
        rfx += double(n - i) * phi[i + 1];
        sn += phi[i];
        snf += phi[i + 1];
      }
      r.residual = std::max(r.residual, std::abs((rx - rfx) / n - phi[0]));
      r.telescoped = std::max(r.telescoped, std::abs(snf) / n);
      r.lyapunov = std::max(r.lyapunov, std::abs(sn) / n);
    }
  }
  return out;
}

// h(x) = ∫₀ˣ exp ρ, with Dh = exp ρ at the nodes
inline C1Map navas_conjugator(const Cocycle& rho) {
  if (!rho.normalized) throw normalization_error("navas_conjugator: cocycle is not normalized");
  auto q = detail::simpson_exp(rho.nodes, rho.eval);
  if (std::abs(q.total - 1) > 1e-9 + 4 * q.err) throw normalization_error("navas_conjugator: ∫exp(rho) != 1");
  std::vector<double> y(q.cumulative), d(rho.nodes.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::exp(rho.eval(rho.nodes[i]));
  Interval D = rho.dom;
  for (double& v : y) v = D.lo + v * D.length();
  y.back() = D.hi;
  if (rho.periodic) d.back() = d.front();
  return C1Map(D, D, rho.nodes, std::move(y), std::move(d));
}

// sup over cell midpoints of |Dh / exp ρ − 1|: how far the interpolated conjugator strays from the cocycle
inline double derivative_mismatch(const Cocycle& rho, const C1Map& h) {
  double m = 0;
  for (std::size_t i = 0; i + 1 < rho.nodes.size(); ++i) {
    double x = 0.5 * (rho.nodes[i] + rho.nodes[i + 1]);
    m = std::max(m, std::abs(h.eval(x).d / std::exp(rho(x)) - 1));
  }
  return m;
}

struct PathParam {
  int n;
  double lambda;
};

// 1 − t = λ/n + (1−λ)/(n+1)
inline PathParam path_param(double t) {
  if (!(t >= 0 && t < 1)) throw precondition_error("rho_path: t must lie in [0,1)");
  double s = 1 - t;
  int n = int(std::floor(1 / s * (1 + 1e-12)));
  if (n < 1) n = 1;
  double lambda = s * n * (n + 1.0) - n;
  if (lambda > 1) {
    lambda = 1;
  } else if (lambda < 0) {
    lambda = 0;
  }
  return {n, lambda};
}

inline double path_time(int n, double lambda) { return 1 - (lambda / n + (1 - lambda) / (n + 1.0)); }

struct PathCocycle {
  Cocycle rho;
  double endpoint_residual = 0;  // max of the residuals of ρ_n and ρ_{n+1}
  double slack = 0;  // measured residual minus endpoint_residual
};

template <Dynamics M>
PathCocycle rho_path(const M& f, double t) {
  PathParam p = path_param(t);
  Cocycle a = cesaro_rho(f, p.n);
  if (p.lambda == 1) return {a, a.residual, 0};
  Cocycle b = cesaro_rho(f, p.n + 1);
  Cocycle c;
  c.dom = a.dom;
  c.nodes = a.nodes;
  c.n = p.n;
  c.lambda = p.lambda;
  c.periodic = a.periodic;
  double l = p.lambda;
  auto ea = a.eval, eb = b.eval;
  c.eval = [ea, eb, l](double x) { return l * ea(x) + (1 - l) * eb(x); };
  c.rho.resize(c.nodes.size());
  for (std::size_t i = 0; i < c.rho.size(); ++i) c.rho[i] = l * a.rho[i] + (1 - l) * b.rho[i];
  c = normalize(std::move(c));
  c.residual = cocycle_residual(f, c.eval);
  double e = std::max(a.residual, b.residual);
  return {c, e, c.residual - e};
}

struct Estimate {
  double value;
  double halfwidth;
  double spread;  // across base points
};

inline Estimate rotation_number(const CircleLift& F, int n, int base_points = 8) {
  if (n < 1) throw precondition_error("rotation_number: n must be >= 1");
  double sum = 0, lo = 1e300, hi = -1e300;
  for (int b = 0; b < base_points; ++b) {
    double x0 = double(b) / base_points, x = x0;
    for (int i = 0; i < n; ++i) x = F(x);
    double r = (x - x0) / n;
    sum += r;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {sum / base_points, 1.0 / n, hi - lo};
}

// distance from p/q with q <= qmax
inline double rational_gap(double a, int qmax = 50) {
  double g = 1e300;
  for (int q = 1; q <= qmax; ++q) g = std::min(g, std::abs(a * q - std::round(a * q)) / q);
  return g;
}

struct ConjugateDeviation {
  double c0 = 0;  // sup |hfh⁻¹(y) − y − α|
  double c1 = 0;  // sup |D(hfh⁻¹)(y) − 1|
  double log_c1 = 0;  // sup |log D(hfh⁻¹)|
  double total() const { return c0 + c1; }
};

// hfh⁻¹ against the translation by alpha, sampled through h⁻¹
template <Dynamics M>
ConjugateDeviation conjugate_deviation(const M& f, const C1Map& h, double alpha = 0) {
  ConjugateDeviation r;
  const bool per = detail::periodic(f);
  for (double y : working_samples(f)) {
    double x = h.inverse(y);
    Jet fx = f.eval(x);
    double z = fx.v, k = 0;
    if (per) {
      k = std::floor(z);
      z -= k;
    }
    Jet hz = h.eval(z);
    double g = hz.v + k;
    double dg = hz.d * fx.d / h.eval(x).d;
    r.c0 = std::max(r.c0, std::abs(g - y - alpha));
    r.c1 = std::max(r.c1, std::abs(dg - 1));
    r.log_c1 = std::max(r.log_c1, std::abs(std::log(dg)));
  }
  return r;
}

}  // namespace c1lab
