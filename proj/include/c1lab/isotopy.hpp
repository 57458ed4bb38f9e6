#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "builders.hpp"
#include "conjugacy.hpp"
#include "gluing.hpp"

namespace c1lab {

// ---------------------------------------------------------------- frames

// contraction coordinates: 0 attracting, 1 repelling
struct Frame {
  bool reflected = false;
  double to(double x) const { return reflected ? 1 - x : x; }
  C1Map map(const C1Map& f) const { return reflected ? reflect(f) : f; }
};

template <C1Function F>
Frame contraction_frame(const F& f) {
  return {direction_of(f) > 0};
}

// ---------------------------------------------------------------- envelopes

struct MonotoneEnvelopes {
  C1Map h_plus;   // ∫ running sup Df: slower contraction, above f
  C1Map h_minus;  // ∫ running inf Df: faster contraction, below f
  double X = 0;   // construction zone [0, X]
};

inline MonotoneEnvelopes monotone_envelopes(const C1Map& f, double deriv_tol = 1e-6) {
  Interval D = f.domain();
  if (D.lo != 0) throw precondition_error("monotone_envelopes: domain must start at 0");
  double d0 = f.eval(0).d;
  if (std::abs(d0 - 1) <= deriv_tol) throw precondition_error("monotone_envelopes: Df(0) = 1, use the tangent envelopes");
  auto s = dense_samples(f.nodes(), D, 4);
  std::size_t n = s.size();
  std::vector<double> lo(n), hi(n), yl(n), yh(n);
  double mi = d0, ma = d0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = f.eval(s[i]).d;
    mi = std::min(mi, d);
    ma = std::max(ma, d);
    lo[i] = mi;
    hi[i] = ma;
    if (i == 0) {
      yl[i] = yh[i] = 0;
    } else {
      double w = s[i] - s[i - 1];
      yl[i] = yl[i - 1] + 0.5 * (lo[i] + lo[i - 1]) * w;
      yh[i] = yh[i - 1] + 0.5 * (hi[i] + hi[i - 1]) * w;
    }
  }
  // keep the zone where h_plus stays below the identity
  std::size_t m = 1;
  while (m + 1 < n && yh[m + 1] < s[m + 1] && f.eval(s[m + 1]).v < s[m + 1]) ++m;
  if (m < 2) throw precondition_error("monotone_envelopes: no contraction zone near 0");
  auto cut = [&](std::vector<double> v) {
    v.resize(m + 1);
    return v;
  };
  std::vector<double> x = cut(s);
  MonotoneEnvelopes e;
  e.X = x.back();
  e.h_plus = C1Map({0, e.X}, {0, yh[m]}, x, cut(yh), cut(hi));
  e.h_minus = C1Map({0, e.X}, {0, yl[m]}, x, cut(yl), cut(lo));
  return e;
}

// log-coordinate speed v' = w(e^v) of an envelope field (w < 0)
struct LogField {
  std::function<double(double)> w;
  double w0 = 0;  // limit at 0 (tangent fields vanish)
  bool tangent = false;
};

struct FlowEnvelopes {
  LogField fast, slow;
  double U = 0;  // fields defined on (0, U]
};

// fields x·log(x/h⁻¹(x)) built on the monotone envelopes; held constant below the first node
inline FlowEnvelopes flow_envelopes(const MonotoneEnvelopes& e) {
  auto field = [](const C1Map& h) {
    double u1 = h.values()[1];
    double w1 = std::log(u1 / h.nodes()[1]);
    LogField L;
    L.w0 = std::log(h.derivs()[0]);
    L.w = [h, u1, w1](double u) { return u <= u1 ? w1 : std::log(u / h.inverse(u)); };
    return L;
  };
  FlowEnvelopes fe;
  fe.fast = field(e.h_minus);
  fe.slow = field(e.h_plus);
  fe.U = e.h_minus.target().hi;
  return fe;
}

// tangent case: fields 2(f − id) and (f − id)/2
inline FlowEnvelopes flow_envelopes_tangent(const C1Map& f) {
  if (f.domain().lo != 0) throw precondition_error("flow_envelopes_tangent: domain must start at 0");
  double u1 = f.nodes()[1];
  auto field = [&f, u1](double k) {
    double r1 = (f(u1) - u1) / u1;
    LogField L;
    L.tangent = true;
    L.w = [f, u1, r1, k](double u) { return u <= u1 ? k * r1 * u / u1 : k * (f(u) - u) / u; };
    return L;
  };
  FlowEnvelopes fe;
  fe.fast = field(2.0);
  fe.slow = field(0.5);
  double U = f.domain().hi;
  auto s = dense_samples(f.nodes(), f.domain(), 2);
  for (double x : s)
    if (x > 0 && !(f(x) < x)) {
      U = x;
      break;
    }
  fe.U = U;
  return fe;
}

// flow time T(v), v = log u, normalized by T(log X0) = T0; dT/dv = -1/w
struct TimeTable {
  std::vector<double> v, T, dT;
  double w_end = 0;
  bool tangent = false;

  TimeTable(const LogField& L, double X0, double T0 = 2, double u_min = 1e-300, double dv = 0.01) : tangent(L.tangent) {
    double v0 = std::log(X0), v1 = std::log(u_min);
    int n = int(std::ceil((v0 - v1) / dv));
    double h = (v0 - v1) / n;
    auto rate = [&](double vv) {
      double w = L.w(std::exp(vv));
      if (!(w < 0)) throw precondition_error("TimeTable: field not contracting at u = " + std::to_string(std::exp(vv)));
      return -1 / w;
    };
    v.resize(n + 1);
    T.resize(n + 1);
    dT.resize(n + 1);
    v[0] = v0;
    T[0] = T0;
    dT[0] = rate(v0);
    for (int i = 1; i <= n; ++i) {
      v[i] = v0 - h * i;
      dT[i] = rate(v[i]);
      double mid = rate(v[i] + 0.5 * h);
      T[i] = T[i - 1] + h / 6 * (dT[i - 1] + 4 * mid + dT[i]);
    }
    w_end = -1 / dT.back();
  }

  // T as a function of v; v runs downward with increasing index
  double at(double vv) const {
    if (vv >= v.front()) return T.front() - (vv - v.front()) * dT.front();
    if (vv <= v.back()) {
      if (tangent) throw truncation_error("TimeTable: below the tabulated range");
      return T.back() + (v.back() - vv) * dT.back();
    }
    double h = v[0] - v[1];
    std::size_t i = std::min(std::size_t((v[0] - vv) / h), v.size() - 2);
    double t = (v[i] - vv) / h;
    return detail::hermite(t, T[i], T[i + 1], dT[i] * h, dT[i + 1] * h, h).v;
  }

  double v_of(double tau) const {
    if (tau <= T.front()) return v.front() - (tau - T.front()) / dT.front();
    if (tau >= T.back()) {
      if (tangent) throw truncation_error("TimeTable: time beyond the tabulated range");
      return v.back() - (tau - T.back()) / dT.back();
    }
    std::size_t i = std::size_t(std::upper_bound(T.begin(), T.end(), tau) - T.begin()) - 1;
    double h = v[0] - v[1];
    double a = 0, b = 1;
    for (int k = 0; k < 60; ++k) {
      double m = 0.5 * (a + b);
      if (detail::hermite(m, T[i], T[i + 1], dT[i] * h, dT[i + 1] * h, h).v < tau)
        a = m;
      else
        b = m;
    }
    return v[i] - 0.5 * (a + b) * h;
  }
};

// time-reparameterized envelope: u ↦ T⁻¹(T(u) + 1 ± 1/T(u)); sign +1 is the fast one
struct EnvelopeMap {
  std::shared_ptr<const TimeTable> table;
  LogField field;
  int sign = 1;
  double X0 = 0.5;

  Interval domain() const { return {0, X0}; }
  double shift(double tau) const { return tau + 1 + sign / tau; }

  Jet eval(double u) const {
    if (u <= 0) return {0.0, field.tangent ? 1.0 : std::exp(field.w0)};
    double tau = table->at(std::log(u));
    double u1 = std::exp(table->v_of(shift(tau)));
    double d = u1 * field.w(u1) * (1 - sign / (tau * tau)) / (u * field.w(u));
    return {u1, d};
  }
  double operator()(double u) const { return eval(u).v; }

  double inverse(double y) const {
    if (y <= 0) return 0;
    double t1 = table->at(std::log(y));
    double a = table->T.front(), b = t1;
    if (shift(a) > t1) throw domain_error("EnvelopeMap::inverse: outside image");
    for (int k = 0; k < 200 && b - a > 1e-14 * b; ++k) {
      double m = 0.5 * (a + b);
      if (shift(m) < t1)
        a = m;
      else
        b = m;
    }
    return std::exp(table->v_of(0.5 * (a + b)));
  }
};

struct LeadEntry {
  double x;  // input-frame point
  int k;
};

struct EnvelopePair {
  C1Map f_plus;   // input frame, faster than f
  C1Map f_minus;  // input frame, slower than f
  std::map<int, std::vector<LeadEntry>> lead_table;
  // exact contraction-frame objects
  Frame frame;
  C1Map F;
  EnvelopeMap fast, slow;
};

// least k with fast^k(u) <= F^{n0+k}(u) and slow^{n0+k}(u) >= F^k(u), all in contraction coordinates
template <Invertible M>
int lead_index(const C1Map& F, const M& fast, const M& slow, int n0, double u, int cap = 100000) {
  double a = u, b = iterate(F, u, n0).v, c = slow(u), d = u;
  for (int i = 1; i < n0; ++i) c = slow(c);
  if (n0 == 0) c = u;
  for (int k = 0; k <= cap; ++k) {
    if (a <= b && c >= d) return k;
    a = fast(a);
    b = F(b);
    c = slow(c);
    d = F(d);
  }
  throw cap_error("lead_index: k exceeds cap " + std::to_string(cap) + " at n0 = " + std::to_string(n0) +
                  ", u = " + std::to_string(u));
}

inline EnvelopePair speed_envelopes(const C1Map& f, std::vector<double> base = {0.05, 0.1, 0.15, 0.2, 0.25},
                                    std::vector<int> n0s = {1, 2, 3, 4}, int cap = 100000) {
  Interval D = f.domain();
  if (!(D == Interval{0, 1})) throw precondition_error("speed_envelopes: map of [0,1] expected");
  for (auto& c : fixed_points(f))
    if (c.span.hi > 0 && c.span.lo < 1) throw hypothesis_error("speed_envelopes: interior fixed point");
  EnvelopePair P;
  P.frame = contraction_frame(f);
  P.F = P.frame.map(f);
  const C1Map& F = P.F;
  FlowEnvelopes fe;
  bool tangent = std::abs(F.eval(0).d - 1) <= 1e-6;
  if (tangent)
    fe = flow_envelopes_tangent(F);
  else
    fe = flow_envelopes(monotone_envelopes(F));
  double X0 = std::min(0.5, 0.95 * fe.U);
  P.fast = {std::make_shared<TimeTable>(fe.fast, X0), fe.fast, 1, X0};
  P.slow = {std::make_shared<TimeTable>(fe.slow, X0), fe.slow, -1, X0};
  auto grid = make_grid({0, X0}, 257);
  auto mat = [&](const EnvelopeMap& e) {
    C1Map m = materialize(e, grid);
    if (!P.frame.reflected) return m;
    return reflect_in(m, {0, 1});
  };
  P.f_plus = mat(P.fast);
  P.f_minus = mat(P.slow);
  for (int n0 : n0s)
    for (double u : base) {
      if (!(u > 0 && u < X0)) throw precondition_error("speed_envelopes: base point outside the envelope zone");
      P.lead_table[n0].push_back({P.frame.to(u), lead_index(F, P.fast, P.slow, n0, u, cap)});
    }
  for (auto& [n0, v] : P.lead_table) std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.x < b.x; });
  return P;
}

// ---------------------------------------------------------------- squash iteration

// diffeomorphism of [0,1] given by callbacks
struct UnitMap {
  std::function<Jet(double)> fwd;
  std::function<double(double)> inv;
  Jet eval(double x) const { return fwd(x); }
  double operator()(double x) const { return fwd(x).v; }
  double inverse(double y) const { return inv(y); }
  Interval domain() const { return {0, 1}; }
};

// A_{n+1}⁻¹∘F∘A_n for F mapping D onto F(D)
inline UnitMap normalized_on(const C1Map& F, Interval D) {
  Interval E{F(D.lo), F(D.hi)};
  double a = D.length(), b = E.length();
  return {[F, D, E, a, b](double u) {
            if (u <= 0) return Jet{0.0, F.eval(D.lo).d * a / b};
            if (u >= 1) return Jet{1.0, F.eval(D.hi).d * a / b};
            Jet j = F.eval(D.lo + a * u);
            return Jet{std::clamp((j.v - E.lo) / b, 0.0, 1.0), j.d * a / b};
          },
          [F, D, E, a](double y) {
            if (y <= 0) return 0.0;
            if (y >= 1) return 1.0;
            return std::clamp((F.inverse(E.lo + E.length() * y) - D.lo) / a, 0.0, 1.0);
          }};
}

inline bool is_identity(const C1Map& h) {
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.values()[i] != h.nodes()[i] || h.derivs()[i] != 1.0) return false;
  return true;
}

struct SquashState {
  int n = 0;
  C1Map f_n;
  C1Map h_n;
  double K = 1;
  double eps_tilde = 0;
  double min_dh = 1, max_dh = 1;
  double ratio = std::numeric_limits<double>::infinity();  // min |Dh/(1-Dh)|
  double step_norm = 0;                                    // ‖f̃_n − f_n‖₁
  double eta = 0;                                          // sup Df_n / inf Df_n − 1
  bool growth_hyp = false;
  bool growth_ok = true;
};

struct SquashResult {
  std::vector<SquashState> states;
  int N = 0;  // h_N = id
  double max_step_norm = 0;
  bool growth_ok = true;
};

namespace detail {

struct DhStats {
  double lo = 1, hi = 1, ratio = std::numeric_limits<double>::infinity();
};

inline DhStats dh_stats(const C1Map& h) {
  DhStats s;
  for (double x : dense_samples(h.nodes(), {0, 1}, 4)) {
    double d = h.eval(x).d;
    s.lo = std::min(s.lo, d);
    s.hi = std::max(s.hi, d);
    double e = std::abs(1 - d);
    if (e > 1e-15) s.ratio = std::min(s.ratio, d / e);
  }
  return s;
}

}  // namespace detail

// ψ = (1−K)·id + K·h⁻¹
inline Jet squash_psi(const C1Map& h, double K, double x) {
  double hi = h.inverse(x);
  return {(1 - K) * x + K * hi, (1 - K) + K / h.eval(hi).d};
}

template <class Seq>
SquashResult squash_iterate(Seq&& f_seq, C1Map h0, double eps, double eps_tilde = 0, int n_max = 10000) {
  if (!(eps > 0)) throw precondition_error("squash_iterate: eps must be positive");
  if (!(h0.domain() == Interval{0, 1}) || !(h0.target() == Interval{0, 1}))
    throw precondition_error("squash_iterate: h0 must be a diffeomorphism of [0,1]");
  if (std::abs(h0.eval(0).d - 1) > 1e-9 || std::abs(h0.eval(1).d - 1) > 1e-9)
    throw precondition_error("squash_iterate: h0 must be tangent to id at 0 and 1");
  if (eps_tilde <= 0) eps_tilde = default_eps_tilde(eps);
  SquashResult R;
  C1Map h = std::move(h0);
  auto probe = uniform_grid({0, 1}, 129);
  std::vector<std::pair<double, double>> trace;
  for (int n = 0;; ++n) {
    SquashState st;
    st.n = n;
    st.eps_tilde = eps_tilde;
    UnitMap fn = f_seq(n);
    st.f_n = materialize(fn, probe);
    bool id = is_identity(h);
    auto S = detail::dh_stats(h);
    st.min_dh = S.lo;
    st.max_dh = S.hi;
    st.ratio = S.ratio;
    st.K = id ? 1.0 : std::min(1.0, eps_tilde * S.ratio);
    trace.push_back({S.lo, S.hi});
    double dlo = 1e300, dhi = 0, c0 = 0, c1 = 0;
    auto samples = merge_grids(dense_samples(h.nodes(), {0, 1}, 2), uniform_grid({0, 1}, 201));
    for (double x : samples) {
      Jet a = fn.eval(x);
      dlo = std::min(dlo, a.d);
      dhi = std::max(dhi, a.d);
      if (!id) {
        Jet p = squash_psi(h, st.K, x);
        Jet b = fn.eval(p.v);
        c0 = std::max(c0, std::abs(b.v - a.v));
        c1 = std::max(c1, std::abs(b.d * p.d - a.d));
      }
    }
    st.step_norm = c0 + c1;
    st.eta = dhi / dlo - 1;
    st.h_n = h;
    R.max_step_norm = std::max(R.max_step_norm, st.step_norm);
    if (id) {
      R.states.push_back(std::move(st));
      R.N = n;
      return R;
    }
    if (n >= n_max) {
      std::string msg = "squash_iterate: no convergence within " + std::to_string(n_max) + " steps; Dh range trace:";
      for (std::size_t k = trace.size() > 8 ? trace.size() - 8 : 0; k < trace.size(); ++k)
        msg += " [" + std::to_string(trace[k].first) + ", " + std::to_string(trace[k].second) + "]";
      throw divergence_error(msg);
    }
    C1Map next;
    if (st.K >= 1) {
      next = identity_map({0, 1}, 2);
    } else {
      const auto& x = h.nodes();
      std::vector<double> y(x.size()), v(x.size()), d(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        Jet hx = h.eval(x[i]);
        double q = (1 - st.K) * hx.v + st.K * x[i];
        double dq = (1 - st.K) * hx.d + st.K;
        Jet fx = fn.eval(x[i]);
        Jet fq = fn.eval(q);
        y[i] = fx.v;
        v[i] = fq.v;
        d[i] = fq.d * dq / fx.d;
      }
      y.front() = v.front() = 0;
      y.back() = v.back() = 1;
      d.front() = d.back() = 1;
      next = C1Map({0, 1}, {0, 1}, std::move(y), std::move(v), std::move(d));
    }
    auto S1 = detail::dh_stats(next);
    st.growth_hyp = S.ratio <= 1 && (1 + eps_tilde) / (1 + st.eta) > 1 + eps_tilde / 2;
    if (st.growth_hyp && !is_identity(next)) st.growth_ok = S1.lo > (1 + eps_tilde / 2) * S.lo;
    R.growth_ok = R.growth_ok && st.growth_ok;
    R.states.push_back(std::move(st));
    h = std::move(next);
  }
}

// ---------------------------------------------------------------- patched maps

struct Patch {
  Interval window;
  std::function<Jet(double)> eval;
  std::function<double(double)> inverse;
  Interval image;
  std::string kind;
};

// a base map with localized replacements on disjoint windows
struct PatchedMap {
  C1Map base;
  std::vector<Patch> patches;  // sorted by window

  Interval domain() const { return base.domain(); }

  void add(Patch p) {
    p.image = {p.eval(p.window.lo).v, p.eval(p.window.hi).v};
    auto it = std::lower_bound(patches.begin(), patches.end(), p.window.lo,
                               [](const Patch& q, double x) { return q.window.lo < x; });
    if (it != patches.end() && it->window.lo < p.window.hi) throw geometry_error("PatchedMap: overlapping windows");
    if (it != patches.begin() && std::prev(it)->window.hi > p.window.lo) throw geometry_error("PatchedMap: overlapping windows");
    patches.insert(it, std::move(p));
  }

  const Patch* find(double x) const {
    auto it = std::upper_bound(patches.begin(), patches.end(), x, [](double v, const Patch& q) { return v < q.window.lo; });
    if (it == patches.begin()) return nullptr;
    --it;
    return x <= it->window.hi ? &*it : nullptr;
  }

  const Patch* find_image(double y) const {
    auto it = std::upper_bound(patches.begin(), patches.end(), y, [](double v, const Patch& q) { return v < q.image.lo; });
    if (it == patches.begin()) return nullptr;
    --it;
    return y <= it->image.hi ? &*it : nullptr;
  }

  Jet eval(double x) const {
    if (auto p = find(x)) return p->eval(x);
    return base.eval(x);
  }
  double operator()(double x) const { return eval(x).v; }
  double inverse(double y) const {
    if (auto p = find_image(y)) return p->inverse(y);
    return base.inverse(y);
  }

  std::vector<double> nodes() const {
    std::vector<double> extra;
    for (auto& p : patches)
      for (int k = 0; k <= 16; ++k) extra.push_back(p.window.lo + p.window.length() * k / 16);
    return merge_grids(base.nodes(), extra);
  }
};

inline Patch c1map_patch(const C1Map& m, std::string kind) {
  return {m.domain(), [m](double x) { return m.eval(x); }, [m](double y) { return m.inverse(y); }, {}, std::move(kind)};
}

// ---------------------------------------------------------------- fixed-point-free pipeline

namespace detail {

inline Jet smooth_ramp(double s) {
  if (s <= 0) return {0.0, 0.0};
  if (s >= 1) return {1.0, 0.0};
  return {s * s * s * (10 - 15 * s + 6 * s * s), 30 * s * s * (1 - s) * (1 - s)};
}

// increasing map on a window, inverted by bisection
template <class E>
double invert_increasing(const E& eval, Interval W, double y) {
  double a = W.lo, b = W.hi;
  for (int k = 0; k < 200 && b - a > 4e-16 * b; ++k) {
    double m = 0.5 * (a + b);
    if (eval(m).v < y)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

// F on the window [x0 − 2η, x0 + 2η] blended toward F∘(x0 + σ(x − x0)); weight 1 on |x − x0| ≤ η, C² ramp to 0
inline Patch affine_correction(const C1Map& F, double x0, double sigma, double eta) {
  Interval W{x0 - 2 * eta, x0 + 2 * eta};
  auto Fp = std::make_shared<const C1Map>(F);
  auto ev = [Fp, x0, sigma, eta](double x) -> Jet {
    const C1Map& F = *Fp;
    Jet f = F.eval(x);
    double r = std::abs(x - x0) / eta - 1;
    Jet w = smooth_ramp(1 - r);
    if (w.v == 0) return f;
    double sg = x >= x0 ? 1.0 : -1.0;
    Jet c = F.eval(std::clamp(x0 + sigma * (x - x0), F.domain().lo, F.domain().hi));
    double wd = -w.d * sg / eta;
    return {f.v + w.v * (c.v - f.v), f.d + w.v * (c.d * sigma - f.d) + wd * (c.v - f.v)};
  };
  return {W, ev, [ev, W](double y) { return invert_increasing(ev, W, y); }, {}, "flatten"};
}

inline double patch_distance(const Patch& P, const C1Map& F, int n = 400) {
  double c0 = 0, c1 = 0;
  for (int i = 0; i <= n; ++i) {
    double x = P.window.lo + P.window.length() * i / n;
    Jet a = P.eval(x), b = F.eval(x);
    c0 = std::max(c0, std::abs(a.v - b.v));
    c1 = std::max(c1, std::abs(a.d - b.d));
  }
  return c0 + c1;
}

}  // namespace detail

struct PipelineReport {
  PatchedMap G;  // modified target G̃, contraction frame
  C1Map H;       // conjugator, H F H⁻¹ = G̃ up to interpolation
  double x_top = 1, x_bottom = 0;  // H = id on [0, x_bottom] and [x_top, 1]
  bool trivial = false;
  // pin
  double p = 0;
  int L = 0;
  int m = 0;  // F^{-m}(p) lies in the repelling coincidence zone
  double delta = 0, s = 0.5, pin_residual = 0;
  std::vector<std::pair<double, double>> s_trace;  // (s, M_s(p) − p)
  bool s_monotone = true;
  // flatten
  double D = 1;
  int k = 0;
  double eps_prime = 0;
  double flat_residual = 0;
  // squash
  double eps_tilde = 0;
  SquashResult squash;
  int domains = 0;  // depth of the deepest modified domain below p
  double perturbation = 0;  // ‖G̃ − G‖₁ measured
};

// F, G contraction-frame maps coinciding near both ends; G̃ within eps of G, conjugate to F by H
inline PipelineReport fpf_pipeline(const C1Map& F, const C1Map& G, double eps, int per_domain = 160) {
  PipelineReport R;
  R.G.base = G;
  auto Fp = std::make_shared<const C1Map>(F), Gp = std::make_shared<const C1Map>(G);
  auto z = coincidence_zones(F, G);
  if (z.a >= z.b) {
    R.trivial = true;
    R.H = identity_map();
    R.x_bottom = 1;
    R.x_top = 0;
    return R;
  }
  if (!(z.a > 0 && z.b < 1)) throw coincidence_error("fpf_pipeline: target must coincide with f near both ends");
  R.x_top = z.b;
  auto orbit = [&](double x, int n) { return iterate(F, x, n).v; };
  double P_top = z.b;
  int j0 = 0;
  while (P_top > z.a) {
    P_top = F(P_top);
    if (++j0 > 100000) throw cap_error("fpf_pipeline: orbit cap above the pin zone");
  }

  // ---- pin: G_s = G + c·(id − F) on L domains below P_top, c = (2s−1)·δ·ω
  auto mather = [&](const PatchedMap& Gs, double y_top, int m) {
    Jet a = iterate(Gs, y_top, m);
    return a;
  };
  int L = 8;
  double s = 0.5;
  for (;; L *= 2) {
    if (L > 1 << 14) throw cap_error("fpf_pipeline: pin zone exceeds cap");
    double x_bot = orbit(P_top, L);
    double V_top = std::log(P_top), V_bot = std::log(x_bot);
    double d_up = V_top - std::log(orbit(P_top, 2)), d_dn = std::log(orbit(P_top, L - 2)) - V_bot;
    auto omega = [=](double x) -> Jet {
      double v = std::log(x);
      Jet a = detail::smooth_ramp((V_top - v) / d_up), b = detail::smooth_ramp((v - V_bot) / d_dn);
      return {a.v * b.v, (-a.d / d_up * b.v + a.v * b.d / d_dn) / x};
    };
    double c0 = 0, c1 = 0;
    for (double x : dense_samples(F.nodes(), {x_bot, P_top}, 8)) {
      Jet w = omega(x), f = F.eval(x);
      c0 = std::max(c0, w.v * (x - f.v));
      c1 = std::max(c1, std::abs(w.d * (x - f.v) + w.v * (1 - f.d)));
    }
    for (int i = 0; i < L; ++i) {
      double a = orbit(P_top, i + 1), b = orbit(P_top, i);
      for (int q = 0; q <= 32; ++q) {
        double x = a + (b - a) * q / 32;
        Jet w = omega(x), f = F.eval(x);
        c0 = std::max(c0, w.v * (x - f.v));
        c1 = std::max(c1, std::abs(w.d * (x - f.v) + w.v * (1 - f.d)));
      }
    }
    double delta = std::min(0.5, 0.9 * eps / (c0 + c1));
    auto pinned = [&, omega, delta, x_bot](double ss) {
      PatchedMap Gs;
      Gs.base = G;
      double c = (2 * ss - 1) * delta;
      Interval W{x_bot, P_top};
      auto ev = [omega, c, Fp, Gp](double x) -> Jet {
        const C1Map &F = *Fp, &G = *Gp;
        Jet w = omega(x), f = F.eval(x), g = G.eval(x);
        return {g.v + c * w.v * (x - f.v), g.d + c * (w.d * (x - f.v) + w.v * (1 - f.d))};
      };
      Gs.add({W, ev, [ev, W](double y) { return detail::invert_increasing(ev, W, y); }, {}, "pin"});
      return Gs;
    };
    // anchor domain below the pin zone; p where the unmodified invariant moves least
    double A_lo = F(x_bot), A_hi = x_bot;
    auto pull_up = [&](double x, int& m) {
      m = 0;
      while (x < R.x_top) {
        x = F.inverse(x);
        if (++m > 100000) throw cap_error("fpf_pipeline: orbit cap");
      }
      return x;
    };
    PatchedMap G0 = pinned(0.5);
    double best = 1e300, p = 0;
    for (int q = 0; q <= 20; ++q) {
      double x = A_lo + (A_hi - A_lo) * (0.3 + 0.4 * q / 20);
      int m;
      double y = pull_up(x, m);
      double r = std::abs((mather(G0, y, m).v - x) / (x - F(x)));
      if (r < best) {
        best = r;
        p = x;
      }
    }
    int m;
    double y_top = pull_up(p, m);
    auto phi = [&](double ss) { return mather(pinned(ss), y_top, m).v - p; };
    double lo = phi(0), hi = phi(1);
    if (!(lo < 0 && hi > 0)) continue;
    R.s_trace = {{0.0, lo}, {1.0, hi}};
    double a = 0, b = 1;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (a + b);
      double v = phi(mid);
      R.s_trace.push_back({mid, v});
      if (v < 0)
        a = mid;
      else
        b = mid;
    }
    s = 0.5 * (a + b);
    R.G = pinned(s);
    R.p = p;
    R.L = L;
    R.m = m;
    R.delta = delta;
    R.s = s;
    R.pin_residual = std::abs(phi(s)) / (p - F(p));
    break;
  }
  {
    auto tr = R.s_trace;
    std::sort(tr.begin(), tr.end());
    for (std::size_t i = 1; i < tr.size(); ++i)
      if (tr[i].second < tr[i - 1].second - 1e-12 * R.p) R.s_monotone = false;
  }

  // ---- flatten: DM(p) → 1 by affine corrections at F^i(p)
  double p = R.p;
  double y_top = iterate(F, p, -R.m).v;
  auto DM_at = [&](int j) {
    Jet g = iterate(R.G, y_top, R.m + j);
    Jet f = iterate(F, y_top, R.m + j);
    return g.d / f.d;
  };
  R.D = DM_at(0);
  double dir = R.D > 1 ? -1.0 : 1.0;
  {
    double e0 = 0.01;
    R.eps_prime = std::min(0.05, 0.9 * eps * e0 / detail::patch_distance(detail::affine_correction(F, p, 1 + dir * e0, 0.1 * (p - F(p))), F));
  }
  if (std::abs(R.D - 1) > 1e-12) {
    double ep = R.eps_prime;
    double prod = R.D;
    int k = 0;
    while (dir < 0 ? prod > 1 : prod < 1) {
      prod *= 1 + dir * ep;
      if (++k > 100000) throw cap_error("flatten: k exceeds orbit cap");
    }
    R.k = k;
    double x = p;
    for (int i = 0; i < k; ++i) {
      double sigma = i + 1 < k ? 1 + dir * ep : 1 / (std::pow(1 + dir * ep, k - 1) * R.D);
      R.G.add(detail::affine_correction(F, x, sigma, 0.1 * (x - F(x))));
      x = F(x);
    }
  }
  R.flat_residual = std::abs(DM_at(R.k) - 1);

  // ---- squash on D_n = [F^{m'+n+1}p, F^{m'+n}p], m' = k+1
  int mp = R.k + 1;
  double top = iterate(F, p, mp).v;
  Interval D0{F(top), top};
  double supDF = 0;
  for (double x : dense_samples(F.nodes(), {0, top}, 2)) supDF = std::max(supDF, F.eval(x).d);
  R.eps_tilde = 0.9 * eps / supDF;
  C1Map h0;
  {
    auto u = uniform_grid({0, 1}, per_domain + 1);
    std::vector<double> y(u.size()), d(u.size());
    int M = R.m + mp;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double x = D0.lo + D0.length() * u[i];
      Jet back = iterate(F, x, -M);
      Jet fw = iterate(R.G, back.v, M);
      y[i] = fw.v;
      d[i] = fw.d * back.d;
    }
    double a = y.front(), b = y.back();
    for (std::size_t i = 0; i < u.size(); ++i) {
      y[i] = (y[i] - a) / (b - a);
      d[i] *= D0.length() / (b - a);
    }
    y.front() = 0;
    y.back() = 1;
    d.front() = d.back() = 1;
    h0 = C1Map({0, 1}, {0, 1}, u, std::move(y), std::move(d));
  }
  std::vector<Interval> doms;
  auto dom_n = [&](int n) {
    while (int(doms.size()) <= n) {
      double hi = doms.empty() ? top : doms.back().lo;
      doms.push_back({F(hi), hi});
    }
    return doms[n];
  };
  R.squash = squash_iterate([&](int n) { return normalized_on(F, dom_n(n)); }, h0, eps, R.eps_tilde);
  for (int n = 0; n < R.squash.N; ++n) {
    Interval Dn = dom_n(n);
    const C1Map h = R.squash.states[n].h_n;
    double K = R.squash.states[n].K;
    auto ev = [h, K, Dn, Fp](double x) -> Jet {
      const C1Map& F = *Fp;
      double u = (x - Dn.lo) / Dn.length();
      Jet ps = squash_psi(h, K, std::clamp(u, 0.0, 1.0));
      Jet f = F.eval(Dn.lo + Dn.length() * ps.v);
      return {f.v, f.d * ps.d};
    };
    R.G.add({Dn, ev, [ev, Dn](double y) { return detail::invert_increasing(ev, Dn, y); }, {}, "squash"});
  }
  R.domains = mp + R.squash.N;
  double bottom = dom_n(R.squash.N).hi;
  R.x_bottom = bottom;

  // ---- conjugator: propagated from the top down to D_0, squash data below, identity deeper
  std::vector<double> X, Y, Dd;
  {
    std::vector<double> xs, ys, ds;
    double t0 = F(R.x_top);
    std::vector<Jet> hx(per_domain), fx(per_domain);
    for (int q = 0; q < per_domain; ++q) {
      double x = t0 + (R.x_top - t0) * q / per_domain;
      fx[q] = {x, 1.0};
      hx[q] = {x, 1.0};
    }
    bool done = false;
    for (int it = 0; it < 1000000 && !done; ++it) {
      for (int q = per_domain - 1; q >= 0; --q) {
        if (fx[q].v <= top) {
          done = true;
          continue;
        }
        xs.push_back(fx[q].v);
        ys.push_back(hx[q].v);
        ds.push_back(hx[q].d / fx[q].d);
      }
      for (int q = 0; q < per_domain; ++q) {
        Jet a = F.eval(fx[q].v), b = R.G.eval(hx[q].v);
        fx[q] = {a.v, fx[q].d * a.d};
        hx[q] = {b.v, hx[q].d * b.d};
      }
    }
    for (int n = R.squash.N - 1; n >= 0; --n) {
      Interval Dn = dom_n(n);
      const C1Map& h = R.squash.states[n].h_n;
      for (std::size_t i = h.size(); i-- > 0;) {
        xs.push_back(Dn.lo + Dn.length() * h.nodes()[i]);
        ys.push_back(Dn.lo + Dn.length() * h.values()[i]);
        ds.push_back(h.derivs()[i]);
      }
    }
    xs.push_back(bottom);
    ys.push_back(bottom);
    ds.push_back(1);
    xs.push_back(0);
    ys.push_back(0);
    ds.push_back(1);
    for (double x : F.nodes())
      if (x >= R.x_top) {
        xs.push_back(x);
        ys.push_back(x);
        ds.push_back(1);
      }
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    for (auto i : idx) {
      if (!X.empty() && !(xs[i] > X.back() && ys[i] > Y.back())) continue;
      X.push_back(xs[i]);
      Y.push_back(ys[i]);
      Dd.push_back(ds[i]);
    }
  }
  R.H = C1Map({0, 1}, {0, 1}, std::move(X), std::move(Y), std::move(Dd));
  R.perturbation = c1_distance(R.G, G);
  return R;
}

// sup over H's image of |H F H⁻¹ − G|, |D(H F H⁻¹) − DG|
template <C1Function Gm>
DistanceParts conjugate_distance(const C1Map& F, const C1Map& H, const Gm& G, int per_cell = 4) {
  DistanceParts p;
  for (double y : dense_samples(merge_grids(H.values(), nodes_of(G)), {0, 1}, per_cell)) {
    double x = H.inverse(y);
    Jet f = F.eval(x);
    Jet a = H.eval(f.v), b = H.eval(x);
    Jet g = G.eval(y);
    p.c0 = std::max(p.c0, std::abs(a.v - g.v));
    p.c1 = std::max(p.c1, std::abs(a.d * f.d / b.d - g.d));
  }
  return p;
}


// ---------------------------------------------------------------- paths

struct C1Path {
  std::vector<double> t;
  std::vector<C1Map> maps;

  std::size_t size() const { return t.size(); }
  // largest C¹ gap between consecutive samples
  double step_bound() const {
    double b = 0;
    for (std::size_t i = 1; i < maps.size(); ++i) b = std::max(b, c1_distance(maps[i - 1], maps[i]));
    return b;
  }
};

struct IsotopyComponent {
  Interval span;
  double size = 0;      // ‖f − id‖₁ on the component
  double path_sup = 0;  // sup over the path of ‖f_t − id‖₁ on the component
  double t_start = 0, t_end = 0;
  bool bound_ok = true;
};

struct IsotopyResult {
  C1Path path;
  C1Path conjugated_path;
  C1Map target;
  std::vector<std::pair<double, double>> distance_curve;
  std::vector<double> eps_curve;
  Frame frame;
  C1Path frame_path;               // conjugators in contraction coordinates
  std::vector<Interval> id_zones;  // contraction coordinates: every conjugator is the identity there
  std::vector<IsotopyComponent> components;
  double step_bound = 0;
  double final_distance = 0;
  double glue_distance = 0;
  bool trivial = false;
  std::function<C1Map(double)> conjugator_at;  // h_t for any t, when the construction allows it
};

namespace detail {

inline void check_fpf(const C1Map& f, const char* who) {
  auto fp = fixed_points(f);
  for (auto& c : fp)
    if (c.span.hi > 1e-9 && c.span.lo < 1 - 1e-9) throw hypothesis_error(std::string(who) + ": interior fixed point");
}

}  // namespace detail

// path h_t with h_0 = id and h_t f h_t⁻¹ → g; steps ≥ 2 samples of t ∈ [0,1]
inline IsotopyResult isotopy_fixed_point_free(const C1Map& f, const C1Map& g, double tol, int steps = 8) {
  if (!(tol > 0)) throw precondition_error("isotopy_fixed_point_free: tol must be positive");
  steps = std::max(steps, 2);
  detail::check_fpf(f, "isotopy_fixed_point_free");
  detail::check_fpf(g, "isotopy_fixed_point_free");
  if (direction_of(f) != direction_of(g)) throw hypothesis_error("isotopy_fixed_point_free: f and g on opposite sides of id");
  for (double e : {0.0, 1.0})
    if (std::abs(f.eval(e).d - g.eval(e).d) > 1e-6)
      throw hypothesis_error("isotopy_fixed_point_free: endpoint derivatives differ at " + std::to_string(e));

  Frame fr = contraction_frame(f);
  C1Map F = fr.map(f), G = fr.map(g);
  IsotopyResult R;
  R.target = g;
  R.frame = fr;
  double d0 = c1_distance(F, G);
  auto record = [&](double t, const C1Map& H, double dist, double eps) {
    R.path.t.push_back(t);
    R.path.maps.push_back(fr.map(H));
    R.frame_path.t.push_back(t);
    R.frame_path.maps.push_back(H);
    R.conjugated_path.t.push_back(t);
    R.conjugated_path.maps.push_back(fr.map(is_identity(H) ? F : conjugate(F, H)));
    R.distance_curve.push_back({t, dist});
    R.eps_curve.push_back(eps);
  };
  if (d0 == 0) {
    R.trivial = true;
    record(0, identity_map(), 0, 0);
    R.id_zones = {{0, 1}};
    return R;
  }

  // the target the pipeline aims at must agree with F near both ends
  C1Map G1 = G;
  auto z = coincidence_zones(F, G);
  if (!(z.a > 0 && z.b < 1)) {
    double a = 0.05;
    for (;; a *= 0.5) {
      if (a < 1e-8) throw hypothesis_error("isotopy_fixed_point_free: cannot glue the target to f near the ends");
      if (in_U(F, G, 0.1 * tol, a, 1 - a)) break;
    }
    G1 = glue_endpoints(F, G, a, 1 - a, 0.2 * tol).result;
    R.glue_distance = c1_distance(G1, G);
  }

  double eps_final = 0.8 * (tol - R.glue_distance);
  double eps_top = std::max(eps_final, std::min(0.05, d0));
  double x_top = 0, x_bottom = 1;
  for (int j = 0; j < steps; ++j) {
    double t = double(j) / (steps - 1);
    double lam = std::min(1.0, 2 * t);
    C1Map Gt = convex_blend(F, G1, lam);
    double eps = eps_top * std::pow(eps_final / eps_top, t);
    for (int attempt = 0;; ++attempt) {
      auto P = fpf_pipeline(F, Gt, eps);
      double dist = P.trivial ? c1_distance(F, G) : conjugate_distance(F, P.H, G).total();
      if (j + 1 < steps || dist < tol || attempt >= 3) {
        if (!P.trivial) {
          x_top = std::max(x_top, P.x_top);
          x_bottom = std::min(x_bottom, P.x_bottom);
        }
        record(t, P.H, dist, eps);
        break;
      }
      eps *= 0.7;
    }
  }
  R.final_distance = R.distance_curve.back().second;
  R.step_bound = R.path.step_bound();
  R.id_zones = {{0, x_bottom}, {x_top, 1}};
  return R;
}

// ---------------------------------------------------------------- isotopy to the identity

namespace detail {

// Fatou chart on a component where f has no fixed point: τ∘f = τ + σ, sampled along orbits.
// s is τ, logY the log of the speed dx/ds; nodes sorted by s with window s ∈ [−T, T].
struct FatouWindow {
  Interval span;
  int sigma = 1;
  long T = 0;
  std::vector<double> s, x, logY;
  double kappa = 0, s_apex = 0, apex = 0, la = 0, lb = 0;
  double x_lo = 0, x_hi = 0;

  // redistributed position X(s): log-speed rises and falls with slope κ
  double X(double t) const {
    double e_a = std::exp(la);
    if (t <= s_apex) return x_lo + (std::exp(la + kappa * (t + T)) - e_a) / kappa;
    double top = x_lo + (std::exp(apex) - e_a) / kappa;
    return top + (std::exp(apex) - std::exp(apex - kappa * (t - s_apex))) / kappa;
  }
  double log_speed(double t) const { return t <= s_apex ? la + kappa * (t + T) : apex - kappa * (t - s_apex); }
  double length(double k) const {
    double sa = (lb - la) / (2 * k);
    double A = la + k * (sa + T);
    return (2 * std::exp(A) - std::exp(la) - std::exp(lb)) / k;
  }
};

inline FatouWindow fatou_window(const C1Map& f, Interval span, int sigma, long T, int per_domain = 8) {
  FatouWindow W;
  W.span = span;
  W.sigma = sigma;
  W.T = T;
  // base domain deep enough that f is close to a translation in the flow chart
  double x0 = 0.5 * (span.lo + span.hi);
  for (int k = 0; std::abs(f.eval(x0).d - 1) > 1e-3; ++k) {
    if (k > 100000) throw cap_error("fatou_window: base domain search");
    x0 = f(x0);
  }
  double x1 = f(x0);
  if (!(std::abs(x1 - x0) > 0)) throw truncation_error("fatou_window: f does not move the base point");
  // τ0' ∝ 1/Y with Y ≈ (f − id)(1 − (Df − 1)/2), tilted linearly so that τ0'(x1)·Df(x0) = τ0'(x0)
  auto q = [&](double y) {
    Jet j = f.eval(y);
    return 1 / std::abs((j.v - y) * (1 - 0.5 * (j.d - 1)));
  };
  double beta = q(x0) / (q(x1) * f.eval(x0).d) - 1;
  int m = per_domain;
  double h = (x1 - x0) / m;
  auto dtau = [&](double y) { return q(y) * (1 + beta * (y - x0) / (x1 - x0)); };
  std::vector<double> cum(m + 1, 0.0);
  static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834}, gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  for (int j = 0; j < m; ++j) {
    double acc = 0;
    for (int g = 0; g < 3; ++g) acc += gw[g] * dtau(x0 + h * (j + 0.5 + 0.5 * gx[g]));
    cum[j + 1] = cum[j] + 0.5 * h * acc;
  }
  double c = 1 / cum[m];
  struct Pt {
    double s, x, ly;
  };
  std::vector<Pt> pts;
  // dense sub-nodes only where Df is far from 1
  std::map<long, bool> dense;
  {
    Jet xf{x0, 0};
    for (long k = 0; k <= T; ++k) {
      dense[k] = std::abs(f.eval(xf.v).d - 1) > 1e-3;
      xf.v = f(xf.v);
    }
    double xb = x0;
    for (long k = 1; k <= T; ++k) {
      xb = f.inverse(xb);
      dense[-k] = std::abs(f.eval(xb).d - 1) > 1e-3;
    }
  }
  for (int j = 0; j < m; ++j) {
    double y = x0 + h * j;
    double s0 = sigma * c * cum[j];
    double ly0 = -std::log(sigma * c * dtau(y));
    Jet xf{y, 0.0};
    for (long k = 0; k <= T; ++k) {
      if (k > 0) {
        Jet a = f.eval(xf.v);
        xf = {a.v, xf.d + std::log(a.d)};
      }
      if (j == 0 || dense[k]) pts.push_back({s0 + sigma * double(k), xf.v, ly0 + xf.d});
    }
    Jet xb{y, 0.0};
    for (long k = 1; k <= T; ++k) {
      double z = f.inverse(xb.v);
      xb = {z, xb.d - std::log(f.eval(z).d)};
      if (j == 0 || dense[-k]) pts.push_back({s0 - sigma * double(k), xb.v, ly0 + xb.d});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.s < b.s; });
  for (auto& q : pts) {
    if (q.s < -T - 1e-9 || q.s > T + 1e-9) continue;
    if (!W.x.empty() && !(q.x > W.x.back())) throw truncation_error("fatou_window: orbit no longer resolved in double precision");
    W.s.push_back(q.s);
    W.x.push_back(q.x);
    W.logY.push_back(q.ly);
  }
  W.s.front() = -double(T);
  W.s.back() = double(T);
  W.x_lo = W.x.front();
  W.x_hi = W.x.back();
  W.la = W.logY.front();
  W.lb = W.logY.back();
  double Lw = W.x_hi - W.x_lo;
  double kmin = std::abs(W.lb - W.la) / (2.0 * T) * (1 + 1e-9) + 1e-300;
  double a = std::log(kmin), b = 0;
  if (W.length(std::exp(b)) < Lw) throw truncation_error("fatou_window: window too long for the redistribution");
  if (W.length(kmin) > Lw) throw truncation_error("fatou_window: window too short");
  for (int it = 0; it < 200; ++it) {
    double c = 0.5 * (a + b);
    (W.length(std::exp(c)) < Lw ? a : b) = c;
  }
  W.kappa = std::exp(0.5 * (a + b));
  W.s_apex = (W.lb - W.la) / (2 * W.kappa);
  W.apex = W.la + W.kappa * (W.s_apex + T);
  return W;
}

// conjugator equal to (1−θ_n)·id + θ_n·X_n∘τ_n on each window, id elsewhere
inline C1Map assemble_conjugator(const std::vector<FatouWindow>& ws, const std::vector<double>& theta) {
  std::vector<double> X{0}, Y{0}, D{1};
  for (std::size_t n = 0; n < ws.size(); ++n) {
    if (theta[n] <= 0) continue;
    const auto& w = ws[n];
    double th = theta[n];
    for (std::size_t i = 0; i < w.s.size(); ++i) {
      double x = w.x[i];
      double v = i == 0 ? w.x_lo : i + 1 == w.s.size() ? w.x_hi : w.X(w.s[i]);
      double d = (i == 0 || i + 1 == w.s.size()) ? 1.0 : std::exp(w.log_speed(w.s[i]) - w.logY[i]);
      X.push_back(x);
      Y.push_back((1 - th) * x + th * v);
      D.push_back((1 - th) + th * d);
    }
  }
  X.push_back(1);
  Y.push_back(1);
  D.push_back(1);
  return C1Map({0, 1}, {0, 1}, std::move(X), std::move(Y), std::move(D));
}

// ‖h f h⁻¹ − id‖₁ restricted to the image of R
inline DistanceParts conjugate_to_id(const C1Map& f, const C1Map& h, Interval R, int per_cell = 2) {
  DistanceParts p;
  std::vector<double> ys;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.nodes()[i] >= R.lo && h.nodes()[i] <= R.hi) ys.push_back(h.values()[i]);
  for (double x : f.nodes())
    if (x >= R.lo && x <= R.hi) ys.push_back(h(x));
  ys = merge_grids(ys, {});
  if (ys.size() < 2) return p;
  for (double y : dense_samples(ys, {ys.front(), ys.back()}, per_cell)) {
    double x = h.inverse(y);
    Jet fx = f.eval(x);
    Jet a = h.eval(fx.v), b = h.eval(x);
    p.c0 = std::max(p.c0, std::abs(a.v - y));
    p.c1 = std::max(p.c1, std::abs(a.d * fx.d / b.d - 1));
  }
  return p;
}

}  // namespace detail

// staggered per-component isotopies pushing a map tangent to id at its fixed points toward id
inline IsotopyResult isotopy_to_identity(const C1Map& f, double tol, long T_max = 1L << 20) {
  if (!(tol > 0)) throw precondition_error("isotopy_to_identity: tol must be positive");
  IsotopyResult R;
  R.target = identity_map(f.domain(), 2);
  auto fp = fixed_points(f);
  for (auto& c : fp) {
    for (double x : {c.span.lo, c.span.hi})
      if (std::abs(f.eval(x).d - 1) > 1e-6) throw hypothesis_error("isotopy_to_identity: hyperbolic fixed point at " + std::to_string(x));
  }
  std::vector<std::pair<Interval, int>> comps;
  for (std::size_t i = 0; i + 1 < fp.size(); ++i) {
    Interval C{fp[i].span.hi, fp[i + 1].span.lo};
    if (C.hi > C.lo) comps.push_back({C, fp[i].right_sign});
  }
  auto record = [&](double t, const C1Map& h, double dist) {
    R.path.t.push_back(t);
    R.path.maps.push_back(h);
    R.frame_path.t.push_back(t);
    R.frame_path.maps.push_back(h);
    R.conjugated_path.t.push_back(t);
    R.conjugated_path.maps.push_back(is_identity(h) ? f : conjugate(f, h));
    R.distance_curve.push_back({t, dist});
  };
  double d0 = c1_distance(f, IdentityFn{});
  record(0, identity_map(f.domain(), 2), d0);
  if (comps.empty()) {
    R.trivial = true;
    R.conjugator_at = [](double) { return identity_map({0, 1}, 2); };
    R.final_distance = d0;
    return R;
  }

  std::vector<detail::FatouWindow> ws;
  for (auto& [C, sg] : comps) {
    IsotopyComponent ic;
    ic.span = C;
    ic.size = c1_distance_parts(f, IdentityFn{}, C).total();
    detail::FatouWindow w;
    for (long T = 4000;; T *= 2) {
      if (T > T_max) throw cap_error("isotopy_to_identity: window depth cap");
      w = detail::fatou_window(f, C, sg, T);
      if (w.kappa < 0.4 * tol) break;
    }
    ws.push_back(std::move(w));
    R.components.push_back(ic);
  }
  std::size_t m = ws.size();
  R.conjugator_at = [ws, m](double t) {
    std::vector<double> th(m);
    for (std::size_t n = 0; n < m; ++n) th[n] = std::clamp(t * m - double(n), 0.0, 1.0);
    return detail::assemble_conjugator(ws, th);
  };
  std::vector<double> theta(m, 0.0);
  for (std::size_t n = 0; n < m; ++n) {
    auto& ic = R.components[n];
    ic.t_start = double(n) / m;
    ic.t_end = double(n + 1) / m;
    Interval Wn{ws[n].x_lo, ws[n].x_hi};
    for (int q = 1; q <= 5; ++q) {
      theta[n] = q / 5.0;
      C1Map h = detail::assemble_conjugator(ws, theta);
      ic.path_sup = std::max(ic.path_sup, detail::conjugate_to_id(f, h, Wn).total());
      if (q == 5 || q == 3) {
        double t = ic.t_start + (ic.t_end - ic.t_start) * theta[n];
        double dist = 0;
        DistanceParts all;
        for (std::size_t k = 0; k < m; ++k) {
          auto dp = detail::conjugate_to_id(f, h, {ws[k].x_lo, ws[k].x_hi});
          all.c0 = std::max(all.c0, dp.c0);
          all.c1 = std::max(all.c1, dp.c1);
        }
        // outside the windows the map is f itself
        std::vector<double> outside;
        double prev = 0;
        for (auto& w : ws) {
          auto dp = c1_distance_parts(f, IdentityFn{}, {prev, w.x_lo});
          all.c0 = std::max(all.c0, dp.c0);
          all.c1 = std::max(all.c1, dp.c1);
          prev = w.x_hi;
        }
        auto dp = c1_distance_parts(f, IdentityFn{}, {prev, 1});
        all.c0 = std::max(all.c0, dp.c0);
        all.c1 = std::max(all.c1, dp.c1);
        dist = all.total();
        record(t, h, dist);
      }
    }
    ic.bound_ok = ic.path_sup < 2 * ic.size;
  }
  R.final_distance = R.distance_curve.back().second;
  R.step_bound = R.path.step_bound();
  for (auto& w : ws) R.eps_curve.push_back(w.kappa);
  return R;
}

// ---------------------------------------------------------------- centralizer embedding

struct CentralizerEmbedding {
  Interval J;
  double lambda = 0;
  int n_domains = 0;
  int copies = 0;          // n_domains + 2 scaled copies of J
  double X = 0;            // truncation: f, g_ext live on [0, X]
  Interval sampled;        // where f∘g_ext = g_ext∘f is expected
  std::vector<double> t;   // schedule t_n of the conjugators H_n
  std::vector<C1Map> H;    // H_n on [0,1], H_{-1} = id
  C1Map g_norm;            // g_J renormalized to [0,1]
  C1Map f, g_ext;
  std::vector<double> dg_dev;  // per copy: sup|Dg_ext − 1|
  std::vector<double> df_dev;  // per copy: sup|Df − λ|
  double residual = 0;
  bool dg_monotone = false;  // over the last 4 sampled copies
};

namespace detail {

struct NodeSet {
  std::vector<double> x, y, d;
  void push(double a, double b, double c) {
    if (!x.empty() && !(a > x.back() && b > y.back())) return;
    x.push_back(a);
    y.push_back(b);
    d.push_back(c);
  }
};

inline std::vector<double> merged_nodes(const C1Map& a, const C1Map& b) { return merge_grids(a.nodes(), b.nodes()); }

}  // namespace detail

template <C1Function A, C1Function B>
double commutation_residual(const A& f, const B& g, Interval R, int per_cell = 2) {
  double r = 0;
  for (double x : dense_samples(merge_grids(nodes_of(f), nodes_of(g)), R, per_cell)) r = std::max(r, std::abs(f(g(x)) - g(f(x))));
  return r;
}

// extension of a map of J to [0, X] commuting with E.f: conjugated by H_{n−1} on the n-th copy, id elsewhere
inline C1Map extend_commuting(const CentralizerEmbedding& E, const C1Map& gJ) {
  C1Map gn = affine_renormalize(gJ, E.J, 2);
  detail::NodeSet S;
  S.push(0, 0, 1);
  for (int n = E.copies - 1; n >= 0; --n) {
    Interval Pn{std::pow(E.lambda, n) * E.J.lo, std::pow(E.lambda, n) * E.J.hi};
    const C1Map* H = n == 0 ? nullptr : &E.H[n - 1];
    std::vector<double> u = gn.nodes();
    if (H) {
      u = merge_grids(u, H->nodes());
      std::vector<double> pre;
      for (double v : H->nodes()) pre.push_back(gn.inverse(v));
      u = merge_grids(u, pre);
    }
    for (double uu : u) {
      Jet a = H ? H->eval(uu) : Jet{uu, 1};
      Jet g = gn.eval(uu);
      Jet b = H ? H->eval(g.v) : Jet{g.v, 1};
      S.push(Pn.lo + Pn.length() * a.v, Pn.lo + Pn.length() * b.v, b.d * g.d / a.d);
    }
  }
  S.push(E.X, E.X, 1);
  return C1Map({0, E.X}, {0, E.X}, std::move(S.x), std::move(S.y), std::move(S.d));
}

inline CentralizerEmbedding embed_in_contraction(const C1Map& g_J, const IsotopyResult& iso, double lambda, int n_domains) {
  if (!(lambda > 0 && lambda < 1)) throw precondition_error("embed_in_contraction: lambda must lie in (0,1)");
  if (n_domains < 4) throw precondition_error("embed_in_contraction: need at least 4 domains");
  if (!iso.conjugator_at) throw precondition_error("embed_in_contraction: isotopy does not provide h_t");
  CentralizerEmbedding E;
  E.J = g_J.domain();
  if (!(E.J.lo > 0) || !(lambda * E.J.hi < E.J.lo)) throw geometry_error("embed_in_contraction: iterated copies of J overlap");
  E.lambda = lambda;
  E.n_domains = n_domains;
  E.copies = n_domains + 2;
  E.X = E.J.hi;
  E.g_norm = affine_renormalize(g_J, E.J, 2);
  for (int n = 0; n < E.copies; ++n) {
    E.t.push_back(1 - std::pow(0.5, n + 1));
    E.H.push_back(iso.conjugator_at(E.t.back()));
  }
  // f = λ·φ_n on the n-th copy with φ_n = H_n H_{n−1}⁻¹, λx on the gaps
  detail::NodeSet S;
  S.push(0, 0, lambda);
  for (int n = E.copies - 1; n >= 0; --n) {
    double sc = std::pow(lambda, n);
    Interval Pn{sc * E.J.lo, sc * E.J.hi};
    const C1Map& Hn = E.H[n];
    const C1Map* Hp = n == 0 ? nullptr : &E.H[n - 1];
    std::vector<double> u = Hp ? detail::merged_nodes(Hn, *Hp) : Hn.nodes();
    for (double uu : u) {
      Jet a = Hp ? Hp->eval(uu) : Jet{uu, 1};
      Jet b = Hn.eval(uu);
      S.push(Pn.lo + Pn.length() * a.v, lambda * (Pn.lo + Pn.length() * b.v), lambda * b.d / a.d);
    }
  }
  E.f = C1Map({0, E.X}, {0, lambda * E.X}, std::move(S.x), std::move(S.y), std::move(S.d));
  E.g_ext = extend_commuting(E, g_J);
  E.sampled = {std::pow(lambda, n_domains + 1) * E.J.hi, E.X};
  E.residual = commutation_residual(E.f, E.g_ext, E.sampled);
  for (int n = 0; n < E.copies; ++n) {
    double sc = std::pow(lambda, n);
    Interval Pn{sc * E.J.lo, sc * E.J.hi};
    double dg = 0, df = 0;
    for (double x : dense_samples(E.g_ext.nodes(), Pn, 2)) dg = std::max(dg, std::abs(E.g_ext.eval(x).d - 1));
    for (double x : dense_samples(E.f.nodes(), Pn, 2)) df = std::max(df, std::abs(E.f.eval(x).d - lambda));
    E.dg_dev.push_back(dg);
    E.df_dev.push_back(df);
  }
  E.dg_monotone = true;
  for (int n = n_domains - 3; n < n_domains; ++n)
    if (!(E.dg_dev[n] < E.dg_dev[n - 1])) E.dg_monotone = false;
  return E;
}

}  // namespace c1lab
