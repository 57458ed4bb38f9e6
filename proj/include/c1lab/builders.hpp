#pragma once

#include <cctype>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace c1lab {

inline C1Map sample_formula(const std::vector<double>& grid, const std::function<Jet(double)>& f, Interval dom = {0, 1}) {
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet j = f(grid[i]);
    y[i] = j.v;
    d[i] = j.d;
  }
  return C1Map(dom, dom, grid, std::move(y), std::move(d));
}

inline C1Map identity(int n = 513) { return identity_map({0, 1}, n); }

inline Jet mobius_jet(double lambda, double x) {
  double q = 1 + (lambda - 1) * x;
  return {lambda * x / q, lambda / (q * q)};
}

inline C1Map mobius(double lambda, int n = 513) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw builder_error("mobius: lambda must be positive");
  return sample_formula(make_grid({0, 1}, n), [&](double x) { return mobius_jet(lambda, x); });
}

inline C1Map parabolic(double c, int n = 513) {
  if (!(std::abs(c) < 1)) throw builder_error("parabolic: |c| must be < 1");
  return sample_formula(make_grid({0, 1}, n), [&](double x) { return Jet{x + c * x * (1 - x), 1 + c * (1 - 2 * x)}; });
}

struct VectorField {
  std::string name;
  std::function<double(double)> X;
  std::function<double(double)> dX;
};

inline VectorField logistic_field(double a) {
  return {"logistic", [a](double x) { return a * x * (1 - x); }, [a](double x) { return a * (1 - 2 * x); }};
}

inline VectorField skew_field(double a, double b) {
  return {"skew", [a, b](double x) { return x * (1 - x) * (a + b * x); },
          [a, b](double x) { return (1 - 2 * x) * (a + b * x) + b * x * (1 - x); }};
}

inline VectorField tangent_field(double a) {
  return {"tangent", [a](double x) { return a * x * x * (1 - x) * (1 - x); },
          [a](double x) { return a * 2 * x * (1 - x) * (1 - 2 * x); }};
}

// time-t map with its variational log-derivative, RK4
inline Jet flow_jet(const VectorField& F, double t, double x, int steps) {
  double h = t / steps;
  double y = x, L = 0;
  for (int k = 0; k < steps; ++k) {
    double k1 = F.X(y), l1 = F.dX(y);
    double y2 = y + 0.5 * h * k1;
    double k2 = F.X(y2), l2 = F.dX(y2);
    double y3 = y + 0.5 * h * k2;
    double k3 = F.X(y3), l3 = F.dX(y3);
    double y4 = y + h * k3;
    double k4 = F.X(y4), l4 = F.dX(y4);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    L += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
  }
  return {y, std::exp(L)};
}

inline int flow_steps(const VectorField& F, double t) {
  double m = 0;
  for (int i = 0; i <= 64; ++i) m = std::max(m, std::abs(F.dX(i / 64.0)));
  return std::max(64, int(std::ceil(std::abs(t) * m * 200)));
}

inline C1Map flow(const VectorField& F, double t, int n = 513) {
  if (std::abs(F.X(0)) > 1e-14 || std::abs(F.X(1)) > 1e-14) throw builder_error("flow: field must vanish at the endpoints");
  int steps = flow_steps(F, t);
  auto grid = make_grid({0, 1}, n);
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet j = flow_jet(F, t, grid[i], steps);
    y[i] = j.v;
    d[i] = j.d;
  }
  for (std::size_t i = 1; i < y.size(); ++i)
    if (!(y[i] > y[i - 1])) throw builder_error("flow: integration lost monotonicity");
  y.front() = 0;
  y.back() = 1;
  return C1Map({0, 1}, {0, 1}, grid, std::move(y), std::move(d));
}

inline C1Map convex_blend(const C1Map& f, const C1Map& g, double s) {
  if (!(s >= 0 && s <= 1)) throw builder_error("convex_blend: s must lie in [0,1]");
  if (!(f.domain() == g.domain())) throw builder_error("convex_blend: domain mismatch");
  if (s == 0) return f;
  if (s == 1) return g;
  auto grid = merge_grids(f.nodes(), g.nodes());
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Jet a = f.eval(grid[i]), b = g.eval(grid[i]);
    y[i] = (1 - s) * a.v + s * b.v;
    d[i] = (1 - s) * a.d + s * b.d;
  }
  Interval T{(1 - s) * f.target().lo + s * g.target().lo, (1 - s) * f.target().hi + s * g.target().hi};
  return C1Map(f.domain(), T, std::move(grid), std::move(y), std::move(d));
}

// 16u²(1-u)² on the unit cell: value and u-derivative
inline Jet bump_profile(double u) {
  double w = u * (1 - u);
  return {16 * w * w, 32 * w * (1 - 2 * u)};
}

inline constexpr double bump_slope_max = 3.0792014356780038;  // max |32u(1-u)(1-2u)|

struct SignedBumps {
  std::vector<double> breaks;
  std::vector<int> signs;
  std::vector<double> amps;

  Interval domain() const { return {breaks.front(), breaks.back()}; }

  Jet eval(double x) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    std::size_t i = it == breaks.begin() ? 0 : std::size_t(it - breaks.begin()) - 1;
    if (i + 1 >= breaks.size()) return {x, 1.0};
    double L = breaks[i + 1] - breaks[i];
    Jet b = bump_profile((x - breaks[i]) / L);
    double a = signs[i] * amps[i];
    return {x + a * L * b.v, 1 + a * b.d};
  }
};

inline SignedBumps make_signed_bumps(const std::vector<double>& breaks, const std::vector<int>& signs, double A, double gamma = 0) {
  if (breaks.size() < 2 || signs.size() + 1 != breaks.size()) throw builder_error("signed_bumps: need one sign per block");
  if (!(A > 0) || A * bump_slope_max >= 1) throw builder_error("signed_bumps: amplitude breaks monotonicity");
  double Lmax = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) throw builder_error("signed_bumps: breakpoints must increase");
    Lmax = std::max(Lmax, breaks[i + 1] - breaks[i]);
  }
  SignedBumps sb{breaks, signs, {}};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (signs[i] != 1 && signs[i] != -1 && signs[i] != 0) throw builder_error("signed_bumps: signs must be +, - or 0");
    sb.amps.push_back(A * std::pow((breaks[i + 1] - breaks[i]) / Lmax, gamma));
  }
  return sb;
}

inline C1Map signed_bumps(const std::vector<double>& breaks, const std::vector<int>& signs, double A, double gamma = 0, int n = 513) {
  auto sb = make_signed_bumps(breaks, signs, A, gamma);
  Interval D = sb.domain();
  std::vector<double> extra;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    for (int k = 1; k < 24; ++k) extra.push_back(breaks[i] + (breaks[i + 1] - breaks[i]) * k / 24.0);
  auto grid = merge_grids(make_grid(D, n), merge_grids(extra, breaks));
  return materialize(sb, grid);
}

struct BumpSpec {
  double lo, hi, size;
};

// g = f∘φ with φ = id + δ·L·16u²(1-u)² on [lo,hi], ‖φ - id‖₁ = |size|
inline C1Map perturb_interior(const C1Map& f, BumpSpec b) {
  Interval D = f.domain();
  if (!(b.lo > D.lo && b.hi < D.hi && b.lo < b.hi)) throw builder_error("perturb_interior: bump must sit inside the domain");
  double L = b.hi - b.lo;
  double delta = b.size / (L + bump_slope_max);
  if (std::abs(delta) * bump_slope_max >= 1) throw builder_error("perturb_interior: bump breaks monotonicity");
  std::vector<double> extra;
  for (int k = 0; k <= 96; ++k) extra.push_back(b.lo + L * k / 96.0);
  auto grid = merge_grids(f.nodes(), extra);
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid[i];
    Jet phi{x, 1.0};
    if (x > b.lo && x < b.hi) {
      Jet p = bump_profile((x - b.lo) / L);
      phi = {x + delta * L * p.v, 1 + delta * p.d};
    }
    Jet fj = f.eval(phi.v);
    y[i] = fj.v;
    d[i] = fj.d * phi.d;
  }
  return C1Map(D, f.target(), std::move(grid), std::move(y), std::move(d));
}

// blocks (1/(k+1), 1/k): sign - for odd k, + for even k
inline std::vector<double> falling_breaks(int K) {
  std::vector<double> b{0.0};
  for (int k = K; k >= 1; --k) b.push_back(1.0 / k);
  return b;
}

inline C1Map classeconj_f(int K = 40, double A = 0.05) {
  auto b = falling_breaks(K);
  std::vector<int> s;
  s.push_back(0);
  for (int k = K - 1; k >= 1; --k) s.push_back(k % 2 ? -1 : 1);
  return signed_bumps(b, s, A, 0.5);
}

inline C1Map classeconj_g(int K = 40, double A = 0.05) {
  std::vector<double> b{0.0};
  std::vector<int> s{0};
  for (int k = K; k >= 4; --k) b.push_back(1.0 / k);
  for (int k = K - 1; k >= 3; --k) s.push_back(k % 2 ? -1 : 1);
  b.push_back(1.0 / 3);
  s.push_back(1);
  b.push_back(2.0 / 3);
  for (int k = 4; k <= K; ++k) {
    b.push_back(1.0 - 1.0 / k);
    s.push_back(k % 2 ? 1 : -1);
  }
  b.push_back(1.0);
  s.push_back(0);
  return signed_bumps(b, s, A, 0.5);
}

namespace dsl {

struct Node {
  enum Kind { Num, Sign, List, Call } kind = Num;
  double num = 0;
  int sign = 0;
  std::string name;
  std::vector<Node> args;
};

class Parser {
 public:
  explicit Parser(std::string s) : s_(std::move(s)) {}

  Node parse() {
    Node n = expr();
    skip();
    if (p_ != s_.size()) fail("trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& m) const {
    throw builder_error("builder parse error at " + std::to_string(p_) + ": " + m + " in '" + s_ + "'");
  }
  void skip() {
    while (p_ < s_.size() && std::isspace((unsigned char)s_[p_])) ++p_;
  }
  char peek() {
    skip();
    return p_ < s_.size() ? s_[p_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++p_;
  }
  double number() {
    skip();
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s_.substr(p_), &used);
    } catch (...) {
      fail("expected number");
    }
    p_ += used;
    if (peek() == '/') {
      ++p_;
      skip();
      double w = std::stod(s_.substr(p_), &used);
      p_ += used;
      v /= w;
    }
    return v;
  }
  bool sign_token() {
    skip();
    if (p_ >= s_.size() || (s_[p_] != '+' && s_[p_] != '-')) return false;
    std::size_t q = p_ + 1;
    while (q < s_.size() && std::isspace((unsigned char)s_[q])) ++q;
    return q >= s_.size() || s_[q] == ',' || s_[q] == ']' || s_[q] == ')';
  }
  Node expr() {
    char c = peek();
    Node n;
    if (c == '[') {
      ++p_;
      n.kind = Node::List;
      if (peek() != ']') {
        n.args.push_back(expr());
        while (peek() == ',') {
          ++p_;
          n.args.push_back(expr());
        }
      }
      expect(']');
      return n;
    }
    if (sign_token()) {
      n.kind = Node::Sign;
      n.sign = s_[p_] == '+' ? 1 : -1;
      ++p_;
      return n;
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      std::size_t q = p_;
      while (q < s_.size() && (std::isalnum((unsigned char)s_[q]) || s_[q] == '_')) ++q;
      n.kind = Node::Call;
      n.name = s_.substr(p_, q - p_);
      p_ = q;
      if (peek() == '(') {
        ++p_;
        if (peek() != ')') {
          n.args.push_back(expr());
          while (peek() == ',') {
            ++p_;
            n.args.push_back(expr());
          }
        }
        expect(')');
      }
      return n;
    }
    n.kind = Node::Num;
    n.num = number();
    return n;
  }

  std::string s_;
  std::size_t p_ = 0;
};

inline double as_num(const Node& n) {
  if (n.kind != Node::Num) throw builder_error("expected a number argument");
  return n.num;
}

inline void arity(const Node& n, std::size_t lo, std::size_t hi) {
  if (n.args.size() < lo || n.args.size() > hi) throw builder_error(n.name + ": wrong number of arguments");
}

inline VectorField build_field(const Node& n) {
  if (n.kind != Node::Call) throw builder_error("expected a vector field");
  if (n.name == "logistic") {
    arity(n, 1, 1);
    return logistic_field(as_num(n.args[0]));
  }
  if (n.name == "skew") {
    arity(n, 2, 2);
    return skew_field(as_num(n.args[0]), as_num(n.args[1]));
  }
  if (n.name == "tangent") {
    arity(n, 1, 1);
    return tangent_field(as_num(n.args[0]));
  }
  throw builder_error("unknown vector field '" + n.name + "'");
}

inline BumpSpec build_bump(const Node& n) {
  if (n.kind != Node::Call || n.name != "bump") throw builder_error("expected bump(lo, hi, size)");
  arity(n, 3, 3);
  return {as_num(n.args[0]), as_num(n.args[1]), as_num(n.args[2])};
}

inline C1Map build(const Node& n) {
  if (n.kind != Node::Call) throw builder_error("expected a map expression");
  const std::string& k = n.name;
  if (k == "identity" || k == "id") {
    arity(n, 0, 0);
    return identity();
  }
  if (k == "mobius") {
    arity(n, 1, 1);
    return mobius(as_num(n.args[0]));
  }
  if (k == "parabolic") {
    arity(n, 1, 1);
    return parabolic(as_num(n.args[0]));
  }
  if (k == "flow") {
    arity(n, 2, 2);
    return flow(build_field(n.args[0]), as_num(n.args[1]));
  }
  if (k == "convex_blend") {
    arity(n, 3, 3);
    return convex_blend(build(n.args[0]), build(n.args[1]), as_num(n.args[2]));
  }
  if (k == "signed_bumps") {
    arity(n, 3, 4);
    if (n.args[0].kind != Node::List || n.args[1].kind != Node::List) throw builder_error("signed_bumps: expects lists");
    std::vector<double> b;
    std::vector<int> s;
    for (auto& a : n.args[0].args) b.push_back(as_num(a));
    for (auto& a : n.args[1].args) {
      if (a.kind == Node::Sign)
        s.push_back(a.sign);
      else
        s.push_back(int(as_num(a)));
    }
    double gamma = n.args.size() == 4 ? as_num(n.args[3]) : 0.0;
    return signed_bumps(b, s, as_num(n.args[2]), gamma);
  }
  if (k == "perturb_interior") {
    arity(n, 2, 2);
    return perturb_interior(build(n.args[0]), build_bump(n.args[1]));
  }
  if (k == "classeconj_f" || k == "classeconj_g") {
    arity(n, 0, 1);
    int K = n.args.empty() ? 40 : int(as_num(n.args[0]));
    return k == "classeconj_f" ? classeconj_f(K) : classeconj_g(K);
  }
  throw builder_error("unknown builder '" + k + "'");
}

}  // namespace dsl

inline C1Map from_builder(const std::string& expr) { return dsl::build(dsl::Parser(expr).parse()); }

}  // namespace c1lab
