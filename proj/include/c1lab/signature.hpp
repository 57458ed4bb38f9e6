#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace c1lab {

struct SignedEntry {
  Interval witness;
  int sign = 0;  // +1 or -1
  double height = 0;  // sup |f - id| on the block
};

struct SignedOrder {
  std::vector<SignedEntry> entries;
  bool acc0 = false;  // blocks accumulate at the low end beyond the kept ones
  bool acc1 = false;
  int dropped_low = 0;   // entries cut by the depth cap near each end
  int dropped_high = 0;
  int unobserved = 0;    // blocks thinner than delta
  std::string truncation_note;
  bool alternating = true;

  std::size_t size() const { return entries.size(); }
  std::vector<int> signs() const {
    std::vector<int> s;
    for (auto& e : entries) s.push_back(e.sign);
    return s;
  }

  std::string str() const {
    std::string s;
    for (auto& e : entries) s += e.sign > 0 ? '+' : '-';
    if (acc0) s += "[acc@0]";
    if (acc1) s += "[acc@1]";
    return s;
  }
};

inline SignedOrder make_order(const std::vector<int>& signs) {
  SignedOrder o;
  for (std::size_t i = 0; i < signs.size(); ++i) o.entries.push_back({{double(i), double(i) + 0.5}, signs[i], 1.0});
  for (std::size_t i = 1; i < signs.size(); ++i)
    if (signs[i] == signs[i - 1]) o.alternating = false;
  return o;
}

inline SignedOrder parse_order(const std::string& s) {
  std::vector<int> v;
  std::size_t i = 0;
  for (; i < s.size() && (s[i] == '+' || s[i] == '-'); ++i) v.push_back(s[i] == '+' ? 1 : -1);
  SignedOrder o = make_order(v);
  std::string rest = s.substr(i);
  if (rest.find("[acc@0]") != std::string::npos) o.acc0 = true;
  if (rest.find("[acc@1]") != std::string::npos) o.acc1 = true;
  return o;
}

template <C1Function F>
SignedOrder signature_of(const F& f, double delta, int depth, double hyp_tol = 1e-4) {
  if (!(delta > 0)) throw precondition_error("signature_of: delta must be positive");
  if (depth < 1) throw precondition_error("signature_of: depth must be at least 1");
  Interval D = f.domain();
  auto s = dense_samples(nodes_of(f), D, 10);
  std::size_t n = s.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = f.eval(s[i]).v - s[i];
  const double zero = 1e-14 * std::max(1.0, D.length());
  auto sgn = [&](std::size_t i) { return std::abs(g[i]) <= zero ? 0 : (g[i] > 0 ? 1 : -1); };

  auto check_tangent = [&](double a, double b) {
    // fixed point between samples a < b: derivative there must be 1
    double ga = f.eval(a).v - a;
    for (int k = 0; k < 100 && b - a > 1e-15; ++k) {
      double m = 0.5 * (a + b);
      double gm = f.eval(m).v - m;
      if ((gm > 0) == (ga > 0) && std::abs(gm) > zero) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    double z = 0.5 * (a + b);
    if (z > D.lo && z < D.hi && std::abs(f.eval(z).d - 1) > hyp_tol)
      throw hypothesis_error("signature_of: hyperbolic interior fixed point near " + std::to_string(z));
  };

  // raw runs of constant nonzero sign; isolated zeros merge equal signs, zero plateaus separate
  struct Run {
    double lo, hi;
    int sign;
    double height;
  };
  std::vector<Run> runs;
  std::size_t i = 0;
  bool separated = true;
  while (i < n) {
    int si = sgn(i);
    if (si == 0) {
      std::size_t j = i;
      while (j + 1 < n && sgn(j + 1) == 0) ++j;
      if (j > i) separated = true;
      for (std::size_t k = i; k <= j; ++k)
        if (s[k] > D.lo && s[k] < D.hi && std::abs(f.eval(s[k]).d - 1) > hyp_tol)
          throw hypothesis_error("signature_of: hyperbolic interior fixed point near " + std::to_string(s[k]));
      i = j + 1;
      continue;
    }
    std::size_t j = i;
    double h = std::abs(g[i]);
    while (j + 1 < n && sgn(j + 1) == si) h = std::max(h, std::abs(g[++j]));
    double lo = i > 0 ? s[i - 1] : s[i], hi = j + 1 < n ? s[j + 1] : s[j];
    if (j + 1 < n && sgn(j + 1) == -si) check_tangent(s[j], s[j + 1]);
    if (!separated && !runs.empty() && runs.back().sign == si) {
      runs.back().hi = hi;
      runs.back().height = std::max(runs.back().height, h);
    } else {
      runs.push_back({lo, hi, si, h});
    }
    separated = false;
    i = j + 1;
  }

  SignedOrder out;
  std::vector<SignedEntry> kept;
  for (auto& r : runs) {
    if (r.height < delta) {
      ++out.unobserved;
      continue;
    }
    kept.push_back({{r.lo, r.hi}, r.sign, r.height});
  }
  // depth cap on each half
  double mid = 0.5 * (D.lo + D.hi);
  std::vector<SignedEntry> low, high;
  for (auto& e : kept) (0.5 * (e.witness.lo + e.witness.hi) < mid ? low : high).push_back(e);
  if (int(low.size()) > depth) {
    out.acc0 = true;
    out.dropped_low = int(low.size()) - depth;
    low.erase(low.begin(), low.end() - depth);
  }
  if (int(high.size()) > depth) {
    out.acc1 = true;
    out.dropped_high = int(high.size()) - depth;
    high.resize(depth);
  }
  out.entries = low;
  out.entries.insert(out.entries.end(), high.begin(), high.end());
  for (std::size_t k = 1; k < out.entries.size(); ++k)
    if (out.entries[k].sign == out.entries[k - 1].sign) out.alternating = false;
  std::string note;
  if (out.acc0) note += std::to_string(out.dropped_low) + " blocks omitted toward the low end; ";
  if (out.acc1) note += std::to_string(out.dropped_high) + " blocks omitted toward the high end; ";
  if (out.unobserved) note += std::to_string(out.unobserved) + " blocks below delta; ";
  out.truncation_note = note;
  return out;
}

struct Embedding {
  bool ok = false;
  std::vector<std::size_t> map;  // index in big for each entry of the small order
};

// leftmost match
inline Embedding embeds(const std::vector<int>& small, const std::vector<int>& big) {
  Embedding e;
  std::size_t j = 0;
  for (int s : small) {
    while (j < big.size() && big[j] != s) ++j;
    if (j == big.size()) return e;
    e.map.push_back(j++);
  }
  e.ok = true;
  return e;
}

inline Embedding embeds(const SignedOrder& small, const SignedOrder& big) { return embeds(small.signs(), big.signs()); }

inline bool embeds_exhaustive(const std::vector<int>& small, const std::vector<int>& big) {
  std::size_t k = small.size(), n = big.size();
  if (k == 0) return true;
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) ok = big[idx[i]] == small[i];
    if (ok) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// continue each accumulating tail periodically until it holds `len` entries
inline std::vector<int> expand_tails(const SignedOrder& o, std::size_t len, std::size_t n_low, std::size_t n_high) {
  std::vector<int> s = o.signs();
  std::vector<int> low(s.begin(), s.begin() + n_low), mid(s.begin() + n_low, s.end() - n_high), high(s.end() - n_high, s.end());
  auto period = [](const std::vector<int>& t, bool from_front) {
    std::vector<int> p;
    if (t.empty()) return p;
    if (from_front) {
      p.push_back(t[0]);
      if (t.size() > 1 && t[1] != t[0]) p.push_back(t[1]);
    } else {
      p.push_back(t.back());
      if (t.size() > 1 && t[t.size() - 2] != t.back()) p.push_back(t[t.size() - 2]);
    }
    return p;
  };
  if (o.acc0) {
    auto p = period(low, true);
    for (std::size_t k = 0; !p.empty() && low.size() < len; ++k) low.insert(low.begin(), p[(k + 1) % p.size()]);
  }
  if (o.acc1) {
    auto p = period(high, false);
    for (std::size_t k = 0; !p.empty() && high.size() < len; ++k) high.push_back(p[(k + 1) % p.size()]);
  }
  std::vector<int> out = low;
  out.insert(out.end(), mid.begin(), mid.end());
  out.insert(out.end(), high.begin(), high.end());
  return out;
}

enum class Verdict { isotopy_and_sequence, sequence_only, neither };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::isotopy_and_sequence: return "isotopy-and-sequence";
    case Verdict::sequence_only: return "sequence-only";
    default: return "neither";
  }
}

struct AccessibilityReport {
  Verdict verdict = Verdict::neither;
  bool sequence = false;
  bool isotopy = false;
  int depth = 0;
  SignedOrder sig_f, sig_g;
  std::string caveat;
};

template <C1Function F, C1Function G>
AccessibilityReport decide_accessibility(const F& f, const G& g, double delta, int depth, double deriv_tol = 1e-6) {
  Interval D = f.domain();
  for (double x : {D.lo, D.hi})
    if (std::abs(f.eval(x).d - g.eval(x).d) > deriv_tol)
      throw hypothesis_error("decide_accessibility: endpoint derivatives differ");
  AccessibilityReport r;
  r.depth = depth;
  r.sig_f = signature_of(f, delta, depth);
  r.sig_g = signature_of(g, delta, depth);
  auto count_low = [&](const SignedOrder& o) {
    std::size_t k = 0;
    double mid = 0.5 * (D.lo + D.hi);
    for (auto& e : o.entries) k += 0.5 * (e.witness.lo + e.witness.hi) < mid;
    return k;
  };
  const SignedOrder& C = r.sig_f;
  const SignedOrder& Cp = r.sig_g;
  auto cp = expand_tails(Cp, std::size_t(depth), count_low(Cp), Cp.size() - count_low(Cp));
  auto c = expand_tails(C, cp.size() + 2, count_low(C), C.size() - count_low(C));
  r.sequence = embeds(cp, c).ok;
  // an infinite tail of C' only fits into a tail of C accumulating at the same end
  r.isotopy = r.sequence && (!Cp.acc0 || C.acc0) && (!Cp.acc1 || C.acc1);
  r.verdict = r.isotopy ? Verdict::isotopy_and_sequence : (r.sequence ? Verdict::sequence_only : Verdict::neither);
  r.caveat = "decided on signatures truncated at depth " + std::to_string(depth) + "; accumulating tails extended periodically";
  return r;
}

}  // namespace c1lab
