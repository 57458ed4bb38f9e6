#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <atomic>
#include <thread>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "c1lab/c1lab.hpp"

namespace c1lab::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- artifacts

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
    o << '\n';
    char buf[32];
    for (auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", r[i]);
        o << (i ? "," : "") << buf;
      }
      o << '\n';
    }
    return o.str();
  }
  std::vector<double> column(std::size_t i) const {
    std::vector<double> v;
    for (auto& r : rows) v.push_back(r[i]);
    return v;
  }
};

// single-panel line plot, one polyline per y column
inline std::string svg_plot(const Table& t, std::size_t xcol, const std::vector<std::size_t>& ycols, const std::string& title,
                            bool logy) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto tr = [&](double y) { return logy ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (auto& r : t.rows) {
    x0 = std::min(x0, r[xcol]);
    x1 = std::max(x1, r[xcol]);
    for (auto c : ycols) {
      y0 = std::min(y0, tr(r[c]));
      y1 = std::max(y1, tr(r[c]));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (tr(y) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream o;
  char buf[64];
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf, "%.4g", x0);
  o << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", x1);
  o << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, logy ? "1e%.1f" : "%.4g", y0);
  o << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, logy ? "1e%.1f" : "%.4g", y1);
  o << "<text x=\"" << L - 6 << "\" y=\"" << T + 8 << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << t.columns[xcol] << "</text>\n";
  for (std::size_t k = 0; k < ycols.size(); ++k) {
    o << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" stroke-width=\"1.5\" points=\"";
    for (auto& r : t.rows) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r[xcol]), py(r[ycols[k]]));
      o << buf;
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
      << colors[k % 4] << "\">" << t.columns[ycols[k]] << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// ---------------------------------------------------------------- config

struct Scenario {
  std::string name;
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def = "") const {
    auto it = kv.find(k);
    return it == kv.end() ? def : it->second;
  }
  double num(const std::string& k, double def) const {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(k + ": not a number");
    return v;
  }
  std::vector<double> nums(const std::string& k, std::vector<double> def) const {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    std::vector<double> v;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  }
};

struct Config {
  std::vector<Scenario> scenarios;
  std::string out_dir = "out";
};

inline Config parse_config(std::istream& in) {
  boost::property_tree::ptree pt;
  boost::property_tree::read_ini(in, pt);
  Config c;
  for (auto& [sec, body] : pt) {
    if (body.empty()) {
      if (sec == "out") c.out_dir = body.data();
      continue;
    }
    Scenario s{sec, {}};
    for (auto& [k, v] : body) s.kv[k] = v.data();
    c.scenarios.push_back(std::move(s));
  }
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(in);
}

struct KindSpec {
  std::vector<std::string> maps;      // builder-expression keys that must be present
  std::vector<std::string> optional;  // other keys
};

inline const std::map<std::string, KindSpec>& kinds() {
  static const std::map<std::string, KindSpec> k = {
      {"glue", {{"f", "g"}, {"a", "b", "eps"}}},
      {"mather", {{"f", "g"}, {"domains", "tol"}}},
      {"tau", {{"f", "h"}, {"n", "expect"}}},
      {"delay", {{"f", "g"}, {"expect"}}},
      {"signature", {{"f", "g"}, {"delta", "depth", "expect"}}},
      {"isotopy-ffp", {{"f", "g"}, {"tol", "steps"}}},
      {"isotopy-id", {{"f"}, {"tol"}}},
      {"embed-centralizer", {{"g"}, {"J", "lambda", "n_domains", "tol", "residual_tol"}}},
      {"cohomology", {{}, {"f", "alpha", "amplitude", "ns", "band"}}},
      {"envelopes", {{"f"}, {"base", "n0"}}},
  };
  return k;
}

inline const std::set<std::string>& positive_keys() {
  static const std::set<std::string> k = {"eps", "tol", "delta", "lambda", "residual_tol", "n", "depth", "steps", "domains", "n_domains"};
  return k;
}

inline std::vector<std::string> validate(const Config& c) {
  std::vector<std::string> diag;
  std::set<std::string> seen;
  for (auto& s : c.scenarios) {
    auto at = "[" + s.name + "] ";
    if (!seen.insert(s.name).second) diag.push_back(at + "duplicate scenario name");
    if (!s.has("kind")) {
      diag.push_back(at + "missing 'kind'");
      continue;
    }
    auto it = kinds().find(s.str("kind"));
    if (it == kinds().end()) {
      diag.push_back(at + "unknown kind '" + s.str("kind") + "'");
      continue;
    }
    std::set<std::string> allowed{"kind", "out"};
    for (auto& k : it->second.maps) allowed.insert(k);
    for (auto& k : it->second.optional) allowed.insert(k);
    for (auto& k : it->second.maps)
      if (!s.has(k)) diag.push_back(at + "missing map '" + k + "'");
    for (auto& [k, v] : s.kv) {
      if (!allowed.count(k)) {
        diag.push_back(at + "unknown key '" + k + "'");
        continue;
      }
      bool is_map = std::find(it->second.maps.begin(), it->second.maps.end(), k) != it->second.maps.end() ||
                    (s.str("kind") == "cohomology" && k == "f");
      if (is_map) {
        try {
          dsl::Parser(v).parse();
          from_builder(v);
        } catch (const std::exception& e) {
          diag.push_back(at + k + ": " + e.what());
        }
      } else if (positive_keys().count(k)) {
        try {
          if (!(s.num(k, 1) > 0)) diag.push_back(at + k + " must be positive");
        } catch (const std::exception&) {
          diag.push_back(at + k + ": not a number");
        }
      }
    }
    if (s.str("kind") == "cohomology" && !s.has("f") && !s.has("alpha")) diag.push_back(at + "needs 'f' or 'alpha'");
  }
  return diag;
}

// ---------------------------------------------------------------- running

struct Verdict {
  std::string name;
  double value;
  double threshold;
  std::string relation;  // "<", "<=", "==", "true"
  bool pass;
};

struct ScenarioReport {
  std::string name, kind;
  json config = json::object();
  json measured = json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;
  std::string error;

  bool pass() const {
    if (!error.empty()) return false;
    for (auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
  json to_json() const {
    json j;
    j["name"] = name;
    j["kind"] = kind;
    j["config"] = config;
    j["measured"] = measured;
    j["verdicts"] = json::array();
    for (auto& v : verdicts)
      j["verdicts"].push_back({{"name", v.name}, {"value", v.value}, {"threshold", v.threshold}, {"relation", v.relation}, {"pass", v.pass}});
    j["artifacts"] = artifacts;
    if (!error.empty()) j["error"] = error;
    j["pass"] = pass();
    return j;
  }
  void below(const std::string& n, double v, double t) { verdicts.push_back({n, v, t, "<", v < t}); }
  void holds(const std::string& n, bool b) { verdicts.push_back({n, b ? 1.0 : 0.0, 1.0, "true", b}); }
};

// x, a, Da, b, Db on the sample set used by c1_distance; max|a-b| + max|Da-Db| recomputes it
template <class A, class B>
Table distance_table(const A& a, const B& b, Interval R) {
  Table t{{"x", "a", "da", "b", "db"}, {}};
  for (double x : dense_samples(merge_grids(nodes_of(a), nodes_of(b)), R)) {
    Jet p = a.eval(x), q = b.eval(x);
    t.rows.push_back({x, p.v, p.d, q.v, q.d});
  }
  return t;
}

// x, f(g(x)), g(f(x)); max|fg-gf| recomputes the commutation residual
template <class F, class G>
Table commutation_table(const F& f, const G& g, const std::vector<double>& xs) {
  Table t{{"x", "fg", "gf"}, {}};
  for (double x : xs) t.rows.push_back({x, f(g(x)), g(f(x))});
  return t;
}

struct Runner {
  fs::path out;

  void write(ScenarioReport& r, const std::string& file, const std::string& body) const {
    fs::path dir = out / r.name;
    fs::create_directories(dir);
    std::ofstream(dir / file) << body;
    r.artifacts.push_back((fs::path(r.name) / file).generic_string());
  }
  void table(ScenarioReport& r, const std::string& stem, const Table& t, std::vector<std::size_t> ycols, bool logy,
             const std::string& title) const {
    write(r, stem + ".csv", t.csv());
    if (!t.rows.empty() && !ycols.empty()) write(r, stem + ".svg", svg_plot(t, 0, ycols, title, logy));
  }

  ScenarioReport run(const Scenario& s) const {
    ScenarioReport r;
    r.name = s.name;
    r.kind = s.str("kind");
    for (auto& [k, v] : s.kv) r.config[k] = v;
    try {
      dispatch(s, r);
    } catch (const std::exception& e) {
      r.error = r.kind + ": " + e.what();
    }
    return r;
  }

  void dispatch(const Scenario& s, ScenarioReport& r) const {
    auto map = [&](const std::string& k) { return from_builder(s.str(k)); };
    const std::string& k = r.kind;
    if (k == "glue") {
      auto f = map("f"), g = map("g");
      double eps = s.num("eps", 0.01), a = s.num("a", 0.2), b = s.num("b", 0.8);
      auto rep = glue_endpoints(f, g, a, b, eps);
      r.measured["achieved_distance"] = rep.achieved_distance;
      r.measured["zones"] = json::array();
      for (auto& z : rep.coincidence_zones) r.measured["zones"].push_back({{"lo", z.span.lo}, {"hi", z.span.hi}, {"source", z.source}});
      Table t{{"x", "glued", "f", "g"}, {}};
      for (double x : uniform_grid({0, 1}, 201)) t.rows.push_back({x, rep.result(x) - x, f(x) - x, g(x) - x});
      table(r, "glue", t, {1, 2, 3}, false, "glued map minus identity");
      write(r, "distance.csv", distance_table(rep.result, g, rep.result.domain()).csv());
      r.below("achieved_distance", rep.achieved_distance, eps);
    } else if (k == "mather") {
      auto f = map("f"), g = map("g");
      auto M = mather_invariant(f, g);
      double res = commutation_residual(M, f, int(s.num("domains", 3)));
      r.measured["residual"] = res;
      r.measured["shift"] = M.shift;
      Table t{{"x", "M_minus_x"}, {}};
      for (double x : uniform_grid({0.01, 0.99}, 197)) t.rows.push_back({x, M(x) - x});
      table(r, "mather", t, {1}, false, "Mather invariant minus identity");
      // the residual's own sample points: 50 per domain over the requested domains
      std::vector<double> xs;
      double y = M.y0;
      int domains = int(s.num("domains", 3));
      for (int i = 0; i < domains / 2; ++i) y = f.inverse(y);
      for (int i = 0; i < domains; ++i) {
        double y1 = f(y);
        for (int j = 0; j < 50; ++j) xs.push_back(y + (y1 - y) * (j + 0.5) / 50);
        y = y1;
      }
      Table c{{"x", "Mf", "fM"}, {}};
      for (double x : xs) c.rows.push_back({x, M(f(x)), f(M(x))});
      write(r, "commutation.csv", c.csv());
      r.below("commutation_residual", res, s.num("tol", 1e-6));
    } else if (k == "tau") {
      auto f = map("f"), h = map("h");
      long n = long(s.num("n", 1024));
      auto t = translation_number(f, h, n);
      Table pp{{"point", "tau"}, {}};
      for (std::size_t i = 0; i < t.per_point.size(); ++i) pp.rows.push_back({double(i), t.per_point[i]});
      write(r, "tau.csv", pp.csv());
      r.measured["tau"] = t.estimate;
      r.measured["spread"] = t.spread;
      r.measured["per_point"] = t.per_point;
      r.below("spread", t.spread, 2.0 / n);
      if (s.has("expect")) r.below("abs_error", std::abs(t.estimate - s.num("expect", 0)), 1.0 / n + 1e-15);
    } else if (k == "delay") {
      auto d = delay(map("f"), map("g"));
      r.measured["delay"] = d.delay;
      r.measured["tau"] = d.tau;
      r.measured["n_used"] = d.n_used;
      if (s.has("expect")) r.holds("delay_matches", d.delay == long(s.num("expect", 0)));
    } else if (k == "signature") {
      auto a = decide_accessibility(map("f"), map("g"), s.num("delta", 1e-12), int(s.num("depth", 6)));
      r.measured["verdict"] = to_string(a.verdict);
      r.measured["signature_f"] = a.sig_f.str();
      r.measured["signature_g"] = a.sig_g.str();
      r.measured["caveat"] = a.caveat;
      if (s.has("expect")) r.holds("verdict_matches", to_string(a.verdict) == s.str("expect"));
    } else if (k == "isotopy-ffp") {
      double tol = s.num("tol", 1e-3);
      auto R = isotopy_fixed_point_free(map("f"), map("g"), tol, int(s.num("steps", 8)));
      Table t{{"t", "distance", "eps"}, {}};
      for (std::size_t i = 0; i < R.distance_curve.size(); ++i)
        t.rows.push_back({R.distance_curve[i].first, R.distance_curve[i].second, i < R.eps_curve.size() ? R.eps_curve[i] : 0.0});
      table(r, "distance", t, {1}, true, "C1 distance to target along the path");
      r.measured["final_distance"] = R.final_distance;
      r.measured["step_bound"] = R.step_bound;
      r.measured["trivial"] = R.trivial;
      r.below("final_distance", R.final_distance, tol);
    } else if (k == "isotopy-id") {
      double tol = s.num("tol", 1e-3);
      auto R = isotopy_to_identity(map("f"), tol);
      Table t{{"t", "distance"}, {}};
      for (auto& [tt, d] : R.distance_curve) t.rows.push_back({tt, d});
      table(r, "distance", t, {1}, true, "C1 distance to identity");
      Table c{{"component", "lo", "hi", "size", "path_sup", "slope"}, {}};
      bool ok = true;
      for (std::size_t i = 0; i < R.components.size(); ++i) {
        auto& ic = R.components[i];
        c.rows.push_back({double(i), ic.span.lo, ic.span.hi, ic.size, ic.path_sup, R.eps_curve[i]});
        ok = ok && ic.bound_ok;
      }
      write(r, "components.csv", c.csv());
      r.measured["final_distance"] = R.final_distance;
      r.measured["components"] = R.components.size();
      r.below("final_distance", R.final_distance, tol);
      r.holds("factor_two_bound", ok);
    } else if (k == "embed-centralizer") {
      auto J = s.nums("J", {0.5, 0.75});
      if (J.size() != 2) throw std::invalid_argument("J: expected lo, hi");
      Interval I{J[0], J[1]};
      auto g = affine_place(map("g"), I);
      auto iso = isotopy_to_identity(map("g"), s.num("tol", 1e-3));
      auto E = embed_in_contraction(g, iso, s.num("lambda", 0.25), int(s.num("n_domains", 8)));
      Table t{{"copy", "dg_dev", "df_dev"}, {}};
      for (int n = 0; n < E.copies; ++n) t.rows.push_back({double(n), E.dg_dev[n], E.df_dev[n]});
      table(r, "copies", t, {1, 2}, true, "sup|Dg-1| and sup|Df-lambda| per copy");
      write(r, "commutation.csv",
            commutation_table(E.f, E.g_ext, dense_samples(merge_grids(E.f.nodes(), E.g_ext.nodes()), E.sampled, 2)).csv());
      r.measured["residual"] = E.residual;
      r.measured["dg_monotone"] = E.dg_monotone;
      r.below("commutation_residual", E.residual, s.num("residual_tol", 1e-6));
      r.holds("dg_trend_monotone", E.dg_monotone);
    } else if (k == "cohomology") {
      std::vector<int> ns;
      for (double v : s.nums("ns", {2, 4, 8, 16, 32, 64, 128, 256, 512})) ns.push_back(int(v));
      std::vector<ResidualPoint> tr;
      if (s.has("f"))
        tr = residual_trace(map("f"), ns);
      else
        tr = residual_trace(perturbed_rotation(s.num("alpha", 0.5), s.num("amplitude", 0.1)), ns);
      Table t{{"n", "residual", "lyapunov_sup"}, {}};
      for (auto& p : tr) t.rows.push_back({double(p.n), p.residual, p.lyapunov});
      table(r, "residual", t, {1, 2}, true, "cohomological residual");
      double band = s.num("band", 0.05);
      bool mono = true;
      for (std::size_t i = 1; i < tr.size(); ++i) mono = mono && tr[i].residual <= (1 + band) * tr[i - 1].residual;
      r.measured["final_residual"] = tr.back().residual;
      r.holds("residual_non_increasing", mono);
    } else if (k == "envelopes") {
      auto base = s.nums("base", {0.05, 0.1, 0.15, 0.2, 0.25});
      std::vector<int> n0s;
      for (double v : s.nums("n0", {1, 2, 3, 4})) n0s.push_back(int(v));
      auto P = speed_envelopes(map("f"), base, n0s);
      Table t{{"n0", "x", "k"}, {}};
      bool mono = true;
      for (auto& [n0, v] : P.lead_table)
        for (std::size_t i = 0; i < v.size(); ++i) {
          t.rows.push_back({double(n0), v[i].x, double(v[i].k)});
          if (i > 0 && v[i].k < v[i - 1].k) mono = false;
        }
      write(r, "lead_table.csv", t.csv());
      r.measured["entries"] = t.rows.size();
      r.holds("lead_monotone", mono);
    } else {
      throw std::invalid_argument("unknown kind '" + k + "'");
    }
  }
};

// scenarios are independent and write to their own directories; reports keep config order
inline json run_all(const Config& c, const fs::path& out, bool& all_pass, int jobs = 1) {
  Runner R{out};
  std::vector<ScenarioReport> reps(c.scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < reps.size();) reps[i] = R.run(c.scenarios[i]);
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  json rep;
  rep["scenarios"] = json::array();
  all_pass = true;
  for (auto& r : reps) {
    all_pass = all_pass && r.pass();
    rep["scenarios"].push_back(r.to_json());
  }
  rep["pass"] = all_pass;
  return rep;
}

}  // namespace c1lab::cli
