#include <CLI11.hpp>
#include <iostream>

#include "scenario.hpp"

using namespace c1lab::cli;

namespace {

const char* kFooter = R"(Config files are INI. Each section is one scenario:

  out = results            ; optional, top level
  [ffp]
  kind = isotopy-ffp
  f = mobius(2)
  g = perturb_interior(mobius(2), bump(0.3, 0.7, 0.05))
  tol = 1e-3

Kinds and keys (maps are builder expressions):
  glue               f g [a b eps]
  mather             f g [domains tol]
  tau                f h [n expect]
  delay              f g [expect]
  signature          f g [delta depth expect]
  isotopy-ffp        f g [tol steps]
  isotopy-id         f [tol]
  embed-centralizer  g [J=lo,hi lambda n_domains tol residual_tol]
  cohomology         f | alpha [amplitude ns band]
  envelopes          f [base n0]

CSV artifacts (written under <out>/<scenario>/):
  glue.csv        x, glued-x, f-x, g-x
  distance.csv    (glue) x, a, da, b, db  glued vs g on the distance samples
  mather.csv      x, M(x)-x
  commutation.csv (mather) x, Mf, fM  (embed-centralizer) x, fg, gf
  tau.csv         point, tau            per base point
  distance.csv    (isotopy) t, distance[, eps]  C1 distance to the target along the path
  components.csv  component, lo, hi, size, path_sup, slope
  copies.csv      copy, dg_dev, df_dev  sup|Dg-1| and sup|Df-lambda| per copy
  residual.csv    n, residual, lyapunov_sup
  lead_table.csv  n0, x, k
Numbers are printed with %.17g. Exit status is 0 iff every verdict passes.)";

int emit(const json& rep, bool pass) {
  std::cout << rep.dump(2) << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"c1lab: numerical experiments on C1 conjugacy of interval diffeomorphisms"};
  app.footer(kFooter);
  app.require_subcommand(1);

  std::string config, out, adhoc_out = "out";
  auto* run = app.add_subcommand("run", "run every scenario in a config file, print the JSON report");
  run->add_option("config", config, "INI config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "artifact directory (overrides the config)");
  int jobs = 1;
  run->add_option("-j,--jobs", jobs, "scenarios run in parallel")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config, "INI config")->required()->check(CLI::ExistingFile);

  // one-shot subcommands: a single scenario built from options
  std::map<std::string, std::map<std::string, std::string>> adhoc;
  std::map<CLI::App*, std::string> adhoc_kind;
  const std::map<std::string, std::string> single = {
      {"glue", "glue two maps near the endpoints"},
      {"mather", "commuting representative and residual"},
      {"tau", "translation number of h relative to f"},
      {"delay", "integer delay between two maps"},
      {"signature", "accessibility verdict from signatures"},
      {"cohomology", "cohomological residual trace"},
      {"envelopes", "speed envelopes and lead table"},
      {"isotopy-ffp", "isotopy between fixed-point-free maps"},
      {"isotopy-id", "isotopy to the identity"},
      {"embed-centralizer", "embed a map of J in the centralizer of a contraction"},
  };
  for (auto& [kind, desc] : single) {
    auto* sub = app.add_subcommand(kind, desc);
    sub->set_help_flag("--help", "print this help message and exit");  // -h would clash with the map key h
    adhoc_kind[sub] = kind;
    auto& spec = kinds().at(kind);
    for (auto& k : spec.maps) sub->add_option("--" + k, adhoc[kind][k], "builder expression")->required();
    for (auto& k : spec.optional) sub->add_option("--" + k, adhoc[kind][k]);
    sub->add_option("--out", adhoc_out, "artifact directory")->capture_default_str();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || val->parsed()) {
      Config c = load_config(config);
      auto diag = validate(c);
      if (val->parsed() || !diag.empty()) {
        for (auto& d : diag) std::cerr << d << '\n';
        if (val->parsed() && diag.empty()) std::cout << c.scenarios.size() << " scenario(s) ok\n";
        return diag.empty() ? 0 : 2;
      }
      bool pass = true;
      auto rep = run_all(c, out.empty() ? c.out_dir : out, pass, jobs);
      return emit(rep, pass);
    }
    for (auto& [sub, kind] : adhoc_kind) {
      if (!sub->parsed()) continue;
      Scenario s{kind, {{"kind", kind}}};
      for (auto& [k, v] : adhoc[kind])
        if (!v.empty()) s.kv[k] = v;
      Config c{{s}, adhoc_out};
      auto diag = validate(c);
      for (auto& d : diag) std::cerr << d << '\n';
      if (!diag.empty()) return 2;
      bool pass = true;
      return emit(run_all(c, adhoc_out, pass), pass);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
