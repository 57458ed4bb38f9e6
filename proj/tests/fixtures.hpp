#pragma once

#include <cmath>

#include "c1lab/builders.hpp"
#include "c1lab/conjugacy.hpp"

namespace fixtures {

using namespace c1lab;

inline double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10 - 15 * s + 6 * s * s);
}
inline double smoothstep_d(double s) {
  if (s <= 0 || s >= 1) return 0;
  return 30 * s * s * (1 - s) * (1 - s);
}

// ψ = Θ⁻¹(Θ + k·β(Θ)) for the logit Fatou coordinate Θ of mobius(λ);
// ψ = id near 0 and ψ = f^k near 1, so the Mather invariant of ψfψ⁻¹ is f^k
struct FatouShift {
  double lambda;
  double k;
  double z0, z1;  // ramp in Θ-coordinates

  double theta(double x) const { return std::log(x / (1 - x)) / std::log(lambda); }
  double theta_inv(double w) const { return 1 / (1 + std::exp(-w * std::log(lambda))); }
  Interval domain() const { return {0, 1}; }

  Jet eval(double x) const {
    if (x <= 0 || x >= 1) return {x, 1.0};
    double z = theta(x);
    double s = (z - z0) / (z1 - z0);
    if (s <= 0) return {x, 1.0};
    double w = z + k * smoothstep(s);
    double y = theta_inv(w);
    double d = y * (1 - y) / (x * (1 - x)) * (1 + k * smoothstep_d(s) / (z1 - z0));
    return {y, d};
  }
  double operator()(double x) const { return eval(x).v; }
  double inverse(double y) const {
    double a = 0, b = 1;
    for (int i = 0; i < 200 && b - a > 1e-17; ++i) {
      double m = 0.5 * (a + b);
      if (eval(m).v < y) a = m; else b = m;
    }
    return 0.5 * (a + b);
  }
};

// ψ f ψ⁻¹ sampled on f's nodes plus extra nodes; data coincides with f where ψ = id
template <class Psi>
C1Map conjugate_on_nodes(const C1Map& f, const Psi& psi, int extra = 400) {
  auto grid = merge_grids(f.nodes(), uniform_grid({0, 1}, extra));
  std::vector<double> y(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid[i];
    Jet pi = psi.eval(x);
    double u = (pi.v == x && pi.d == 1.0) ? x : psi.inverse(x);
    Jet pu = psi.eval(u);
    Jet fu = f.eval(u);
    Jet pf = psi.eval(fu.v);
    y[i] = pf.v;
    d[i] = pf.d * fu.d / pu.d;
  }
  return C1Map({0, 1}, {0, 1}, grid, std::move(y), std::move(d));
}

inline C1Map shifted_pair(double lambda, double k, double z0 = -3, double z1 = 3) {
  return conjugate_on_nodes(mobius(lambda), FatouShift{lambda, k, z0, z1});
}

}  // namespace fixtures
