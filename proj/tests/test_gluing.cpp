#include <gtest/gtest.h>

#include "c1lab/builders.hpp"
#include "c1lab/gluing.hpp"

using namespace c1lab;

namespace {

bool zone_matches(const C1Map& r, const C1Map& src, Interval z) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    double x = r.nodes()[i];
    if (x < z.lo || x > z.hi) continue;
    Jet s = src.eval(x);
    if (r.values()[i] != s.v || r.derivs()[i] != s.d) return false;
  }
  return true;
}

const C1Map& source(const Zone& z, const C1Map& f, const C1Map& g) { return z.source == "f" ? f : g; }

}  // namespace

TEST(Gluing, ProfileShape) {
  EXPECT_EQ(bump(0.25), 1.0);
  EXPECT_EQ(bump(0.5), 1.0);
  EXPECT_EQ(bump(1.0), 0.0);
  EXPECT_EQ(bump(0.8), 0.0);
  EXPECT_GT(default_profile().m_phi(), 1.0);
  EXPECT_NEAR(default_profile().m_phi(), 6.0, 1e-6);
}

TEST(Gluing, MargFormula) {
  EXPECT_DOUBLE_EQ(marg(1.0, 2.0), 0.125);
  EXPECT_LT(marg(0.3), 0.15);
  EXPECT_LT(marg(0.1), marg(0.2));
  EXPECT_THROW(marg(0.0), precondition_error);
}

TEST(Gluing, InU) {
  auto f = mobius(2);
  auto g = perturb_interior(f, {0.3, 0.7, 0.05});
  EXPECT_TRUE(in_U(f, f, 1e-9, 0.2, 0.8));
  EXPECT_TRUE(in_U(f, g, 1e-9, 0.3, 0.7));
  auto leak = perturb_interior(f, {0.1, 0.7, 0.05});
  EXPECT_FALSE(in_U(f, leak, 1e-3, 0.2, 0.8));
}

TEST(Gluing, EndpointsSameMap) {
  auto f = mobius(2);
  auto rep = glue_endpoints(f, f, 0.2, 0.8, 0.1);
  EXPECT_LT(rep.achieved_distance, 1e-10);
}

TEST(Gluing, EndpointsDegenerate) {
  auto f = mobius(2), g = mobius(2.01);
  auto rep = glue_endpoints(f, g, 0.6, 0.4, 0.1);
  EXPECT_LT(c1_distance(rep.result, f), 1e-12);
}

TEST(Gluing, EndpointsPerturbedMobius) {
  auto f = mobius(2);
  auto g = perturb_interior(f, {0.3, 0.7, 0.05});
  auto rep = glue_endpoints(f, g, 0.2, 0.8, 0.05);
  EXPECT_LT(rep.achieved_distance, 0.05);
  for (auto& z : rep.coincidence_zones) EXPECT_TRUE(zone_matches(rep.result, source(z, f, g), z.span)) << z.source;
}

TEST(Gluing, EndpointsMarginError) {
  auto f = mobius(2), g = mobius(2.5);
  EXPECT_THROW(glue_endpoints(f, g, 0.2, 0.8, 0.01), margin_error);
}

TEST(Gluing, PartialIdentityAndContract) {
  auto g = mobius(2);
  auto rep = glue_partial(g, g, 0.2, 0.8, 0.1);
  EXPECT_LT(rep.achieved_distance, 1e-10);
  EXPECT_THROW(glue_partial(g, g, 0.4, 0.6, 0.1), precondition_error);
}

TEST(Gluing, PartialShifted) {
  auto g = mobius(2);
  auto f = perturb_interior(g, {0.3, 0.95, 0.002});
  double eps = 0.1;
  auto rep = glue_partial(f, g, 0.2, 0.8, eps);
  EXPECT_LT(rep.achieved_distance, eps);
  for (auto& z : rep.coincidence_zones) EXPECT_TRUE(zone_matches(rep.result, source(z, f, g), z.span)) << z.source;
}

TEST(Gluing, LocalBumpAtPoint) {
  auto g = mobius(2);
  // f - g vanishes to second order at x0
  double x0 = 0.5, eta = 0.05;
  auto f = perturb_interior(g, {0.5, 0.6, 0.002});
  double eps = 0.1;
  auto rep = glue_local(f, g, x0, eta, eps);
  EXPECT_LT(rep.achieved_distance, eps);
  for (auto& z : rep.coincidence_zones) EXPECT_TRUE(zone_matches(rep.result, source(z, f, g), z.span)) << z.source;
  EXPECT_THROW(glue_local(f, g, x0, 0.3, eps), precondition_error);
  auto off = perturb_interior(g, {0.45, 0.6, 0.002});
  EXPECT_THROW(glue_local(off, g, x0, eta, eps), matching_error);
  EXPECT_LT(glue_local(g, g, x0, eta, eps).achieved_distance, 1e-10);
}
