#include <gtest/gtest.h>

#include <random>

#include "c1lab/builders.hpp"

using namespace c1lab;

namespace {

struct MobiusExact {
  double l;
  Jet eval(double x) const { return mobius_jet(l, x); }
  Interval domain() const { return {0, 1}; }
};

}  // namespace

TEST(Core, IdentityEval) {
  auto id = identity();
  Jet j = id.eval(0.3);
  EXPECT_NEAR(j.v, 0.3, 1e-15);
  EXPECT_NEAR(j.d, 1.0, 1e-15);
}

TEST(Core, MobiusClosedForm) {
  auto m = mobius(2);
  Jet j = m.eval(0.5);
  EXPECT_NEAR(j.v, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(j.d, 8.0 / 9.0, 1e-10);
  EXPECT_NEAR(m.eval(0).d, 2.0, 1e-15);
  EXPECT_NEAR(m.eval(1).d, 0.5, 1e-15);
}

TEST(Core, NodeCollocation) {
  auto f = parabolic(0.3);
  for (std::size_t i = 0; i < f.size(); i += 37) {
    Jet j = f.eval(f.nodes()[i]);
    EXPECT_EQ(j.v, f.values()[i]);
    EXPECT_NEAR(j.d, f.derivs()[i], 1e-12);
  }
}

TEST(Core, OutsideDomainThrows) {
  EXPECT_THROW(identity().eval(1.5), domain_error);
}

TEST(Core, DefaultGridShape) {
  auto g = make_grid({0, 1});
  EXPECT_EQ(g.size(), 513u);
  EXPECT_LT(g[1], 1e-11);
  EXPECT_GT(1 - g[g.size() - 2], 0.0);
  EXPECT_LE(1 - g[g.size() - 2], 1.01e-6);
}

TEST(Core, ComposeIdentityIsNodeExact) {
  auto f = mobius(2);
  auto c = compose(f, identity());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(c(f.nodes()[i]), f.values()[i]);
}

TEST(Core, MobiusComposition) {
  auto c = compose(mobius(2), mobius(3));
  EXPECT_LT(c1_distance(c, MobiusExact{6}), 2e-6);
}

TEST(Core, ComposeWithInverse) {
  auto f = parabolic(0.4);
  EXPECT_LT(c1_distance(compose(f, invert(f)), identity()), 1e-6);
}

TEST(Core, InvertMobius) {
  EXPECT_LT(c1_distance(invert(mobius(2)), MobiusExact{0.5}), 1e-6);
  EXPECT_LT(c1_distance(invert(identity()), identity()), 1e-8);
}

TEST(Core, InvertRoundTrip) {
  auto f = mobius(3);
  auto fi = invert(f);
  for (double x : {1e-9, 0.1, 0.37, 0.5, 0.9, 1 - 1e-6}) {
    EXPECT_NEAR(fi(f(x)), x, 1e-9);
    EXPECT_NEAR(fi.eval(f(x)).d, 1 / f.eval(x).d, 1e-6);
  }
  EXPECT_LT(c1_distance(invert(fi), f), 2e-6);
}

TEST(Core, InverseRootFinder) {
  auto f = parabolic(-0.6);
  for (double x : {1e-12, 0.2, 0.77, 1.0}) EXPECT_NEAR(f.inverse(f(x)), x, 1e-13);
}

TEST(Core, ConjugateTrivialCases) {
  auto f = mobius(2);
  EXPECT_LT(c1_distance(conjugate(f, identity()), f), 1e-8);
  EXPECT_LT(c1_distance(conjugate(identity(), parabolic(0.3)), identity()), 1e-9);
}

TEST(Core, ConjugateCommutingMobius) {
  EXPECT_LT(c1_distance(conjugate(mobius(2), mobius(3)), MobiusExact{2}), 2e-6);
}

TEST(Core, ConjugateKeepsEndpointDerivatives) {
  auto f = parabolic(0.5);
  auto h = mobius(1.7);
  auto c = conjugate(f, h);
  EXPECT_NEAR(c.eval(0).d, 1.5, 1e-9);
  EXPECT_NEAR(c.eval(1).d, 0.5, 1e-9);
}

TEST(Core, DistanceParabolicOracle) {
  for (double c : {0.01, 0.05, 0.1}) EXPECT_NEAR(c1_distance(identity(), parabolic(c)), 1.25 * c, 1e-9);
}

TEST(Core, DistanceMetricAxioms) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.3, 3.0);
  for (int k = 0; k < 20; ++k) {
    auto a = mobius(U(rng)), b = mobius(U(rng)), c = mobius(U(rng));
    double ab = c1_distance(a, b), ba = c1_distance(b, a);
    EXPECT_DOUBLE_EQ(ab, ba);
    EXPECT_LE(ab, c1_distance(a, c) + c1_distance(c, b) + 1e-12);
    EXPECT_EQ(c1_distance(a, a), 0.0);
  }
}

TEST(Core, FixedPointsMobius) {
  auto fp = fixed_points(mobius(2));
  ASSERT_EQ(fp.size(), 2u);
  EXPECT_EQ(fp[0].span.lo, 0.0);
  EXPECT_EQ(fp[1].span.hi, 1.0);
  EXPECT_EQ(fp[0].right_sign, 1);
  EXPECT_EQ(fp[1].left_sign, 1);
}

TEST(Core, FixedPointsIdentityPlateau) {
  auto fp = fixed_points(identity());
  ASSERT_EQ(fp.size(), 1u);
  EXPECT_TRUE(fp[0].plateau);
  EXPECT_EQ(fp[0].span.lo, 0.0);
  EXPECT_EQ(fp[0].span.hi, 1.0);
}

TEST(Core, FixedPointsSignedBumps) {
  auto f = signed_bumps({0, 0.3, 0.55, 1}, {1, -1, 1}, 0.05);
  auto fp = fixed_points(f);
  ASSERT_EQ(fp.size(), 4u);
  EXPECT_NEAR(fp[1].span.lo, 0.3, 1e-4);
  EXPECT_NEAR(fp[2].span.lo, 0.55, 1e-4);
  EXPECT_EQ(fp[1].left_sign, 1);
  EXPECT_EQ(fp[1].right_sign, -1);
  EXPECT_EQ(fp[2].right_sign, 1);
}

TEST(Core, BuilderErrors) {
  EXPECT_THROW(mobius(0), builder_error);
  EXPECT_THROW(parabolic(1.0), builder_error);
  EXPECT_THROW(convex_blend(mobius(2), mobius(3), 1.5), builder_error);
  EXPECT_THROW(signed_bumps({0, 1}, {1}, 0.4), builder_error);
  EXPECT_THROW(from_builder("nosuch(1)"), builder_error);
}

TEST(Core, BuilderEndpointDerivatives) {
  auto p = parabolic(0.3);
  EXPECT_NEAR(p.eval(0).d, 1.3, 1e-15);
  EXPECT_NEAR(p.eval(1).d, 0.7, 1e-15);
  EXPECT_LT(c1_distance(mobius(1), identity()), 1e-15);
}

TEST(Core, ConvexBlendEnds) {
  auto f = mobius(2), g = parabolic(0.5);
  EXPECT_EQ(c1_distance(convex_blend(f, g, 0), f), 0.0);
  EXPECT_EQ(c1_distance(convex_blend(f, g, 1), g), 0.0);
  auto h = convex_blend(f, g, 0.25);
  EXPECT_NEAR(h(0.4), 0.75 * f(0.4) + 0.25 * g(0.4), 1e-12);
}

TEST(Core, LogisticFlowIsMobius) {
  // time-t map of a·x(1-x) is mobius(e^{a t})
  auto f = flow(logistic_field(0.8), 1.0);
  EXPECT_LT(c1_distance(f, MobiusExact{std::exp(0.8)}), 1e-7);
}

TEST(Core, ClasseconjPattern) {
  auto f = signed_bumps({0, 0.2, 0.25, 1.0 / 3, 0.5, 1}, {1, -1, 1, -1, 1}, 0.05);
  auto fp = fixed_points(f);
  std::vector<double> expect{0, 0.2, 0.25, 1.0 / 3, 0.5, 1};
  ASSERT_EQ(fp.size(), expect.size());
  for (std::size_t i = 0; i < fp.size(); ++i) EXPECT_NEAR(fp[i].span.lo, expect[i], 1e-4);
  for (std::size_t i = 1; i + 1 < fp.size(); ++i) EXPECT_EQ(fp[i].left_sign, -fp[i].right_sign);
}

TEST(Core, RenormalizeRoundTrip) {
  auto f = signed_bumps({0, 0.3, 0.55, 1}, {1, -1, 1}, 0.05);
  auto r = affine_renormalize(f, {0.3, 0.55});
  auto back = affine_place(r, {0.3, 0.55});
  for (double x : {0.31, 0.4, 0.5}) EXPECT_NEAR(back(x), f(x), 1e-12);
  double sup_r = 0, sup_f = 0;
  for (int i = 0; i <= 1000; ++i) {
    sup_r = std::max(sup_r, std::abs(r.eval(i / 1000.0).d - 1));
    sup_f = std::max(sup_f, std::abs(f.eval(0.3 + 0.25 * i / 1000.0).d - 1));
  }
  EXPECT_NEAR(sup_r, sup_f, 1e-9);
  EXPECT_THROW(affine_renormalize(f, {0.2, 0.55}), invariance_error);
  EXPECT_LT(c1_distance(affine_renormalize(identity(), {0.2, 0.7}), identity()), 1e-8);
}

TEST(Core, ReflectMobius) {
  EXPECT_LT(c1_distance(reflect(mobius(2)), MobiusExact{0.5}), 1e-7);
}

TEST(Core, DslParses) {
  auto g = from_builder("perturb_interior(mobius(2), bump(0.3, 0.7, 0.05))");
  auto f = mobius(2);
  EXPECT_EQ(g(0.2), f(0.2));
  EXPECT_GT(c1_distance(g, f), 0.0);
  auto s = from_builder("signed_bumps([0, 1/4, 1/2, 3/4, 1], [+, -, +, -], 0.05)");
  EXPECT_GT(s(0.1), 0.1);
  EXPECT_LT(s(0.3), 0.3);
  auto b = from_builder("convex_blend(identity, flow(skew(-1, 0.3), 1), 0.5)");
  EXPECT_LT(b(0.5), 0.5);
}

TEST(Core, MonotoneAfterConstruction) {
  auto f = from_builder("signed_bumps([0, 0.1, 0.6, 1], [+, -, +], 0.3)");
  double prev = -1;
  for (int i = 0; i <= 20000; ++i) {
    double v = f(i / 20000.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}
