#include <gtest/gtest.h>

#include "c1lab/builders.hpp"
#include "c1lab/conjugacy.hpp"
#include "fixtures.hpp"

using namespace c1lab;

TEST(Conjugacy, UnitaryIdentity) {
  auto f = mobius(2);
  auto h = unitary_conjugacy(f, f, 0.05, {0, 0.9});
  for (double x : {0.01, 0.2, 0.5, 0.89}) EXPECT_NEAR(h(x), x, 1e-12);
}

TEST(Conjugacy, UnitaryRecoversConjugator) {
  auto f = mobius(2);
  fixtures::FatouShift psi{2, 1, -3, 3};
  auto g = fixtures::conjugate_on_nodes(f, psi);
  auto h = unitary_conjugacy(f, g, 0.01, {0, 0.95});
  for (double x : {0.02, 0.2, 0.5, 0.7, 0.94}) EXPECT_NEAR(h(x), psi(x), 1e-7);
  double worst = 0;
  for (int i = 1; i < 200; ++i) {
    double x = 0.9 * i / 200 * 0.9;
    worst = std::max(worst, std::abs(h(f(x)) - g(h(x))));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_THROW(unitary_conjugacy(f, g, 0.01, {0, 1}), truncation_error);
}

TEST(Conjugacy, UnitaryUniqueAcrossBasePoints) {
  auto f = mobius(2);
  auto g = perturb_interior(f, {0.3, 0.7, 0.05});
  auto h1 = unitary_conjugacy(f, g, 0.02, {0, 0.9});
  auto h2 = unitary_conjugacy(f, g, 0.1, {0, 0.9});
  for (double x : {0.1, 0.35, 0.6, 0.85}) EXPECT_NEAR(h1(x), h2(x), 1e-9);
}

TEST(Conjugacy, UnitaryNeedsCoincidence) {
  EXPECT_THROW(unitary_conjugacy(mobius(2), mobius(2.5), 0.01, {0, 0.9}), coincidence_error);
}

TEST(Conjugacy, MatherIdentity) {
  auto f = mobius(2);
  auto M = mather_invariant(f, f);
  EXPECT_EQ(M.shift, 0);
  for (double x : {0.1, 0.5, 0.9}) EXPECT_NEAR(M(x), x, 1e-12);
}

TEST(Conjugacy, MatherCommutes) {
  auto f = mobius(2);
  auto g = perturb_interior(f, {0.3, 0.7, 0.05});
  auto M = mather_invariant(f, g);
  EXPECT_LT(commutation_residual(M, f), 1e-6);
}

TEST(Conjugacy, MatherOfShiftedPairIsPower) {
  for (double k : {1.0, 2.0}) {
    auto f = mobius(2);
    auto g = fixtures::shifted_pair(2, k);
    auto M = mather_invariant(f, g);
    auto fk = iterate(f, 0.4, long(k));
    EXPECT_NEAR(M(0.4), fk.v, 1e-7);
  }
}

TEST(Conjugacy, MatherDecreasingDirection) {
  auto f = mobius(0.5);
  auto g = perturb_interior(f, {0.3, 0.7, 0.05});
  auto M = mather_invariant(f, g);
  EXPECT_EQ(M.direction, -1);
  EXPECT_LT(commutation_residual(M, f), 1e-6);
}

TEST(Conjugacy, MatherMonotone) {
  auto f = mobius(2);
  auto g = perturb_interior(f, {0.3, 0.7, 0.02});
  auto gp = perturb_interior(g, {0.25, 0.75, 0.03});
  auto M = mather_invariant(f, g), Mp = mather_invariant(f, gp);
  for (int i = 1; i < 50; ++i) {
    double x = 0.05 + 0.9 * i / 50;
    EXPECT_GT(Mp(x), M(x));
  }
}

TEST(Conjugacy, TranslationOfPowers) {
  auto f = mobius(2);
  long n = 1024;
  C1Map h = identity();
  for (int k = 0; k <= 3; ++k) {
    auto t = translation_number(f, h, n);
    for (double v : t.per_point) {
      EXPECT_GE(v, k - 1.0 / n);
      EXPECT_LE(v, k + 1.0 / n);
    }
    EXPECT_LT(t.spread, 2.0 / n);
    h = compose(f, h);
  }
}

TEST(Conjugacy, TranslationOfFlowTime) {
  // mobius(2^s) is the time-s map of the flow whose time-1 map is mobius(2)
  auto f = mobius(2);
  auto t = translation_number(f, mobius(std::pow(2.0, 0.37)), 512);
  EXPECT_NEAR(t.estimate, 0.37, 1.0 / 512);
}

TEST(Conjugacy, TranslationShiftByF) {
  auto f = mobius(2);
  auto h = mobius(std::pow(2.0, 0.6));
  auto a = translation_number(f, h, 256);
  auto b = translation_number(f, compose(f, h), 256);
  EXPECT_NEAR(b.estimate - a.estimate, 1.0, 1e-12);
}

TEST(Conjugacy, TranslationRejectsNonCommuting) {
  EXPECT_THROW(translation_number(mobius(2), parabolic(0.3), 64), commutation_error);
}

TEST(Conjugacy, DelayCases) {
  auto f = mobius(2);
  EXPECT_EQ(delay(f, f).delay, 0);
  auto r = delay(f, fixtures::shifted_pair(2, 3));
  EXPECT_EQ(r.delay, 3);
  EXPECT_GT(r.n_used, 0);
}
