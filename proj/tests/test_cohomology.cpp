#include <gtest/gtest.h>

#include <c1lab/builders.hpp>
#include <c1lab/cohomology.hpp>

using namespace c1lab;

namespace {

const double golden = (std::sqrt(5.0) - 1) / 2;

C1Map reference_parabolic() { return flow(tangent_field(1), 1); }

}  // namespace

TEST(Birkhoff, ZeroPotential) {
  auto f = reference_parabolic();
  auto S = birkhoff_sum(f, [](double) { return 0.0; }, 7);
  EXPECT_EQ(S.sup_abs(), 0.0);
}

TEST(Birkhoff, SingleTermIsPhi) {
  auto f = reference_parabolic();
  auto phi = [](double x) { return std::sin(3 * x); };
  auto S = birkhoff_sum(f, phi, 1);
  for (std::size_t i = 0; i < S.x.size(); ++i) EXPECT_EQ(S.y[i], phi(S.x[i]));
}

TEST(Birkhoff, IdentityMultiplies) {
  auto f = identity();
  auto phi = [](double x) { return x * x - 0.3; };
  auto S = birkhoff_sum(f, phi, 5);
  for (std::size_t i = 0; i < S.x.size(); ++i) EXPECT_NEAR(S.y[i], 5 * phi(S.x[i]), 1e-14);
  EXPECT_THROW(birkhoff_sum(f, phi, 0), precondition_error);
}

TEST(Cesaro, IdentityAndRotationAreTrivial) {
  auto c = cesaro_rho(identity(), 8);
  EXPECT_LT(c.residual, 1e-14);
  for (double r : c.rho) EXPECT_LT(std::abs(r), 1e-14);
  auto R = rigid_rotation(golden);
  auto cr = cesaro_rho(R, 16);
  EXPECT_LT(cr.residual, 1e-14);
  EXPECT_LT(lyapunov_sup(R, 64), 1e-14);
}

TEST(Cesaro, TelescopingIdentity) {
  auto f = reference_parabolic();
  for (auto& r : residual_trace(f, {1, 3, 10, 40})) EXPECT_NEAR(r.residual, r.telescoped, 1e-12) << r.n;
  auto F = perturbed_rotation(golden, 0.3);
  for (auto& r : residual_trace(F, {2, 17})) EXPECT_NEAR(r.residual, r.telescoped, 1e-12) << r.n;
}

TEST(Cesaro, ResidualMatchesTrace) {
  auto f = reference_parabolic();
  auto c = cesaro_rho(f, 32);
  auto tr = residual_trace(f, {32});
  EXPECT_NEAR(c.residual, tr[0].residual, 1e-3 * tr[0].residual);
  EXPECT_TRUE(c.normalized);
}

TEST(Cesaro, ParabolicTraceDecreases) {
  auto f = reference_parabolic();
  std::vector<int> ns{2, 4, 8, 16, 32, 64, 128, 256, 512};
  auto tr = residual_trace(f, ns);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    EXPECT_LE(tr[i].residual, tr[i - 1].residual);
    EXPECT_LE(tr[i].lyapunov, tr[i - 1].lyapunov);
  }
  // frozen from the first measurement
  EXPECT_NEAR(tr.back().residual, 0.0188731, 2e-6);
  EXPECT_LT(tr.back().residual, 0.05);
}

TEST(Cesaro, HyperbolicControl) {
  auto f = mobius(2);
  for (int n : {1, 8, 64, 256}) EXPECT_GT(lyapunov_sup(f, n), 0.1 * std::log(2.0));
}

TEST(Navas, ZeroCocycleGivesIdentity) {
  auto c = cesaro_rho(identity(), 4);
  auto h = navas_conjugator(c);
  EXPECT_LT(distance_to_id(h), 1e-14);
}

TEST(Navas, ConstantIsNormalizedAway) {
  Cocycle c;
  c.nodes = uniform_grid({0, 1}, 65);
  c.eval = [](double) { return 0.7; };
  c.rho.assign(c.nodes.size(), 0.7);
  EXPECT_THROW(navas_conjugator(c), normalization_error);
  auto n = normalize(c);
  EXPECT_NEAR(n(0.3), 0.0, 1e-14);
  EXPECT_LT(distance_to_id(navas_conjugator(n)), 1e-13);
}

TEST(Navas, DerivativeIsExpRhoAtNodes) {
  auto f = reference_parabolic();
  auto c = cesaro_rho(f, 64);
  auto h = navas_conjugator(c);
  for (std::size_t i = 0; i < c.nodes.size(); i += 7)
    EXPECT_NEAR(h.eval(c.nodes[i]).d, std::exp(c.rho[i]), 1e-12 * std::exp(c.rho[i]));
  EXPECT_EQ(h(0.0), 0.0);
  EXPECT_EQ(h(1.0), 1.0);
  EXPECT_LT(derivative_mismatch(c, h), 1e-5);
}

TEST(Navas, ConjugateLogDerivativeIsResidual) {
  auto f = reference_parabolic();
  auto c = cesaro_rho(f, 64);
  auto h = navas_conjugator(c);
  double q = std::max(c.quad_tol, derivative_mismatch(c, h));
  auto dev = conjugate_deviation(f, h);
  EXPECT_LE(dev.log_c1, c.residual + 2 * q);
  EXPECT_GT(dev.log_c1, 0.9 * c.residual);
}

TEST(Path, Parameterization) {
  for (int n : {1, 2, 7, 100}) {
    auto p = path_param(path_time(n, 1));
    EXPECT_EQ(p.n, n);
    EXPECT_NEAR(p.lambda, 1.0, 1e-9);
    auto q = path_param(path_time(n, 0.25));
    EXPECT_EQ(q.n, n);
    EXPECT_NEAR(q.lambda, 0.25, 1e-9);
  }
  EXPECT_THROW(path_param(1.0), precondition_error);
}

TEST(Path, EndpointIsCesaro) {
  auto f = reference_parabolic();
  auto p = rho_path(f, path_time(6, 1));
  auto c = cesaro_rho(f, 6);
  EXPECT_NEAR(p.rho(0.4), c(0.4), 1e-12);
}

TEST(Path, InterpolatedResidualBounded) {
  auto f = reference_parabolic();
  for (double l : {0.2, 0.5, 0.9}) {
    auto p = rho_path(f, path_time(10, l));
    EXPECT_LE(p.rho.residual, p.endpoint_residual + 1e-12);
  }
  auto R = rigid_rotation(golden);
  EXPECT_LT(std::abs(rho_path(R, 0.37).rho(0.2)), 1e-14);
}

TEST(Rotation, RigidAndConjugated) {
  for (int n : {16, 1000}) {
    auto e = rotation_number(rigid_rotation(golden), n);
    EXPECT_NEAR(e.value, golden, 1.0 / n);
    auto c = rotation_number(perturbed_rotation(golden, 0.3), n);
    EXPECT_NEAR(c.value, golden, 1.0 / n);
    EXPECT_EQ(c.halfwidth, 1.0 / n);
  }
  EXPECT_EQ(rotation_number(rigid_rotation(0.0), 50).value, 0.0);
  EXPECT_GT(rational_gap(golden), 1e-4);
  EXPECT_LT(rational_gap(0.25), 1e-15);
}

TEST(Rotation, LiftPeriodicity) {
  auto F = perturbed_rotation(0.3, 0.2);
  EXPECT_EQ(F.period().values().back(), F.period().values().front() + 1);
  EXPECT_NEAR(F(1.25), F(0.25) + 1, 1e-14);
  EXPECT_NEAR(F.inverse(F(0.7)), 0.7, 1e-10);
}
