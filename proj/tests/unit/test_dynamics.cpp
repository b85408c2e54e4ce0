#include <gtest/gtest.h>

#include "support.hpp"

using namespace hallmhd;
using hmtest::max_abs;
using hmtest::max_abs_diff;
using hmtest::random_solenoidal;

namespace {

double rel(const SpectralVectorField& a, const SpectralVectorField& b) {
  return max_abs_diff(a, b) / std::max(max_abs(b), 1e-300);
}

}  // namespace

TEST(ConvolutionOracle, Momentum) {
  for (double L : {kTwoPi, 3.0}) {
    const GridSpec g = make_grid(8, L);
    const auto u = random_solenoidal(g, 1);
    const auto b = random_solenoidal(g, 2);
    const auto ref = hmtest::oracle_momentum(u, b, g);
    ASSERT_GT(max_abs(ref), 0.0);
    EXPECT_LT(rel(momentum_nonlinear(u, b, g), ref), 1e-12) << "L=" << L;
  }
}

TEST(ConvolutionOracle, InductionWithHall) {
  const GridSpec g = make_grid(8, 4.0);
  const auto u = random_solenoidal(g, 3);
  const auto b = random_solenoidal(g, 4);
  const auto ref = hmtest::oracle_induction(u, b, 1.0, g);
  EXPECT_LT(rel(induction_nonlinear(u, b, 1.0, g), ref), 1e-12);
  const auto ref0 = hmtest::oracle_induction(u, b, 0.0, g);
  EXPECT_LT(rel(induction_nonlinear(u, b, 0.0, g), ref0), 1e-12);
}

TEST(ConvolutionOracle, HallTerm) {
  const GridSpec g = make_grid(8, kTwoPi);
  const auto b = random_solenoidal(g, 5);
  EXPECT_LT(rel(hall_term(b, g), hmtest::oracle_hall(b, g)), 1e-12);
}

TEST(Momentum, TrivialCases) {
  const GridSpec g = make_grid(16, 5.0);
  const SpectralVectorField zero(g);
  EXPECT_EQ(max_abs(momentum_nonlinear(zero, zero, g)), 0.0);
  const auto u = random_solenoidal(g, 6);
  EXPECT_LT(max_abs(momentum_nonlinear(u, u, g)), 1e-14 * max_abs(u));
  EXPECT_LT(divergence_residual(momentum_nonlinear(u, random_solenoidal(g, 7), g), g), 1e-13);
}

TEST(Induction, TrivialCases) {
  const GridSpec g = make_grid(16, 5.0);
  const SpectralVectorField zero(g);
  const auto u = random_solenoidal(g, 8);
  const auto b = random_solenoidal(g, 9);
  EXPECT_EQ(max_abs(induction_nonlinear(u, zero, 1.0, g)), 0.0);
  EXPECT_EQ(max_abs(induction_nonlinear(zero, b, 0.0, g)), 0.0);
  EXPECT_LT(divergence_residual(induction_nonlinear(u, b, 1.0, g), g), 1e-13);
  EXPECT_LT(divergence_residual(induction_nonlinear(u, b, 0.0, g), g), 1e-13);
}

TEST(HallTerm, ConstantFieldAndCurlImage) {
  const GridSpec g = make_grid(16, 5.0);
  SpectralVectorField c(g);
  c[0][0] = 1.0;
  c[2][0] = -2.0;
  EXPECT_EQ(max_abs(hall_term(c, g)), 0.0);
  EXPECT_LT(divergence_residual(hall_term(random_solenoidal(g, 10), g), g), 1e-13);
}

TEST(HallTerm, LinearityOfCoefficient) {
  const GridSpec g = make_grid(16, 3.0);
  const auto u = random_solenoidal(g, 11);
  const auto b = random_solenoidal(g, 12);
  for (double c : {0.5, 1.0, 3.0}) {
    SpectralVectorField h = hall_term(b, g);
    h *= -c;
    const auto diff = induction_nonlinear(u, b, c, g) - induction_nonlinear(u, b, 0.0, g);
    EXPECT_LT(rel(diff, h), 1e-11) << c;
  }
}

TEST(PrimitiveForm, ZeroAndNavierStokesLimit) {
  const GridSpec g = make_grid(16, 4.0);
  const SpectralVectorField zero(g);
  const RhsPair z = primitive_form_rhs(zero, zero, 1.0, g);
  EXPECT_EQ(max_abs(z.du), 0.0);
  EXPECT_EQ(max_abs(z.dB), 0.0);
  const auto u = random_solenoidal(g, 13);
  const RhsPair ns = primitive_form_rhs(u, zero, 1.0, g);
  EXPECT_EQ(max_abs(ns.dB), 0.0);
  EXPECT_LT(rel(ns.du, momentum_nonlinear(u, zero, g)), 1e-12);
}

TEST(CrossValidate, HundredRandomPairs) {
  const GridSpec g = make_grid(32, 6.0);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    worst = std::max(worst, cross_validate_forms(random_solenoidal(g, 100 + s), random_solenoidal(g, 300 + s), 1.0, g));
  }
  EXPECT_LT(worst, 1e-10);
  EXPECT_EQ(cross_validate_forms(SpectralVectorField(g), SpectralVectorField(g), 1.0, g), 0.0);
}

TEST(CrossValidate, FlagsCompressibleInput) {
  const GridSpec g = make_grid(16, 6.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  PhysicalVectorField f(g);
  for (auto& c : f.comp) {
    for (auto& v : c) v = nd(rng);
  }
  SpectralVectorField u = forward_transform(f, g);
  dealias_in_place(u, g);
  zero_mean_in_place(u);
  EXPECT_GT(cross_validate_forms(u, random_solenoidal(g, 6), 1.0, g), 1e-3);
}

TEST(EnergyNeutrality, HallHundredFields) {
  const GridSpec g = make_grid(32, 5.0);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) worst = std::max(worst, hall_energy_neutrality(random_solenoidal(g, 500 + s), g));
  EXPECT_LT(worst, 1e-10);
}

TEST(EnergyNeutrality, IdealTransport) {
  const GridSpec g = make_grid(32, 5.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    EXPECT_LT(transport_energy_neutrality(random_solenoidal(g, 700 + s), random_solenoidal(g, 800 + s), g), 1e-9);
  }
}

TEST(Dynamics, NonFiniteInputIsRejected) {
  const GridSpec g = make_grid(8, 5.0);
  auto u = random_solenoidal(g, 1);
  const std::size_t idx = g.index(1, 1, 1);
  u[0][idx] = Complex{std::nan(""), 0.0};
  EXPECT_THROW(momentum_nonlinear(u, u, g), Error);
}
