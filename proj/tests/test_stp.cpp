#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fiberstrain/stp.hpp"
#include "oracles.hpp"

namespace fs = fiberstrain;

namespace {

constexpr double kPi = oracle::kPi;

fs::Tensor4 plate_local() {
  fs::Mat6 c;
  const auto p = oracle::plate_stiffness();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) c(i, j) = p[i][j];
  return fs::axis_swap_xz(fs::Tensor4::from_voigt_stiffness(c));
}

fs::Tensor4 glass() { return fs::isotropic_stiffness(73.0, 0.18); }
fs::Tensor4 polymer() { return fs::isotropic_stiffness(1.665, 0.36); }

fs::SymTensor2 random_strain(std::mt19937_64& rng) {
  const auto m = oracle::random_symmetric(rng, 1e-3);
  return fs::SymTensor2::from_components(m[0][0], m[1][1], m[2][2], m[1][2], m[0][2], m[0][1]);
}

// Entries of the plate/glass operator at beta = 0, from an independent
// evaluation of the closed-form solution.
constexpr double kT21 = -0.149741365406;
constexpr double kT22 = 0.104521517471;
constexpr double kT23 = 0.022268841887;
constexpr double kT44 = 0.082095941467;
constexpr double kT55 = 0.107091922728;

}  // namespace

TEST(Lekhnitskii, IsotropicBetas) {
  const double e = 1.665, nu = 0.36;
  const auto p = fs::lekhnitskii_params(fs::invert_stiffness(polymer()));
  EXPECT_NEAR(p.beta23, -nu * (1 + nu) / e, 1e-14);
  EXPECT_NEAR(p.beta22, (1 - nu * nu) / e, 1e-14);
  EXPECT_NEAR(p.beta33, (1 - nu * nu) / e, 1e-14);
  EXPECT_NEAR(p.mu_r_squared, 0.0, 1e-14);
  EXPECT_NEAR(p.mu_i, 1.0, 1e-14);
}

TEST(Lekhnitskii, BetaDefinition) {
  const fs::Mat6 s = fs::invert_stiffness(plate_local()).voigt_compliance();
  const auto p = fs::lekhnitskii_params(fs::invert_stiffness(plate_local()));
  EXPECT_DOUBLE_EQ(p.beta22, s(1, 1) - s(1, 0) * s(1, 0) / s(0, 0));
  EXPECT_DOUBLE_EQ(p.beta23, s(1, 2) - s(1, 0) * s(2, 0) / s(0, 0));
  EXPECT_DOUBLE_EQ(p.beta44, s(3, 3) - s(3, 0) * s(3, 0) / s(0, 0));
}

TEST(Lekhnitskii, PlateHasImaginaryRootPair) {
  const auto p = fs::lekhnitskii_params(fs::invert_stiffness(plate_local()));
  EXPECT_TRUE(p.imaginary_roots());
  EXPECT_NEAR(p.mu_r_squared, -0.00224, 5e-5);
  EXPECT_GT(p.mu_i, 0.0);
}

TEST(Lekhnitskii, RejectsNegativeImaginaryRadicand) {
  // For PD compliances the mu_I radicand is positive, so an indefinite one
  // is fed in directly.
  fs::Mat6 s = fs::Mat6::Zero();
  s.diagonal() << 1.0, 1.0, 1.0, 0.1, 1.0, 1.0;
  s(1, 2) = s(2, 1) = -2.0;
  EXPECT_THROW(fs::lekhnitskii_params(fs::Tensor4::from_voigt_compliance(s)), fs::StpValidityError);
}

TEST(AssembleStp, IdenticalMaterialsGiveIdentity) {
  const auto op = fs::assemble_stp(polymer(), polymer(), fs::FiberSection::circular(1.0));
  EXPECT_LE(fs::max_abs_diff(op.transfer, fs::Tensor4::identity()), 1e-10);
  const auto op2 = fs::assemble_stp(plate_local(), plate_local(), fs::FiberSection::circular(0.1));
  EXPECT_LE(fs::max_abs_diff(op2.transfer, fs::Tensor4::identity()), 1e-10);
}

TEST(AssembleStp, MatchingShearGivesUnitShearDiagonal) {
  fs::Mat6 cf = glass().voigt_stiffness();
  const fs::Mat6 cm = plate_local().voigt_stiffness();
  cf(4, 4) = cm(4, 4);
  cf(5, 5) = cm(5, 5);
  const auto op = fs::assemble_stp(plate_local(), fs::Tensor4::from_voigt_stiffness(cf),
                                   fs::FiberSection::circular(1.0));
  const fs::Mat6 t = op.transfer.voigt_strain_map();
  EXPECT_NEAR(t(4, 4), 1.0, 1e-14);
  EXPECT_NEAR(t(5, 5), 1.0, 1e-14);
}

TEST(AssembleStp, PlateGlassBetaZero) {
  const auto op = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const fs::Mat6 t = fs::transfer_matrix(op, fs::Notation::Mandel);
  fs::Mat6 expect = fs::Mat6::Zero();
  expect(0, 0) = 1.0;
  expect(1, 0) = expect(2, 0) = kT21;
  expect(1, 1) = expect(2, 2) = kT22;
  expect(1, 2) = expect(2, 1) = kT23;
  expect(3, 3) = kT44;
  expect(4, 4) = expect(5, 5) = kT55;
  EXPECT_LE((t - expect).cwiseAbs().maxCoeff(), 1e-9);
  // Exact first row and block sparsity.
  for (int j = 0; j < 6; ++j) EXPECT_EQ(t(0, j), j == 0 ? 1.0 : 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 4; j < 6; ++j) {
      EXPECT_EQ(t(i, j), 0.0);
      EXPECT_EQ(t(j, i), 0.0);
    }
  EXPECT_EQ(t(4, 5), 0.0);
  EXPECT_EQ(t(5, 4), 0.0);
}

TEST(AssembleStp, PolymerGlassReference) {
  const auto op = fs::assemble_stp(polymer(), glass(), fs::FiberSection::circular(1.0));
  const fs::Mat6 t = op.transfer.voigt_strain_map();
  EXPECT_NEAR(t(1, 0), -0.161669, 1e-6);
  EXPECT_NEAR(t(1, 1), 0.0446212, 1e-7);
  EXPECT_NEAR(t(1, 2), 0.012553, 1e-6);
  EXPECT_NEAR(t(3, 3), 0.0320682, 1e-7);
  EXPECT_NEAR(t(4, 4), 0.0388109, 1e-7);
  EXPECT_NEAR(t(5, 5), 0.0388109, 1e-7);
  EXPECT_NEAR(t(1, 0), t(2, 0), 1e-12);
}

TEST(AssembleStp, IsotropicShearRatioClosedForm) {
  // Rows 5 and 6 reduce to 2 G_m / (G_m + G_f) for isotropic phases.
  const double gm = 1.665 / 2.72, gf = 73.0 / 2.36;
  const auto op = fs::assemble_stp(polymer(), glass(), fs::FiberSection::circular(1.0));
  EXPECT_NEAR(op.transfer.voigt_strain_map()(4, 4), 2 * gm / (gm + gf), 1e-14);
}

TEST(AssembleStp, RadiusDoesNotMatterForCircularSections) {
  const auto a = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const auto b = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(0.025));
  EXPECT_LE(fs::max_abs_diff(a.transfer, b.transfer), 1e-12);
}

TEST(AssembleStp, FiberAxisRowIsIdentity) {
  std::mt19937_64 rng(21);
  const auto op = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  for (int n = 0; n < 10; ++n) {
    const auto eps = random_strain(rng);
    EXPECT_EQ(fs::apply_stp(op, eps)(0, 0), eps(0, 0));
  }
}

TEST(AssembleStp, ContinuousInFiberStiffness) {
  const fs::Mat6 cf = glass().voigt_stiffness();
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e-6, 1e-6);
  fs::Mat6 pert = cf;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j)
      if (cf(i, j) != 0.0) pert(i, j) = pert(j, i) = cf(i, j) * (1 + u(rng));
  const auto moved = fs::assemble_stp(plate_local(), fs::Tensor4::from_voigt_stiffness(pert),
                                      fs::FiberSection::circular(1.0));
  EXPECT_LT(fs::max_abs_diff(base.transfer, moved.transfer), 1e-3);
}

TEST(AssembleStp, RejectsNonOrthotropicAndEllipticInput) {
  const auto tilted = fs::rotate_tensor4(plate_local(), fs::RotationMatrix::about_z(0.3));
  EXPECT_THROW(fs::assemble_stp(tilted, glass(), fs::FiberSection::circular(1.0)), fs::StpValidityError);
  fs::FiberSection ellipse = fs::FiberSection::circular(1.0);
  ellipse.semi_axis_b = 2.0;
  EXPECT_THROW(fs::assemble_stp(plate_local(), glass(), ellipse), fs::ArgumentError);
  EXPECT_THROW(fs::FiberSection::circular(0.0), fs::ArgumentError);
}

TEST(RotateStp, VerticalSectionMatchesTiltedAssembly) {
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const fs::Mat6 t = fs::transfer_matrix(fs::rotate_stp(base, kPi / 2, kPi / 2), fs::Notation::Mandel);
  // Sensor along y, reinforcement along x.
  EXPECT_NEAR(t(0, 0), 0.5511, 5e-4);
  EXPECT_NEAR(t(0, 1), -0.1411, 5e-4);
  EXPECT_NEAR(t(0, 2), 0.0191, 5e-4);
  EXPECT_NEAR(t(2, 0), -0.0795, 5e-4);
  EXPECT_NEAR(t(2, 1), -0.1422, 5e-4);
  EXPECT_NEAR(t(2, 2), 0.1117, 5e-4);
  EXPECT_NEAR(t(3, 3), 0.1026, 5e-4);
  EXPECT_NEAR(t(4, 4), 0.1066, 5e-4);
  EXPECT_NEAR(t(5, 5), 0.1057, 5e-4);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(t(1, j), j == 1 ? 1.0 : 0.0, 1e-15);
}

TEST(RotateStp, ZeroAnglesKeepOperator) {
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const auto same = fs::rotate_stp(base, 0.0, 0.0);
  EXPECT_EQ(fs::max_abs_diff(same.transfer, base.transfer), 0.0);
  EXPECT_EQ(same.fiber_direction, fs::Vec3::UnitX());
}

TEST(RotateStp, InverseAndComposition) {
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const auto there = fs::rotate_stp(base, 0.0, 0.8);
  const auto back = fs::rotate_stp(there, 0.0, -0.8);
  EXPECT_LE(fs::max_abs_diff(back.transfer, base.transfer), 1e-12);
  const auto two_steps = fs::rotate_stp(fs::rotate_stp(base, 0.0, 0.3), 0.0, 0.5);
  const auto one_step = fs::rotate_stp(base, 0.0, 0.8);
  EXPECT_LE(fs::max_abs_diff(two_steps.transfer, one_step.transfer), 1e-12);
  EXPECT_NEAR(one_step.fiber_direction.x(), std::cos(0.8), 1e-15);
  EXPECT_NEAR(one_step.fiber_direction.y(), std::sin(0.8), 1e-15);
}

TEST(RotateStp, FiberDirectionStrainTransfersVerbatim) {
  std::mt19937_64 rng(6);
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  for (double alpha : {0.0, kPi / 2})
    for (double beta : {0.0, 0.9, kPi / 2}) {
      const auto op = fs::rotate_stp(base, alpha, beta);
      const fs::SymTensor2 p = fs::SymTensor2::outer(op.fiber_direction);
      const auto eps = random_strain(rng);
      EXPECT_NEAR(fs::double_contract(p, fs::apply_stp(op, eps)), fs::double_contract(p, eps), 1e-15);
    }
}

TEST(RotateStp, IntermediateTiltIsOutsideValidity) {
  // Tilting the reinforcement by an angle other than 0 or pi/2 couples normal
  // and shear terms in the fiber frame; the closed form does not apply.
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  EXPECT_THROW(fs::rotate_stp(base, kPi / 4, kPi / 4), fs::StpValidityError);
  EXPECT_NO_THROW(fs::rotate_stp(base, kPi, 0.0));
}

TEST(EffectiveModulus, IsotropicMatrixAnyDirection) {
  const auto e = fs::effective_fiber_modulus(polymer(), 73.0, fs::Vec3(1, 2, -0.5));
  EXPECT_NEAR(e.matrix_modulus, 1.665, 1e-12);
  EXPECT_NEAR(e.modulus, 73.0 - 1.665, 1e-12);
  EXPECT_NEAR(e.direction.norm(), 1.0, 1e-15);
}

TEST(EffectiveModulus, SoftFiberIsZero) {
  EXPECT_EQ(fs::effective_fiber_modulus(polymer(), 1.0, fs::Vec3::UnitX()).modulus, 0.0);
  EXPECT_EQ(fs::effective_fiber_modulus(polymer(), 1.665, fs::Vec3::UnitX()).modulus, 0.0);
}

TEST(EffectiveModulus, PlateAlongReinforcement) {
  const double em = 38.61 - 2 * 2.43 * 2.43 / (6.34 + 3.03);
  const auto e = fs::effective_fiber_modulus(plate_local(), 73.0, fs::Vec3::UnitX());
  EXPECT_NEAR(e.matrix_modulus, em, 1e-12);
  EXPECT_NEAR(e.modulus, 73.0 - em, 1e-12);
  EXPECT_NEAR(e.modulus, 35.6504, 1e-4);
}

TEST(ApplyStp, IdentityAndLinearity) {
  std::mt19937_64 rng(2);
  const auto x = random_strain(rng), y = random_strain(rng);
  const auto id = fs::assemble_stp(polymer(), polymer(), fs::FiberSection::circular(1.0));
  EXPECT_LE((fs::apply_stp(id, x) - x).max_abs(), 1e-12 * x.max_abs());
  const auto op = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const auto lhs = fs::apply_stp(op, 2.0 * x + (-3.0) * y);
  const auto rhs = 2.0 * fs::apply_stp(op, x) + (-3.0) * fs::apply_stp(op, y);
  EXPECT_LE((lhs - rhs).max_abs(), 1e-15);
}

TEST(ExtendedRecovery, ProjectionIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto base = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  for (int n = 0; n < 50; ++n) {
    const double beta = u(rng) * kPi;
    const auto op = fs::rotate_stp(base, 0.0, beta);
    const auto eps = random_strain(rng);
    const double g = 1e-3 * u(rng);
    const auto ext = fs::extended_recovery(op, eps, g, op.fiber_direction);
    EXPECT_NEAR(fs::double_contract(fs::SymTensor2::outer(op.fiber_direction), ext), g, 1e-14);
  }
}

TEST(ExtendedRecovery, ReducesToClassicalRule) {
  std::mt19937_64 rng(18);
  const auto op = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const auto eps = random_strain(rng);
  const auto t = fs::apply_stp(op, eps);
  const fs::Vec3 v = fs::Vec3::UnitX();
  const auto ext = fs::extended_recovery(op, eps, t(0, 0), v);
  EXPECT_LE((ext - t).max_abs(), 1e-18);
}

TEST(ExtendedRecovery, ZeroStrainGivesScaledProjector) {
  const auto op = fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0));
  const fs::Vec3 v(0.6, 0.8, 0.0);
  const auto ext = fs::extended_recovery(op, fs::SymTensor2(), 0.25, v);
  EXPECT_LE((ext - 0.25 * fs::SymTensor2::outer(v)).max_abs(), 1e-16);
}

TEST(Notation, ParseAndMatrices) {
  EXPECT_EQ(fs::parse_notation("voigt"), fs::Notation::Voigt);
  EXPECT_EQ(fs::parse_notation("mandel"), fs::Notation::Mandel);
  EXPECT_THROW(fs::parse_notation("kelvin"), fs::ArgumentError);
  const auto op = fs::rotate_stp(fs::assemble_stp(plate_local(), glass(), fs::FiberSection::circular(1.0)),
                                 0.0, 0.4);
  const fs::Mat6 v = fs::transfer_matrix(op, fs::Notation::Voigt);
  const fs::Mat6 m = fs::transfer_matrix(op, fs::Notation::Mandel);
  // Voigt strain map and Mandel form differ by the shear weights.
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double wi = i < 3 ? 1.0 : std::sqrt(2.0), wj = j < 3 ? 1.0 : std::sqrt(2.0);
      const double vi = i < 3 ? 1.0 : 2.0;
      EXPECT_NEAR(m(i, j) / (wi * wj), v(i, j) / vi, 1e-14);
    }
}
