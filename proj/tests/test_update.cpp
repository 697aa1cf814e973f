#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "polyfilter/chaos_algebra.hpp"
#include "polyfilter/linalg.hpp"
#include "polyfilter/pce.hpp"
#include "polyfilter/polynomial_map.hpp"
#include "polyfilter/update.hpp"
#include "support.hpp"

namespace polyfilter {
namespace {

using test::Gen;

PceVector germ(std::size_t position, double scale, double shift = 0.0) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(position) + 1);
  f(0, static_cast<Eigen::Index>(position)) = scale;
  return PceVector::gaussian(Eigen::VectorXd::Constant(1, shift), f);
}

// q ~ N(0, s^2) on germ 0 and z = q^2 + noise on germ 1.
struct SignLoss {
  PceVector q;
  PceVector z;
};

SignLoss sign_loss(double s, double noise) {
  SignLoss p;
  p.q = germ(0, s);
  const auto y = from_sparse({multiply(to_sparse(p.q, 0), to_sparse(p.q, 0))}, 1);
  p.z = add_measurement_noise(y, Eigen::MatrixXd::Constant(1, 1, noise * noise), 1);
  return p;
}

// Random (q, z) pair: q of degree 2 on `germs`, z a degree-2 function of the
// same germs plus independent noise germs.
struct Pair {
  PceVector q;
  PceVector z;
};

Pair random_pair(Gen& gen, std::size_t R, std::size_t germs = 2) {
  Pair p;
  p.q = gen.pce(2, germs, 2);
  const auto y = gen.pce(R, germs, 2);
  const Eigen::MatrixXd noise = 0.05 * gen.spd(static_cast<Eigen::Index>(R));
  p.z = add_measurement_noise(y, noise, germs);
  return p;
}

double max_rel_block_diff(const UpdateMap& a, const UpdateMap& b) {
  double worst = 0.0;
  for (int k = 0; k <= a.degree(); ++k) {
    const double scale = std::max(1.0, test::max_abs(b.block(k).values()));
    worst = std::max(worst, test::max_abs(a.block(k).values() - b.block(k).values()) / scale);
  }
  return worst;
}

TEST(KalmanGain, Examples) {
  const double sf2 = 2.0, se2 = 0.5;
  const auto g = kalman_gain(Eigen::MatrixXd::Constant(1, 1, sf2), Eigen::MatrixXd::Constant(1, 1, sf2 + se2));
  EXPECT_NEAR(g.gain(0, 0), sf2 / (sf2 + se2), 1e-15);
  EXPECT_FALSE(g.pseudo_inverse);

  Gen gen(41);
  const Eigen::MatrixXd c = gen.spd(3);
  EXPECT_EQ(kalman_gain(Eigen::MatrixXd::Zero(2, 3), c).gain, Eigen::MatrixXd::Zero(2, 3));
  EXPECT_LT(test::max_abs(kalman_gain(c, c).gain - Eigen::MatrixXd::Identity(3, 3)), 1e-12);
}

TEST(KalmanGain, SingularCovarianceUsesFlaggedPseudoInverse) {
  Eigen::Matrix2d c;
  c << 1.0, 1.0, 1.0, 1.0;
  const Eigen::RowVector2d cqz(2.0, 2.0);
  const auto g = kalman_gain(cqz, c);
  EXPECT_TRUE(g.pseudo_inverse);
  EXPECT_NEAR(g.gain(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(g.gain(0, 1), 1.0, 1e-12);
}

TEST(KalmanGain, InvalidInputsThrow) {
  Eigen::Matrix2d nonsym;
  nonsym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(kalman_gain(Eigen::RowVector2d(1, 0), nonsym), std::invalid_argument);
  Eigen::Matrix2d indef;
  indef << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(kalman_gain(Eigen::RowVector2d(1, 0), indef), InvalidCovariance);
  EXPECT_THROW(kalman_gain(Eigen::MatrixXd::Zero(1, 3), Eigen::Matrix2d::Identity()), std::invalid_argument);
}

TEST(LbuUpdate, ConjugateGaussianExample) {
  const double m = 0.7, sf = 1.3, se = 0.4, zhat = 2.1;
  const auto q = germ(0, sf, m);
  const auto r = lbu_update(q, q, Eigen::MatrixXd::Constant(1, 1, se * se), Eigen::VectorXd::Constant(1, zhat));
  const double sf2 = sf * sf, se2 = se * se;
  EXPECT_NEAR(r.posterior.mean()(0), (se2 * m + sf2 * zhat) / (sf2 + se2), 1e-14);
  EXPECT_NEAR(covariance(r.posterior, r.posterior)(0, 0), sf2 * se2 / (sf2 + se2), 1e-14);
  EXPECT_EQ(r.measurement.germ_dim(), 2u);
}

TEST(LbuUpdate, InnovationAtMeanKeepsMean) {
  Gen gen(42);
  const auto q = gen.pce(3, 2, 2);
  const auto y = gen.pce(2, 2, 2);
  const auto r = lbu_update(q, y, 0.1 * Eigen::Matrix2d::Identity(), y.mean());
  EXPECT_LT(test::max_abs(r.posterior.mean() - q.mean()), 1e-13);
}

TEST(LbuUpdate, HugeNoiseLeavesPriorUnchanged) {
  Gen gen(43);
  const auto q = gen.pce(2, 2, 2);
  const auto y = gen.pce(2, 2, 2);
  const double sf2 = covariance(y, y).trace();
  // The noise germs enter the posterior with weight K * sigma_eps ~ 1 / sigma_eps.
  const auto r = lbu_update(q, y, 1e16 * sf2 * Eigen::Matrix2d::Identity(), gen.vector(2));
  const auto qc = q.on_basis(r.posterior.basis_ptr());
  EXPECT_LT(test::max_abs(r.posterior.coeffs() - qc.coeffs()), 1e-6 * test::max_abs(q.coeffs()));
}

TEST(LbuUpdate, LargeNoiseKeepsFirstTwoMoments) {
  Gen gen(44);
  const auto q = gen.pce(2, 2, 2);
  const auto y = gen.pce(2, 2, 2);
  const double sf2 = covariance(y, y).trace();
  const auto r = lbu_update(q, y, 1e8 * sf2 * Eigen::Matrix2d::Identity(), gen.vector(2));
  const Eigen::MatrixXd c = covariance(q, q);
  EXPECT_LT((r.posterior.mean() - q.mean()).norm(), 1e-6 * q.mean().norm());
  EXPECT_LT(test::max_abs(covariance(r.posterior, r.posterior) - c), 1e-6 * test::max_abs(c));
}

TEST(LbuUpdate, ZeroNoiseAddsNoGerms) {
  const auto q = germ(0, 1.0);
  const auto r = lbu_update(q, q, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_EQ(r.measurement.germ_dim(), 1u);
  EXPECT_NEAR(r.posterior.mean()(0), 0.5, 1e-14);
  EXPECT_NEAR(covariance(r.posterior, r.posterior)(0, 0), 0.0, 1e-14);
}

TEST(Hankel, Examples) {
  Gen gen(44);
  const auto q = gen.pce(2, 1, 2);
  const auto z = gen.pce(1, 1, 2);
  const auto s0 = build_hankel_system(z, q, 0);
  ASSERT_EQ(s0.matrix.rows(), 1);
  EXPECT_DOUBLE_EQ(s0.matrix(0, 0), 1.0);
  EXPECT_LT(test::max_abs(s0.rhs.transpose() - q.mean().transpose()), 1e-14);
  const auto m0 = solve_update_map(s0);
  EXPECT_LT(test::max_abs(m0.block(0).values().col(0) - q.mean()), 1e-14);

  const auto s1 = build_hankel_system(z, q, 1);
  const double zbar = z.mean()(0);
  const double z2 = second_moment(z);
  EXPECT_NEAR(s1.matrix(0, 1), zbar, 1e-14);
  EXPECT_NEAR(s1.matrix(1, 0), zbar, 1e-14);
  EXPECT_NEAR(s1.matrix(1, 1), z2, 1e-13);
}

TEST(Hankel, CombinationOrderIsSizeThenLex) {
  Gen gen(45);
  const auto p = random_pair(gen, 2);
  const auto s = build_hankel_system(p.z, p.q, 2);
  const std::vector<Combination> expected{{}, {0}, {1}, {0, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(s.combos, expected);
  EXPECT_EQ(s.matrix, s.matrix.transpose());
}

TEST(SolveUpdateMap, DegreeOneIsKalmanGain) {
  Gen gen(46);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_pair(gen, static_cast<std::size_t>(gen.integer(1, 3)));
    const auto map = solve_update_map(build_hankel_system(p.z, p.q, 1));
    const auto k = kalman_gain(covariance(p.q, p.z), covariance(p.z, p.z)).gain;
    EXPECT_LT(test::max_abs(map.block(1).values() - k), 1e-8);
    EXPECT_LT(test::max_abs(map.block(0).values().col(0) - (p.q.mean() - k * p.z.mean())), 1e-8);
  }
}

TEST(SolveUpdateMap, InconsistentSystemThrows) {
  HankelSystem s;
  s.degree = 1;
  s.measurements = 1;
  s.outputs = 1;
  s.combos = {{}, {0}};
  s.matrix = Eigen::Matrix3d::Identity();
  s.rhs = Eigen::MatrixXd::Zero(3, 1);
  EXPECT_THROW(solve_update_map(s), std::invalid_argument);
}

TEST(SignLoss, AllBlocksVanish) {
  const auto p = sign_loss(0.8, 0.3);
  for (int n = 0; n <= 3; ++n) {
    const auto sys = build_hankel_system(p.z, p.q, n);
    EXPECT_LT(test::max_abs(sys.rhs), 1e-14);
    const auto raw = solve_update_map(sys);
    const auto fit = fit_update_map(p.z, p.q, n);
    for (int k = 0; k <= n; ++k) {
      EXPECT_LT(raw.block_norm(k), 1e-8) << n << " " << k;
      EXPECT_LT(fit.block_norm(k), 1e-8) << n << " " << k;
    }
  }
  const auto closed = nlbu2_closed_form(p.z, p.q);
  for (int k = 0; k <= 2; ++k) EXPECT_LT(closed.block_norm(k), 1e-8);
}

TEST(Nlbu2, MatchesGeneralSolver) {
  Gen gen(47);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_pair(gen, static_cast<std::size_t>(gen.integer(1, 3)));
    const auto general = solve_update_map(build_hankel_system(p.z, p.q, 2));
    const auto closed = nlbu2_closed_form(p.z, p.q);
    EXPECT_LT(max_rel_block_diff(closed, general), 1e-8);
    EXPECT_NEAR(closed.diagnostics.loss, general.diagnostics.loss, 1e-8);
  }
}

TEST(Nlbu2, GaussianLinearProblemIsAffine) {
  Gen gen(48);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index M = 3, R = 2;
    const auto q = PceVector::gaussian(gen.vector(M), gen.matrix(M, M));
    const Eigen::MatrixXd h = gen.matrix(R, M);
    const auto y = q.affine(h, gen.vector(R));
    const auto z = add_measurement_noise(y, 0.2 * gen.spd(R), q.germ_dim());
    const auto map = nlbu2_closed_form(z, q);
    EXPECT_LT(map.block_norm(2), 1e-8 * map.block_norm(1));
  }
}

TEST(ApplyUpdateMap, DegreeOneReproducesLbu) {
  Gen gen(49);
  const auto q = gen.pce(2, 2, 2);
  const auto y = gen.pce(2, 2, 2);
  const Eigen::Vector2d zhat = gen.vector(2);
  const auto r = lbu_update(q, y, 0.3 * Eigen::Matrix2d::Identity(), zhat);
  const auto qa = apply_update_map(r.map, q, r.measurement, zhat);
  const auto [a, b] = on_common_basis(qa, r.posterior);
  EXPECT_LT(test::max_abs(a.coeffs() - b.coeffs()), 1e-12);
}

TEST(ApplyUpdateMap, ZeroMapIsIdentity) {
  Gen gen(50);
  const auto q = gen.pce(2, 2, 2);
  const auto z = gen.pce(3, 2, 2);
  const auto qa = apply_update_map(UpdateMap(2, 2, 3), q, z, gen.vector(3));
  const auto [a, b] = on_common_basis(qa, q);
  EXPECT_EQ(a.coeffs(), b.coeffs());
}

TEST(ApplyUpdateMap, QuadraticGaussianMatchesConjugatePosterior) {
  const double m = -0.4, sf = 0.9, se = 0.5, zhat = 0.8;
  const auto q = germ(0, sf, m);
  const auto z = add_measurement_noise(q, Eigen::MatrixXd::Constant(1, 1, se * se), 1);
  const auto map = fit_update_map(z, q, 2);
  const auto qa = apply_update_map(map, q, z, Eigen::VectorXd::Constant(1, zhat));
  const double sf2 = sf * sf, se2 = se * se;
  EXPECT_NEAR(qa.mean()(0), (se2 * m + sf2 * zhat) / (sf2 + se2), 1e-6);
  EXPECT_NEAR(covariance(qa, qa)(0, 0), sf2 * se2 / (sf2 + se2), 1e-6);
}

TEST(HalfNormalMoment, Examples) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(half_normal_moment(0, 1.0), 0.7978845608, 1e-10);
  EXPECT_NEAR(half_normal_moment(1, 1.0), 2.0 * c, 1e-15);
  EXPECT_NEAR(half_normal_moment(0, 2.0), 2.0 * c, 1e-15);
  EXPECT_NEAR(half_normal_moment(2, 1.0), 8.0 * c, 1e-14);
  EXPECT_THROW(half_normal_moment(-1, 1.0), std::invalid_argument);
}

TEST(FitUpdateMap, DegreeCapAndOverride) {
  Gen gen(51);
  const auto p = random_pair(gen, 1, 1);
  EXPECT_THROW(fit_update_map(p.z, p.q, 4), std::invalid_argument);
  FitOptions o;
  o.allow_high_degree = true;
  o.budget.max_order = 8;
  EXPECT_NO_THROW(fit_update_map(p.z, p.q, 4, o));
}

TEST(FitUpdateMap, WhiteningDoesNotChangeTheMap) {
  Gen gen(52);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = random_pair(gen, static_cast<std::size_t>(gen.integer(1, 2)));
    const auto raw = solve_update_map(build_hankel_system(p.z, p.q, 2));
    const auto fitted = fit_update_map(p.z, p.q, 2);
    EXPECT_LT(max_rel_block_diff(fitted, raw), 1e-7);
    FitOptions plain;
    plain.center = false;
    plain.whiten = false;
    EXPECT_LT(max_rel_block_diff(fit_update_map(p.z, p.q, 2, plain), raw), 1e-12);
  }
}

TEST(FitUpdateMap, DegenerateMeasurementFallsBackToMean) {
  Gen gen(53);
  const auto q = gen.pce(2, 1, 2);
  const auto z = PceVector::constant(Eigen::Vector2d(1.0, 2.0), 1);
  const auto map = fit_update_map(z, q, 2);
  EXPECT_LT(test::max_abs(map.block(0).values().col(0) - q.mean()), 1e-14);
  EXPECT_EQ(map.block_norm(1), 0.0);
}

TEST(UpdateMap, MonomialRoundTripAndEvaluation) {
  Gen gen(54);
  UpdateMap map(3, 2, 3);
  for (int k = 0; k <= 3; ++k)
    for (auto& v : map.block(k).values().reshaped()) v = gen.normal();
  const auto poly = map.to_monomials();
  const auto back = UpdateMap::from_monomials(poly, 3);
  EXPECT_LT(max_rel_block_diff(back, map), 1e-15);
  for (int p = 0; p < 5; ++p) {
    const Eigen::Vector3d z = gen.vector(3);
    EXPECT_LT(test::max_abs(map(z) - poly(z)), 1e-12);
  }
  EXPECT_THROW(UpdateMap::from_monomials(poly, 2), std::invalid_argument);
}

TEST(MonomialPolynomial, ComposeAffine) {
  Gen gen(55);
  MonomialPolynomial p(1, 2);
  p.add({}, Eigen::VectorXd::Constant(1, 0.5));
  p.add({0, 1}, Eigen::VectorXd::Constant(1, 2.0));
  p.add({1, 1, 1}, Eigen::VectorXd::Constant(1, -1.0));
  const Eigen::MatrixXd a = gen.matrix(2, 3);
  const Eigen::VectorXd b = gen.vector(2);
  const auto c = p.compose_affine(a, b);
  EXPECT_EQ(c.variables(), 3u);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd x = gen.vector(3);
    EXPECT_NEAR(c(x)(0), p(a * x + b)(0), 1e-11);
  }
}

// Randomized problems for the projection invariants: z nonlinear in q plus noise.
Pair nonlinear_pair(Gen& gen, std::size_t R) {
  Pair p;
  p.q = gen.pce(2, 2, 1);
  const auto y = gen.pce(R, 2, 2);
  p.z = add_measurement_noise(y, 0.1 * gen.spd(static_cast<Eigen::Index>(R)), 2);
  return p;
}

TEST(UpdateProperty, OrthogonalityResidual) {
  Gen gen(56);
  for (int trial = 0; trial < 6; ++trial) {
    const auto R = static_cast<std::size_t>(gen.integer(1, 2));
    const auto p = nonlinear_pair(gen, R);
    for (int n = 0; n <= 3; ++n) {
      const auto map = fit_update_map(p.z, p.q, n);
      const auto residual = p.q - expand_update_map(map, p.z);
      for (int l = 0; l <= n; ++l)
        EXPECT_LT(test::max_abs(cross_moment(residual, p.z, l).values()), 1e-8) << n << " " << l;
    }
  }
}

TEST(UpdateProperty, LossMonotoneAndPythagoras) {
  Gen gen(57);
  for (int trial = 0; trial < 6; ++trial) {
    const auto p = nonlinear_pair(gen, static_cast<std::size_t>(gen.integer(1, 2)));
    const double q2 = second_moment(p.q);
    double previous = q2;
    for (int n = 0; n <= 3; ++n) {
      const auto map = fit_update_map(p.z, p.q, n);
      const double loss = update_loss(map, p.q, p.z);
      EXPECT_NEAR(loss, map.diagnostics.loss, 1e-8);
      EXPECT_LE(loss, previous + 1e-10);
      previous = loss;
      const double psi2 = second_moment(expand_update_map(map, p.z));
      EXPECT_NEAR(psi2 + loss, q2, 1e-8);
    }
  }
}

TEST(UpdateProperty, HankelMatrixPositiveDefinite) {
  Gen gen(58);
  for (int trial = 0; trial < 10; ++trial) {
    const auto R = static_cast<std::size_t>(gen.integer(1, 3));
    const auto p = nonlinear_pair(gen, R);
    for (int n = 1; n <= (R == 3 ? 2 : 3); ++n) {
      const auto sys = build_hankel_system(p.z, p.q, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.matrix);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << R << " " << n;
    }
  }
}

TEST(UpdateProperty, UninformativeChannelLeavesPosteriorUnchanged) {
  Gen gen(59);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = gen.pce(2, 2, 2);
    const auto y = gen.pce(2, 2, 2);
    const Eigen::Matrix2d noise = 0.2 * gen.spd(2);
    const Eigen::Vector2d zhat = gen.vector(2);
    const auto base = lbu_update(q, y, noise, zhat);

    const auto y_aug = stack(y, PceVector::constant(Eigen::VectorXd::Zero(1), 1));
    Eigen::Matrix3d noise_aug = Eigen::Matrix3d::Zero();
    noise_aug.topLeftCorner(2, 2) = noise;
    noise_aug(2, 2) = 0.7;
    const auto aug = lbu_update(q, y_aug, noise_aug, Eigen::Vector3d(zhat(0), zhat(1), gen.normal()));
    EXPECT_LT(test::max_abs(aug.posterior.mean() - base.posterior.mean()), 1e-8);
    EXPECT_LT(test::max_abs(covariance(aug.posterior, aug.posterior) -
                            covariance(base.posterior, base.posterior)),
              1e-8);
  }
}

}  // namespace
}  // namespace polyfilter
