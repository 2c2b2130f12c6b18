#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "rssloc/rng.hpp"
#include "rssloc/unknown_params.hpp"

using namespace rssloc;
constexpr double kPi = std::numbers::pi;

namespace {

const PropagationModel kModel{0.0, 3.5, 1.0, 5.0};

std::vector<Anchor> ring(int n, double d, double phi1, Vec2 center = {0, 0}) {
  std::vector<Anchor> anchors;
  for (int i = 0; i < n; ++i) {
    const double phi = phi1 + i * 2.0 * kPi / n;
    anchors.push_back(
        {{center.x + d * std::cos(phi), center.y + d * std::sin(phi)}, i + 1});
  }
  return anchors;
}

std::vector<Anchor> random_geometry(RngStream& rng, int n) {
  std::vector<Anchor> anchors;
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform(2.0, 12.0);
    const double a = rng.uniform(-kPi, kPi);
    anchors.push_back({{r * std::cos(a), r * std::sin(a)}, i + 1});
  }
  return anchors;
}

// Monte-Carlo Fisher information for the 3-parameter problems: the score is
// sum_k e_k u_k / sigma^2 with e_k ~ N(0, sigma^2), so the average outer
// product converges to the analytic matrix.
Eigen::Matrix3d mc_fim3(const std::vector<Eigen::Vector3d>& us, double sigma,
                        int trials, std::uint64_t seed) {
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (int t = 0; t < trials; ++t) {
    RngStream rng(derive_stream_key(seed, t));
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    for (const auto& u : us) {
      s += rng.normal(0.0, sigma) * u / (sigma * sigma);
    }
    sum += s * s.transpose();
  }
  return sum / trials;
}

std::vector<Eigen::Vector3d> score_dirs_power(const std::vector<Anchor>& a,
                                              const Vec2& src,
                                              const PropagationModel& m) {
  std::vector<Eigen::Vector3d> us;
  const SourceGeometry g = SourceGeometry::from(a, src, m);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double sl =
        m.sigma_db * std::sqrt(lambda_coeff(m, g.distances[k]));
    us.push_back({sl * std::cos(g.bearings[k]), sl * std::sin(g.bearings[k]),
                  1.0});
  }
  return us;
}

std::vector<Eigen::Vector3d> score_dirs_gamma(const std::vector<Anchor>& a,
                                              const Vec2& src,
                                              const PropagationModel& m) {
  std::vector<Eigen::Vector3d> us;
  const SourceGeometry g = SourceGeometry::from(a, src, m);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double sl =
        m.sigma_db * std::sqrt(lambda_coeff(m, g.distances[k]));
    us.push_back({sl * std::cos(g.bearings[k]), sl * std::sin(g.bearings[k]),
                  -10.0 * std::log10(g.distances[k] / m.d0_m)});
  }
  return us;
}

}  // namespace

TEST_CASE("unknown-power FIM is block diagonal at a symmetric center") {
  const auto anchors = ring(8, 5.0, 0.3);
  const Fim3 f = fim_unknown_power(anchors, {0.0, 0.0}, kModel);
  CHECK(std::abs(f.m(0, 2)) < 1e-12);
  CHECK(std::abs(f.m(1, 2)) < 1e-12);
  CHECK(f.m(2, 2) ==
        doctest::Approx(8.0 / (kModel.sigma_db * kModel.sigma_db)));
}

TEST_CASE("unknown-power FIM ignores the transmit power value") {
  const auto anchors = ring(5, 6.0, 0.1);
  PropagationModel shifted = kModel;
  shifted.p0_dbm = 20.0;
  const Fim3 a = fim_unknown_power(anchors, {1.0, -0.5}, kModel);
  const Fim3 b = fim_unknown_power(anchors, {1.0, -0.5}, shifted);
  CHECK((a.m - b.m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unknown-power FIM matches the Monte-Carlo score oracle") {
  RngStream rng(99);
  const auto anchors = random_geometry(rng, 10);
  const Vec2 src{0.5, -0.3};
  const Fim3 analytic = fim_unknown_power(anchors, src, kModel);
  const Eigen::Matrix3d mc =
      mc_fim3(score_dirs_power(anchors, src, kModel), kModel.sigma_db, 100000,
              1234);
  CHECK((mc - analytic.m).norm() / analytic.m.norm() < 0.03);
}

TEST_CASE("unknown-gamma FIM matches the Monte-Carlo score oracle") {
  RngStream rng(101);
  const auto anchors = random_geometry(rng, 10);
  const Vec2 src{-0.4, 0.2};
  const Fim3 analytic = fim_unknown_gamma(anchors, src, kModel);
  const Eigen::Matrix3d mc =
      mc_fim3(score_dirs_gamma(anchors, src, kModel), kModel.sigma_db, 100000,
              4321);
  CHECK((mc - analytic.m).norm() / analytic.m.norm() < 0.03);
}

TEST_CASE("unknown-gamma FIM: reference-distance anchors carry no gamma row") {
  const auto anchors = ring(4, 1.0, 0.0);  // every distance equals d0
  const Fim3 f = fim_unknown_gamma(anchors, {0.0, 0.0}, kModel);
  CHECK(f.m.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.m.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unknown-gamma cross terms are negative for a first-quadrant cluster") {
  std::vector<Anchor> anchors{{{4.0, 3.0}, 1}, {{5.0, 2.0}, 2},
                              {{3.0, 5.0}, 3}};
  const Fim3 f = fim_unknown_gamma(anchors, {0.0, 0.0}, kModel);
  CHECK(f.m(0, 2) < 0.0);
  CHECK(f.m(1, 2) < 0.0);
}

TEST_CASE("equivalent FIM under unknown power: symmetric center loses nothing") {
  const auto anchors = ring(10, 5.0, 0.0);
  const EquivalentFim eq =
      equivalent_fim_unknown_power(anchors, {0.0, 0.0}, kModel);
  const double lambda = lambda_coeff(kModel, 5.0);
  CHECK(eq.loss.magnitude < 1e-12 * lambda);
  CHECK(oracle::rel_err(eq.fim.f11, 5.0 * lambda) < 1e-9);
  CHECK(oracle::rel_err(eq.fim.f22, 5.0 * lambda) < 1e-9);
}

TEST_CASE("equivalent FIMs equal the Schur complement of the 3x3") {
  RngStream rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto anchors = random_geometry(rng, 3 + trial % 6);
    const Vec2 src{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    for (int which = 0; which < 2; ++which) {
      const Fim3 f3 = which == 0 ? fim_unknown_power(anchors, src, kModel)
                                 : fim_unknown_gamma(anchors, src, kModel);
      EquivalentFim eq;
      try {
        eq = which == 0 ? equivalent_fim_unknown_power(anchors, src, kModel)
                        : equivalent_fim_unknown_gamma(anchors, src, kModel);
      } catch (const SingularFimError&) {
        continue;
      }
      const Eigen::Matrix2d pos = f3.m.topLeftCorner<2, 2>();
      const Eigen::Vector2d cross = f3.cross();
      const Eigen::Matrix2d schur =
          pos - cross * cross.transpose() / f3.nuisance();
      CHECK(oracle::matrix_rel_err(eq.fim, oracle::from_eigen(schur)) < 1e-10);
      // the loss is rank one and PSD
      const InfoMatrix2 loss = eq.loss.matrix();
      CHECK(std::abs(loss.det()) <=
            1e-12 * std::max(1.0, loss.trace() * loss.trace()));
      CHECK(loss.trace() >= 0.0);
      // information ordering: psi - eq equals that same rank-1 loss
      const InfoMatrix2 psi = f3.position_block();
      const InfoMatrix2 diff = psi - eq.fim;
      CHECK(oracle::matrix_rel_err(diff, loss) < 1e-9);
    }
  }
}

TEST_CASE("two symmetric anchors cannot digest an unknown power") {
  std::vector<Anchor> two{{{5.0, 0.0}, 1}, {{0.0, 5.0}, 2}};
  CHECK_THROWS_AS(
      (void)equivalent_fim_unknown_power(two, {0.0, 0.0}, kModel),
      SingularFimError);
  CHECK_THROWS(
      (void)equivalent_fim_unknown_power({two.data(), 1}, {0.0, 0.0}, kModel));
}

TEST_CASE("equidistant anchors align both loss directions") {
  // anchors on a circle around the source, asymmetric bearings
  const Vec2 src{2.0, -1.0};
  std::vector<Anchor> anchors;
  const double d = 4.0;
  int id = 1;
  for (double phi : {0.1, 0.7, 1.4, 2.2}) {
    anchors.push_back(
        {{src.x + d * std::cos(phi), src.y + d * std::sin(phi)}, id++});
  }
  const EquivalentFim p = equivalent_fim_unknown_power(anchors, src, kModel);
  const EquivalentFim g = equivalent_fim_unknown_gamma(anchors, src, kModel);
  CHECK(std::abs(normalize_axis_angle(p.loss.angle - g.loss.angle)) < 1e-9);
  CHECK(oracle::rel_err(g.loss.magnitude, p.loss.magnitude) < 1e-9);
}

TEST_CASE("nuisance cost ordering in the off-center ring") {
  // ring of 10 anchors with radius 10 and the source at (0, 5)
  const auto anchors = ring(10, 10.0, 0.0);
  const Vec2 src{0.0, 5.0};
  const EquivalentFim p = equivalent_fim_unknown_power(anchors, src, kModel);
  const EquivalentFim g = equivalent_fim_unknown_gamma(anchors, src, kModel);

  // position-only bound: a source inside the ring pays almost nothing for
  // an unknown power (the sqrt(lambda)-weighted bearing sum nearly
  // cancels), so the exponent is the costlier nuisance there
  const double peb_power = peb(fim_to_ellipse(p.fim));
  const double peb_gamma = peb(fim_to_ellipse(g.fim));
  CHECK(p.loss.magnitude < g.loss.magnitude);
  CHECK(peb_power <= peb_gamma);

  // total parameter uncertainty: the power variance dominates, which is
  // the ordering the joint 3x3 bound exposes
  const Eigen::Matrix3d crlb_p =
      fim_unknown_power(anchors, src, kModel).m.inverse();
  const Eigen::Matrix3d crlb_g =
      fim_unknown_gamma(anchors, src, kModel).m.inverse();
  CHECK(std::sqrt(crlb_p.trace()) >= std::sqrt(crlb_g.trace()));
}

TEST_CASE("joint power-gamma FIM is singular for equidistant geometries") {
  RngStream rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + trial;
    const double d = rng.uniform(2.0, 15.0);
    const auto anchors = ring(n, d, rng.uniform(-kPi, kPi));
    CHECK(joint_power_gamma_singularity(anchors, {0.0, 0.0}, kModel) < 1e-10);
  }
}

TEST_CASE("joint power-gamma FIM is singular for any three anchors") {
  RngStream rng(56);
  for (int trial = 0; trial < 10; ++trial) {
    const auto anchors = random_geometry(rng, 3);
    CHECK(joint_power_gamma_singularity(anchors, {0.0, 0.0}, kModel) < 1e-10);
  }
}

TEST_CASE("removing the gamma block restores identifiability") {
  const auto anchors = ring(10, 5.0, 0.0);
  const Fim3 f3 = fim_unknown_power(anchors, {0.0, 0.0}, kModel);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(f3.m);
  const double ratio = svd.singularValues()(2) / svd.singularValues()(0);
  CHECK(ratio > 1e-6);
}

TEST_CASE("the 4x4 zero-information direction is structural") {
  // the score of every draw is orthogonal to the null direction, so the
  // analytic matrix is singular at machine precision
  const auto anchors = ring(6, 5.0, 0.2);
  const Eigen::Matrix4d analytic =
      fim_unknown_power_gamma(anchors, {0.0, 0.0}, kModel);
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(analytic);
  CHECK(svd.singularValues()(3) / svd.singularValues()(0) < 1e-12);
}
