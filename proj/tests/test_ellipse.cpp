#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rssloc/ellipse.hpp"
#include "rssloc/rss_model.hpp"

using namespace rssloc;
constexpr double kPi = std::numbers::pi;

namespace {
const PropagationModel kModel{0.0, 3.5, 1.0, 5.0};
}

TEST_CASE("fim_to_ellipse on the identity") {
  const EllipseParams e = fim_to_ellipse({1.0, 0.0, 1.0});
  CHECK(e.major == doctest::Approx(1.0));
  CHECK(e.minor == doctest::Approx(1.0));
  CHECK(e.angle == 0.0);  // canonical circle
}

TEST_CASE("fim_to_ellipse on the equilateral three-anchor circle") {
  const double lambda = lambda_coeff(kModel, 3.0);
  const double v = 1.5 * lambda;
  const EllipseParams e = fim_to_ellipse({v, 0.0, v});
  CHECK(oracle::rel_err(e.major, v) < 1e-12);
  CHECK(oracle::rel_err(e.minor, v) < 1e-12);
  CHECK(e.angle == 0.0);
}

TEST_CASE("fim_to_ellipse matches a generic eigensolver on random PSD input") {
  RngStream rng(42);
  for (int i = 0; i < 500; ++i) {
    const InfoMatrix2 f = oracle::random_psd(rng, 0.01, 10.0);
    const EllipseParams e = fim_to_ellipse(f);
    const oracle::EigenPair ref = oracle::eigendecompose(f);
    CHECK(oracle::rel_err(e.major, ref.major) < 1e-10);
    CHECK(std::abs(e.minor - ref.minor) < 1e-10 * ref.major);
    if (ref.major - ref.minor > 1e-6 * ref.major) {
      const double diff = std::abs(normalize_axis_angle(e.angle - ref.angle));
      CHECK(diff < 1e-10);
    }
  }
}

TEST_CASE("fim_to_ellipse rejects non-PSD input") {
  CHECK_THROWS_AS((void)fim_to_ellipse({1.0, 2.0, 1.0}), NotPsdError);
  CHECK_THROWS_AS((void)fim_to_ellipse({-1.0, 0.0, 1.0}), NotPsdError);
}

TEST_CASE("fim_to_ellipse clamps roundoff-negative eigenvalues") {
  // det is -2e-15: negative, but inside the PSD tolerance band
  const InfoMatrix2 f{1.0, 1.0 + 1e-15, 1.0};
  CHECK(f.det() < 0.0);
  const EllipseParams e = fim_to_ellipse(f);
  CHECK(e.minor == 0.0);
}

TEST_CASE("ellipse_to_fim degenerate bearing form") {
  for (double phi : {0.0, 0.3, kPi / 4, -1.2}) {
    const InfoMatrix2 f = ellipse_to_fim({1.0, 0.0, phi});
    const double c = std::cos(phi), s = std::sin(phi);
    CHECK(f.f11 == doctest::Approx(c * c));
    CHECK(f.f12 == doctest::Approx(c * s));
    CHECK(f.f22 == doctest::Approx(s * s));
  }
}

TEST_CASE("ellipse_to_fim isotropic and oblique cases") {
  const InfoMatrix2 iso = ellipse_to_fim({2.5, 2.5, 0.0});
  CHECK(iso.f11 == doctest::Approx(2.5));
  CHECK(iso.f12 == doctest::Approx(0.0));
  CHECK(iso.f22 == doctest::Approx(2.5));

  const InfoMatrix2 f = ellipse_to_fim({2.0, 1.0, kPi / 4});
  CHECK(f.f11 == doctest::Approx(1.5));
  CHECK(f.f12 == doctest::Approx(0.5));
  CHECK(f.f22 == doctest::Approx(1.5));
}

TEST_CASE("round trip ellipse -> matrix -> ellipse") {
  RngStream rng(7);
  for (int i = 0; i < 500; ++i) {
    const double minor = rng.uniform(0.0, 4.0);
    const double major = minor + rng.uniform(1e-6, 5.0);
    const double angle = rng.uniform(-kPi / 2 + 1e-9, kPi / 2);
    const EllipseParams e{major, minor, angle};
    const EllipseParams back = fim_to_ellipse(ellipse_to_fim(e));
    CHECK(oracle::rel_err(back.major, major) < 1e-10);
    CHECK(std::abs(back.minor - minor) < 1e-10 * major);
    CHECK(std::abs(normalize_axis_angle(back.angle - angle)) < 1e-8);
  }
}

TEST_CASE("trace and determinant are preserved by the decomposition") {
  RngStream rng(3);
  for (int i = 0; i < 500; ++i) {
    const InfoMatrix2 f = oracle::random_psd(rng, 0.1, 8.0);
    const EllipseParams e = fim_to_ellipse(f);
    CHECK(oracle::rel_err(e.major + e.minor, f.trace()) < 1e-12);
    CHECK(std::abs(e.major * e.minor - f.det()) <
          1e-12 * std::max(1.0, std::abs(f.trace() * f.trace())));
  }
}

TEST_CASE("crlb_from_fim inverts diagonal matrices") {
  const InfoMatrix2 inv = crlb_from_fim({2.0, 0.0, 4.0});
  CHECK(inv.f11 == doctest::Approx(0.5));
  CHECK(inv.f12 == doctest::Approx(0.0));
  CHECK(inv.f22 == doctest::Approx(0.25));
}

TEST_CASE("crlb of the circle scenario is isotropic 2/(n lambda)") {
  const int n = 8;
  const double lambda = lambda_coeff(kModel, 5.0);
  const InfoMatrix2 f{n * lambda / 2, 0.0, n * lambda / 2};
  const InfoMatrix2 crlb = crlb_from_fim(f);
  CHECK(oracle::rel_err(crlb.f11, 2.0 / (n * lambda)) < 1e-12);
  CHECK(oracle::rel_err(crlb.f22, 2.0 / (n * lambda)) < 1e-12);
}

TEST_CASE("crlb_from_fim equals the adjugate-determinant oracle") {
  RngStream rng(7);
  for (int i = 0; i < 200; ++i) {
    const InfoMatrix2 f = oracle::random_psd(rng, 0.05, 10.0);
    const InfoMatrix2 inv = crlb_from_fim(f);
    const Eigen::Matrix2d ref = oracle::to_eigen(f).inverse();
    CHECK(oracle::matrix_rel_err(inv, oracle::from_eigen(ref)) < 1e-12);
  }
}

TEST_CASE("crlb_from_fim equals the rotate-and-scale form") {
  RngStream rng(19);
  Eigen::Matrix2d rot90;
  rot90 << 0.0, -1.0, 1.0, 0.0;
  for (int i = 0; i < 1000; ++i) {
    const InfoMatrix2 f = oracle::random_psd(rng, 0.05, 10.0);
    const InfoMatrix2 inv = crlb_from_fim(f);
    const Eigen::Matrix2d alt =
        rot90 * oracle::to_eigen(f) * rot90.transpose() / f.det();
    CHECK(oracle::matrix_rel_err(inv, oracle::from_eigen(alt)) < 1e-12);
  }
}

TEST_CASE("crlb_from_fim rejects singular matrices") {
  CHECK_THROWS_AS((void)crlb_from_fim({1.0, 1.0, 1.0}), SingularFimError);
  CHECK_THROWS_AS((void)crlb_from_fim({0.0, 0.0, 0.0}), SingularFimError);
}

TEST_CASE("error ellipse duality: reciprocal axes, perpendicular angle") {
  RngStream rng(11);
  for (int i = 0; i < 200; ++i) {
    const InfoMatrix2 f = oracle::random_psd(rng, 0.05, 10.0);
    const EllipseParams ie = fim_to_ellipse(f);
    const EllipseParams ee = fim_to_ellipse(crlb_from_fim(f));
    CHECK(oracle::rel_err(ee.major, 1.0 / ie.minor) < 1e-10);
    CHECK(oracle::rel_err(ee.minor, 1.0 / ie.major) < 1e-10);
    if (ie.major - ie.minor > 1e-6 * ie.major) {
      const double diff =
          std::abs(normalize_axis_angle(ee.angle - (ie.angle + kPi / 2)));
      CHECK(diff < 1e-9);
    }
    const EllipseParams direct = error_ellipse(f);
    CHECK(oracle::rel_err(direct.major, ee.major) < 1e-12);
  }
}

TEST_CASE("eccentricity") {
  CHECK(eccentricity({1.0, 1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(eccentricity({1.0, 0.0, 0.7}) == doctest::Approx(1.0));
  // the aligned three-anchor geometry: xi = sqrt(sqrt(3) - 1)
  const double lambda = lambda_coeff(kModel, 3.0);
  const EllipseParams e{(3.0 + std::sqrt(3.0)) * lambda / 2,
                        (3.0 - std::sqrt(3.0)) * lambda / 2, 0.4};
  const double want = std::sqrt(std::sqrt(3.0) - 1.0);
  CHECK(oracle::rel_err(eccentricity(e), want) < 1e-12);
  CHECK_THROWS_AS((void)eccentricity({0.0, 0.0, 0.0}), DegenerateInputError);
}

TEST_CASE("area") {
  const double lambda = lambda_coeff(kModel, 3.0);
  CHECK(oracle::rel_err(area({1.5 * lambda, 1.5 * lambda, 0.0}),
                        1.5 * kPi * lambda) < 1e-12);
  const EllipseParams geo1{(3.0 + std::sqrt(3.0)) * lambda / 2,
                           (3.0 - std::sqrt(3.0)) * lambda / 2, 0.0};
  CHECK(oracle::rel_err(area(geo1), kPi * lambda * std::sqrt(6.0) / 2) <
        1e-12);
  CHECK(area({1.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("peb") {
  CHECK(peb({1.0, 1.0, 0.0}) == doctest::Approx(std::sqrt(2.0)));
  // circle closed form: sqrt(4 / (n lambda))
  const int n = 6;
  const double lambda = lambda_coeff(kModel, 5.0);
  CHECK(oracle::rel_err(peb({n * lambda / 2, n * lambda / 2, 0.0}),
                        std::sqrt(4.0 / (n * lambda))) < 1e-12);
  // invariant under the orientation alone
  CHECK(peb({2.0, 1.0, 0.3}) == peb({2.0, 1.0, -1.2}));
  CHECK_THROWS_AS((void)peb({1.0, 0.0, 0.0}), SingularFimError);
}

TEST_CASE("ellipse membership") {
  CHECK(ellipse_contains({3.0, 1.0, 0.7}, {0.0, 0.0}, 0.5));
  const double k = 2.0;
  CHECK_FALSE(
      ellipse_contains({1.0, 1.0, 0.0}, {std::sqrt(k) * 1.001, 0.0}, k));
  CHECK(ellipse_contains({1.0, 1.0, 0.0}, {std::sqrt(k) * 0.999, 0.0}, k));
  CHECK_THROWS_AS(
      (void)ellipse_contains({1.0, 0.0, 0.0}, {0.0, 0.0}, 1.0),
      SingularFimError);
}

TEST_CASE("ellipse membership agrees with the direct quadratic form") {
  RngStream rng(23);
  const EllipseParams e{4.0, 1.0, kPi / 6};
  const InfoMatrix2 inv = crlb_from_fim(ellipse_to_fim(e));
  int inside = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const bool direct = inv.quad(p) <= 1.0;
    CHECK(ellipse_contains(e, p, 1.0) == direct);
    inside += direct;
  }
  CHECK(inside > 0);
  CHECK(inside < 1000);
}

TEST_CASE("confidence scale ties k and P_e together") {
  const ConfidenceScale a = ConfidenceScale::from_k(4.0);
  CHECK(a.p_e == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  const ConfidenceScale b = ConfidenceScale::from_probability(a.p_e);
  CHECK(oracle::rel_err(b.k, 4.0) < 1e-12);
  CHECK_THROWS(ConfidenceScale::from_k(0.0));
  CHECK_THROWS(ConfidenceScale::from_probability(1.0));
}

TEST_CASE("axis angle normalization") {
  CHECK(normalize_axis_angle(0.0) == 0.0);
  CHECK(normalize_axis_angle(kPi) == doctest::Approx(0.0));
  CHECK(normalize_axis_angle(kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(normalize_axis_angle(-kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(normalize_axis_angle(2.0) == doctest::Approx(2.0 - kPi));
}
