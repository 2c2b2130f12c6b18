#include "rssloc/ellipse.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace rssloc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPsdRelTol = 1e-12;
constexpr double kDetRelTol = 1e-14;
constexpr double kCircleRelTol = 1e-12;
}  // namespace

void InfoMatrix2::validate_psd() const {
  const double scale = std::max({std::abs(f11), std::abs(f22), std::abs(f12)});
  const double diag_tol = kPsdRelTol * scale;
  if (f11 < -diag_tol || f22 < -diag_tol) {
    throw NotPsdError("information matrix has a negative diagonal entry");
  }
  const double dmax = std::max(f11, f22);
  if (det() < -kPsdRelTol * dmax * dmax) {
    throw NotPsdError("information matrix has a negative determinant");
  }
}

bool InfoMatrix2::is_psd() const {
  try {
    validate_psd();
  } catch (const NotPsdError&) {
    return false;
  }
  return true;
}

ConfidenceScale ConfidenceScale::from_k(double k) {
  if (!(k > 0.0)) {
    throw Error("confidence scale k must be positive");
  }
  return {k, 1.0 - std::exp(-0.5 * k)};
}

ConfidenceScale ConfidenceScale::from_probability(double p_e) {
  if (!(p_e > 0.0 && p_e < 1.0)) {
    throw Error("confidence probability must lie in (0, 1)");
  }
  return {-2.0 * std::log(1.0 - p_e), p_e};
}

double normalize_axis_angle(double a) {
  double r = std::fmod(a, kPi);
  if (r <= -kPi / 2.0) {
    r += kPi;
  } else if (r > kPi / 2.0) {
    r -= kPi;
  }
  return r;
}

EllipseParams canonical_ellipse(double mu, double eta, double alpha) {
  if (mu < eta) {
    std::swap(mu, eta);
    alpha += kPi / 2.0;
  }
  if (mu - eta <= kCircleRelTol * std::abs(mu)) {
    return {mu, eta, 0.0};
  }
  return {mu, eta, normalize_axis_angle(alpha)};
}

EllipseParams fim_to_ellipse(const InfoMatrix2& f) {
  f.validate_psd();
  const double half_trace = 0.5 * (f.f11 + f.f22);
  const double half_disc = 0.5 * std::hypot(f.f11 - f.f22, 2.0 * f.f12);
  double mu = half_trace + half_disc;
  double eta = half_trace - half_disc;
  if (eta < 0.0) {
    if (eta >= -kPsdRelTol * std::max(mu, 0.0)) {
      eta = 0.0;
    } else {
      throw NotPsdError("information matrix has eigenvalue " +
                        std::to_string(eta));
    }
  }
  mu = std::max(mu, 0.0);
  if (mu - eta <= kCircleRelTol * mu) {
    return {mu, eta, 0.0};
  }
  // atan2 resolves the quadrant where the printed half-angle arctangent
  // formula is ambiguous (and f11 == f22 would divide by zero).
  const double alpha = 0.5 * std::atan2(2.0 * f.f12, f.f11 - f.f22);
  return {mu, eta, alpha};
}

InfoMatrix2 ellipse_to_fim(const EllipseParams& e) {
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  return {e.major * c * c + e.minor * s * s, (e.major - e.minor) * c * s,
          e.major * s * s + e.minor * c * c};
}

InfoMatrix2 crlb_from_fim(const InfoMatrix2& f) {
  const double dmax = std::max(f.f11, f.f22);
  const double d = f.det();
  if (!(d > kDetRelTol * dmax * dmax)) {
    throw SingularFimError("FIM is singular; position is not localizable");
  }
  return {f.f22 / d, -f.f12 / d, f.f11 / d};
}

EllipseParams error_ellipse(const InfoMatrix2& f) {
  const EllipseParams ie = fim_to_ellipse(f);
  if (!(ie.minor > 0.0)) {
    throw SingularFimError("FIM is singular; error ellipse undefined");
  }
  return canonical_ellipse(1.0 / ie.minor, 1.0 / ie.major,
                           ie.angle + kPi / 2.0);
}

double eccentricity(const EllipseParams& e) {
  if (!(e.major > 0.0)) {
    throw DegenerateInputError("eccentricity undefined for zero ellipse");
  }
  const double ratio = std::clamp(e.minor / e.major, 0.0, 1.0);
  return std::sqrt(1.0 - ratio);
}

double area(const EllipseParams& e) {
  return kPi * std::sqrt(std::max(e.major * e.minor, 0.0));
}

double peb(const EllipseParams& e) {
  if (!(e.major > 0.0) || !(e.minor > 0.0)) {
    throw SingularFimError("PEB undefined for a degenerate ellipse");
  }
  return std::sqrt(1.0 / e.major + 1.0 / e.minor);
}

bool ellipse_contains(const EllipseParams& e, const Vec2& point, double k) {
  if (!(e.major > 0.0) || !(e.minor > 0.0)) {
    throw SingularFimError("membership undefined for a degenerate ellipse");
  }
  if (!(k > 0.0)) {
    throw Error("ellipse scale k must be positive");
  }
  const double c = std::cos(e.angle);
  const double s = std::sin(e.angle);
  const double along = c * point.x + s * point.y;
  const double across = -s * point.x + c * point.y;
  return along * along / e.major + across * across / e.minor <= k;
}

}  // namespace rssloc
