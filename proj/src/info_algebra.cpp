#include "rssloc/info_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rssloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampRelTol = 1e-12;

struct CombinedRaw {
  double mu;
  double eta;
  double alpha;  // not yet canonicalized
};

// Works in the frame of e1: the combined matrix has
//   trace     = mu1 + eta1 +- (mu2 + eta2)
//   f11 - f22 = (mu1 - eta1) +- (mu2 - eta2) cos 2d
//   2 f12     = +- (mu2 - eta2) sin 2d
// with d = angle2 - angle1, which yields the eigenvalues and the angle
// offset in closed form.
CombinedRaw combine_raw(const EllipseParams& e1, const EllipseParams& e2,
                        CombineSign sign) {
  const double s = sign == CombineSign::Add ? 1.0 : -1.0;
  const double d = e2.angle - e1.angle;
  const double half_trace = 0.5 * (e1.major + e1.minor + s * (e2.major + e2.minor));
  const double den = (e1.major - e1.minor) + s * (e2.major - e2.minor) * std::cos(2.0 * d);
  const double num = s * (e2.major - e2.minor) * std::sin(2.0 * d);
  const double half_root = 0.5 * std::hypot(den, num);
  double alpha = e1.angle;
  if (num != 0.0 || den != 0.0) {
    alpha += 0.5 * std::atan2(num, den);
  }
  return {half_trace + half_root, half_trace - half_root, alpha};
}

}  // namespace

EllipseParams combine(const EllipseParams& e1, const EllipseParams& e2,
                      CombineSign sign) {
  CombinedRaw r = combine_raw(e1, e2, sign);
  if (sign == CombineSign::Subtract) {
    const double scale = std::max({e1.major, e2.major, std::abs(r.mu)});
    const double tol = kClampRelTol * scale;
    if (r.eta < -tol || r.mu < -tol) {
      throw IllConditionedSubtractionError(
          "difference of information matrices is not positive definite");
    }
    r.eta = std::max(r.eta, 0.0);
    r.mu = std::max(r.mu, 0.0);
  }
  return canonical_ellipse(r.mu, r.eta, r.alpha);
}

double combined_peb(const EllipseParams& e1, const EllipseParams& e2,
                    CombineSign sign) {
  const EllipseParams c = combine(e1, e2, sign);
  if (!(c.minor > 0.0)) {
    throw SingularFimError("combined ellipse is degenerate; PEB undefined");
  }
  const double s = sign == CombineSign::Add ? 1.0 : -1.0;
  const double d = e2.angle - e1.angle;
  const double sin2 = std::sin(d) * std::sin(d);
  const double cos2 = std::cos(d) * std::cos(d);
  const double trace = e1.major + e1.minor + s * (e2.major + e2.minor);
  const double det = e1.major * e1.minor + e2.major * e2.minor +
                     s * (e1.major * e2.major + e1.minor * e2.minor) * sin2 +
                     s * (e1.major * e2.minor + e2.major * e1.minor) * cos2;
  return std::sqrt(trace / det);
}

double extremal_angle(const EllipseParams& e1, double mu2, double eta2,
                      CombineSign sign, CombineObjective objective) {
  if (!(mu2 >= eta2) || !(eta2 >= 0.0)) {
    throw Error("update eigenvalues must satisfy mu2 >= eta2 >= 0");
  }
  const bool orthogonal =
      (sign == CombineSign::Add) == (objective == CombineObjective::MaxInfo);
  const double angle =
      normalize_axis_angle(orthogonal ? e1.angle + kPi / 2.0 : e1.angle);
  if (sign == CombineSign::Subtract) {
    combine(e1, {mu2, eta2, angle}, sign);  // throws if invalid there
  }
  return angle;
}

}  // namespace rssloc
