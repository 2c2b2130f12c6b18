#pragma once

#include <cmath>

#include "rssloc/errors.hpp"

namespace rssloc {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  double norm() const { return std::hypot(x, y); }
};

/// Symmetric positive-semidefinite 2x2 information matrix (units 1/m^2).
/// Symmetry is structural: only one off-diagonal element is stored.
struct InfoMatrix2 {
  double f11{0.0};
  double f12{0.0};
  double f22{0.0};

  double trace() const { return f11 + f22; }
  double det() const { return f11 * f22 - f12 * f12; }

  InfoMatrix2 operator+(const InfoMatrix2& o) const {
    return {f11 + o.f11, f12 + o.f12, f22 + o.f22};
  }
  InfoMatrix2 operator-(const InfoMatrix2& o) const {
    return {f11 - o.f11, f12 - o.f12, f22 - o.f22};
  }
  InfoMatrix2 scaled(double s) const { return {s * f11, s * f12, s * f22}; }

  static InfoMatrix2 identity(double s = 1.0) { return {s, 0.0, s}; }

  // Quadratic form v^T F v.
  double quad(const Vec2& v) const {
    return f11 * v.x * v.x + 2.0 * f12 * v.x * v.y + f22 * v.y * v.y;
  }

  // Checks the PSD invariant: f11 >= 0, f22 >= 0 and
  // det >= -1e-12 * max(f11, f22)^2. Throws NotPsdError on violation.
  void validate_psd() const;

  bool is_psd() const;
};

/// Eigen-pair of an information matrix: major >= minor >= 0 and the
/// orientation of the major axis, canonicalized to (-pi/2, pi/2].
/// A circle (major == minor) carries angle 0.
struct EllipseParams {
  double major{0.0};
  double minor{0.0};
  double angle{0.0};
};

/// Ellipse scale factor k and the matching confidence probability,
/// tied together by k = -2 ln(1 - p_e).
struct ConfidenceScale {
  double k{1.0};
  double p_e{0.0};

  static ConfidenceScale from_k(double k);
  static ConfidenceScale from_probability(double p_e);
};

// Wraps an axis orientation (defined modulo pi) into (-pi/2, pi/2].
double normalize_axis_angle(double a);

// Canonicalizes raw (mu, eta, alpha): orders eigenvalues, wraps the angle,
// and zeroes the angle for circles (within 1e-12 relative).
EllipseParams canonical_ellipse(double mu, double eta, double alpha);

// Eigendecomposition of a PSD 2x2 matrix in closed form.
// Small negative eigenvalues down to -1e-12 * major are clamped to zero;
// anything worse throws NotPsdError.
EllipseParams fim_to_ellipse(const InfoMatrix2& f);

// Reassembles F = Theta(angle) diag(major, minor) Theta(angle)^T.
InfoMatrix2 ellipse_to_fim(const EllipseParams& e);

// Inverse of a strictly positive definite matrix
// (det > 1e-14 * max(f11,f22)^2, else SingularFimError).
InfoMatrix2 crlb_from_fim(const InfoMatrix2& f);

// Error ellipse of a FIM: EE(1/minor, 1/major, angle + pi/2).
EllipseParams error_ellipse(const InfoMatrix2& f);

// sqrt(1 - minor/major), in [0, 1]. Throws DegenerateInputError if major == 0.
double eccentricity(const EllipseParams& e);

// pi * sqrt(major * minor).
double area(const EllipseParams& e);

// Position error bound sqrt(1/major + 1/minor) in meters; independent of
// the orientation. Throws SingularFimError for degenerate ellipses.
double peb(const EllipseParams& e);

// Membership test x^T F^{-1} x <= k for the matrix F of the ellipse.
bool ellipse_contains(const EllipseParams& e, const Vec2& point, double k);

}  // namespace rssloc
