#pragma once

#include "rssloc/ellipse.hpp"

namespace rssloc {

enum class CombineSign { Add, Subtract };
enum class CombineObjective { MaxInfo, MinInfo };

// Closed-form eigen-parameters of F(e1) + F(e2) or F(e1) - F(e2).
// Subtraction requires F(e1) - F(e2) positive definite; a result whose minor
// eigenvalue vanishes only to within rounding is returned with minor clamped
// to 0 (degenerate ellipses are meaningful), anything more negative throws
// IllConditionedSubtractionError.
EllipseParams combine(const EllipseParams& e1, const EllipseParams& e2,
                      CombineSign sign);

// Position error bound of the combined ellipse, evaluated directly from the
// eigenvalues and relative orientation of the operands.
double combined_peb(const EllipseParams& e1, const EllipseParams& e2,
                    CombineSign sign);

// Orientation of a second ellipse with eigenvalues (mu2, eta2) that
// extremizes the combined information (equivalently the PEB) against e1:
//   Add      + MaxInfo -> angle1 + pi/2      Add      + MinInfo -> angle1
//   Subtract + MaxInfo -> angle1             Subtract + MinInfo -> angle1 + pi/2
// For Subtract, the subtraction must be valid at the returned angle.
double extremal_angle(const EllipseParams& e1, double mu2, double eta2,
                      CombineSign sign, CombineObjective objective);

}  // namespace rssloc
