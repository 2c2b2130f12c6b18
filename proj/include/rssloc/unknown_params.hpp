#pragma once

#include <Eigen/Dense>
#include <span>

#include "rssloc/rss_model.hpp"

namespace rssloc {

/// Symmetric 3x3 FIM ordered [x_tx, y_tx, nuisance], where the nuisance is
/// either the transmit power or the path-loss exponent.
struct Fim3 {
  Eigen::Matrix3d m{Eigen::Matrix3d::Zero()};

  InfoMatrix2 position_block() const { return {m(0, 0), m(0, 1), m(1, 1)}; }
  Eigen::Vector2d cross() const { return {m(0, 2), m(1, 2)}; }
  double nuisance() const { return m(2, 2); }
};

/// Rank-1 information loss, geometrically a degenerate ellipse
/// (magnitude, 0, angle). Rank-1-ness is structural.
struct LossEllipse {
  double magnitude{0.0};
  double angle{0.0};

  InfoMatrix2 matrix() const { return bearing_matrix(angle).scaled(magnitude); }
};

struct EquivalentFim {
  InfoMatrix2 fim;    // position information left after the joint estimation
  LossEllipse loss;   // what the unknown nuisance parameter removed
};

// FIM for [x_tx, y_tx, p_tx]. Independent of the actual transmit power.
Fim3 fim_unknown_power(std::span<const Anchor> anchors, const Vec2& source,
                       const PropagationModel& model);

// Schur complement of fim_unknown_power onto the position block, and the
// rank-1 loss it subtracts from the known-model FIM.
EquivalentFim equivalent_fim_unknown_power(std::span<const Anchor> anchors,
                                           const Vec2& source,
                                           const PropagationModel& model);

// FIM for [x_tx, y_tx, gamma]. All anchors at the reference distance leave
// the gamma row zero (singular, but representable).
Fim3 fim_unknown_gamma(std::span<const Anchor> anchors, const Vec2& source,
                       const PropagationModel& model);

EquivalentFim equivalent_fim_unknown_gamma(std::span<const Anchor> anchors,
                                           const Vec2& source,
                                           const PropagationModel& model);

// FIM for [x_tx, y_tx, p_tx, gamma] jointly.
Eigen::Matrix4d fim_unknown_power_gamma(std::span<const Anchor> anchors,
                                        const Vec2& source,
                                        const PropagationModel& model);

// Singular-value ratio sigma_min / sigma_max of the 4x4 joint-nuisance FIM.
// Vanishes when position, power and exponent cannot be separated (all
// anchors equidistant from the source, or fewer than 4 anchors).
double joint_power_gamma_singularity(std::span<const Anchor> anchors,
                                     const Vec2& source,
                                     const PropagationModel& model);

}  // namespace rssloc
