#pragma once

#include <span>
#include <vector>

#include "rssloc/ellipse.hpp"

namespace rssloc {

/// Log-distance path-loss model with log-normal shadowing.
/// p0 is the received power at the reference distance (p0 = p_tx - L0).
struct PropagationModel {
  double p0_dbm{0.0};
  double gamma{0.0};
  double d0_m{0.0};
  double sigma_db{0.0};

  void validate() const;
};

struct Anchor {
  Vec2 position;
  int id{0};
};

/// Distances and bearings from a source to a set of anchors, with the
/// model validity region (every distance >= d0) enforced at construction.
struct SourceGeometry {
  Vec2 source;
  std::vector<double> distances;
  std::vector<double> bearings;

  static SourceGeometry from(std::span<const Anchor> anchors, const Vec2& source,
                             const PropagationModel& model);
};

// Mean received power p0 - 10 gamma log10(d / d0), valid for d >= d0.
double mean_rss(const PropagationModel& model, double distance_m);

// Per-anchor information coefficient ((10 gamma) / (sigma ln10 d))^2.
double lambda_coeff(const PropagationModel& model, double distance_m);

// Bearing from the source to a point, measured from the x-axis.
double bearing_of(const Vec2& source, const Vec2& point);

// Rank-1 idempotent matrix q q^T with q = [cos phi, sin phi]^T.
InfoMatrix2 bearing_matrix(double phi);

struct SourceFimResult {
  InfoMatrix2 fim;
  // Set when the anchor bearings are (near-)collinear and the FIM is
  // numerically singular; such configurations cannot fix both coordinates.
  bool degenerate_geometry{false};
};

// FIM of a source at a known-anchor network: sum of lambda_k R(phi_k).
SourceFimResult source_fim(std::span<const Anchor> anchors, const Vec2& source,
                           const PropagationModel& model);

// Closed-form ellipse parameters of sum(lambda_k R(phi_k)) without forming
// the matrix.
EllipseParams source_ie_closed_form(std::span<const double> lambdas,
                                    std::span<const double> phis);

// Source at the center of n >= 3 anchors equidistantly placed on a circle of
// radius d: the information ellipse is the circle (n lambda / 2, n lambda / 2, 0)
// for any rotation phi1 of the ring.
EllipseParams circle_scenario_ie(int n, double d_m,
                                 const PropagationModel& model,
                                 double phi1_rad);

}  // namespace rssloc
