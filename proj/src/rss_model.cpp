#include "rssloc/rss_model.hpp"

#include <cmath>
#include <string>

namespace rssloc {

namespace {
constexpr double kDegenerateEigRatio = 1e-9;
}

void PropagationModel::validate() const {
  if (!(gamma > 0.0)) {
    throw Error("path-loss exponent gamma must be positive");
  }
  if (!(d0_m > 0.0)) {
    throw Error("reference distance d0 must be positive");
  }
  if (!(sigma_db > 0.0)) {
    throw Error("shadowing sigma must be positive");
  }
}

SourceGeometry SourceGeometry::from(std::span<const Anchor> anchors,
                                    const Vec2& source,
                                    const PropagationModel& model) {
  model.validate();
  SourceGeometry g;
  g.source = source;
  g.distances.reserve(anchors.size());
  g.bearings.reserve(anchors.size());
  std::string offenders;
  for (const Anchor& a : anchors) {
    const double d = (a.position - source).norm();
    if (d < model.d0_m) {
      if (!offenders.empty()) offenders += ", ";
      offenders += std::to_string(a.id);
    }
    g.distances.push_back(d);
    g.bearings.push_back(bearing_of(source, a.position));
  }
  if (!offenders.empty()) {
    throw BelowReferenceDistanceError(
        "anchor(s) " + offenders + " closer to the source than d0 = " +
        std::to_string(model.d0_m) + " m");
  }
  return g;
}

double mean_rss(const PropagationModel& model, double distance_m) {
  model.validate();
  if (distance_m < model.d0_m) {
    throw BelowReferenceDistanceError(
        "distance " + std::to_string(distance_m) +
        " m below reference distance " + std::to_string(model.d0_m) + " m");
  }
  return model.p0_dbm - 10.0 * model.gamma * std::log10(distance_m / model.d0_m);
}

double lambda_coeff(const PropagationModel& model, double distance_m) {
  model.validate();
  if (distance_m < model.d0_m) {
    throw BelowReferenceDistanceError(
        "distance " + std::to_string(distance_m) +
        " m below reference distance " + std::to_string(model.d0_m) + " m");
  }
  const double s = 10.0 * model.gamma /
                   (model.sigma_db * std::numbers::ln10 * distance_m);
  return s * s;
}

double bearing_of(const Vec2& source, const Vec2& point) {
  return std::atan2(point.y - source.y, point.x - source.x);
}

InfoMatrix2 bearing_matrix(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {c * c, c * s, s * s};
}

SourceFimResult source_fim(std::span<const Anchor> anchors, const Vec2& source,
                           const PropagationModel& model) {
  if (anchors.empty()) {
    throw Error("source FIM requires at least one anchor");
  }
  const SourceGeometry g = SourceGeometry::from(anchors, source, model);
  InfoMatrix2 f{};
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    f = f + bearing_matrix(g.bearings[i]).scaled(
                lambda_coeff(model, g.distances[i]));
  }
  const EllipseParams e = fim_to_ellipse(f);
  return {f, e.minor <= kDegenerateEigRatio * e.major};
}

EllipseParams source_ie_closed_form(std::span<const double> lambdas,
                                    std::span<const double> phis) {
  if (lambdas.empty() || lambdas.size() != phis.size()) {
    throw Error("lambda and bearing lists must be nonempty and equally sized");
  }
  double sum = 0.0;
  double c2 = 0.0;  // sum lambda_k cos 2phi_k
  double s2 = 0.0;  // sum lambda_k sin 2phi_k
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    sum += lambdas[i];
    c2 += lambdas[i] * std::cos(2.0 * phis[i]);
    s2 += lambdas[i] * std::sin(2.0 * phis[i]);
  }
  const double half_root = 0.5 * std::hypot(c2, s2);
  const double alpha =
      (c2 == 0.0 && s2 == 0.0) ? 0.0 : 0.5 * std::atan2(s2, c2);
  return canonical_ellipse(0.5 * sum + half_root,
                           std::max(0.5 * sum - half_root, 0.0), alpha);
}

EllipseParams circle_scenario_ie(int n, double d_m,
                                 const PropagationModel& model,
                                 double /*phi1_rad*/) {
  if (n < 3) {
    throw Error("circular geometry needs n >= 3 anchors");
  }
  // The pairwise double cosine sum collapses to -n/2 for equispaced bearings,
  // so the ellipse is an exact circle independent of the ring rotation.
  const double radius = 0.5 * n * lambda_coeff(model, d_m);
  return {radius, radius, 0.0};
}

}  // namespace rssloc
