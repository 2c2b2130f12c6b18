#include "rssloc/unknown_params.hpp"

#include <cmath>

namespace rssloc {

namespace {

constexpr double kDetRelTol = 1e-14;

struct Terms {
  std::vector<double> lambdas;
  std::vector<double> phis;
  std::vector<double> logs;  // log10(d_k / d0)
};

Terms per_anchor_terms(std::span<const Anchor> anchors, const Vec2& source,
                       const PropagationModel& model) {
  const SourceGeometry g = SourceGeometry::from(anchors, source, model);
  Terms t;
  t.lambdas.reserve(anchors.size());
  t.logs.reserve(anchors.size());
  for (double d : g.distances) {
    t.lambdas.push_back(lambda_coeff(model, d));
    t.logs.push_back(std::log10(d / model.d0_m));
  }
  t.phis = g.bearings;
  return t;
}

InfoMatrix2 position_fim(const Terms& t) {
  InfoMatrix2 f{};
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    f = f + bearing_matrix(t.phis[i]).scaled(t.lambdas[i]);
  }
  return f;
}

EquivalentFim schur_onto_position(const InfoMatrix2& psi,
                                  const Eigen::Vector2d& cross,
                                  double nuisance, const char* what) {
  if (!(nuisance > 0.0)) {
    throw SingularFimError(std::string("no information about the ") + what);
  }
  const Eigen::Matrix2d drop = cross * cross.transpose() / nuisance;
  const InfoMatrix2 eq = {psi.f11 - drop(0, 0), psi.f12 - drop(0, 1),
                          psi.f22 - drop(1, 1)};
  const double dmax = std::max(eq.f11, eq.f22);
  if (!(eq.det() > kDetRelTol * dmax * dmax)) {
    throw SingularFimError(
        std::string("source not localizable with unknown ") + what);
  }
  const double mag = drop.trace();
  const double ang =
      mag > 0.0 ? normalize_axis_angle(std::atan2(cross.y(), cross.x())) : 0.0;
  return {eq, {mag, ang}};
}

}  // namespace

Fim3 fim_unknown_power(std::span<const Anchor> anchors, const Vec2& source,
                       const PropagationModel& model) {
  const Terms t = per_anchor_terms(anchors, source, model);
  Fim3 f;
  const InfoMatrix2 psi = position_fim(t);
  f.m(0, 0) = psi.f11;
  f.m(0, 1) = f.m(1, 0) = psi.f12;
  f.m(1, 1) = psi.f22;
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    const double r = std::sqrt(t.lambdas[i]) / model.sigma_db;
    f.m(0, 2) += r * std::cos(t.phis[i]);
    f.m(1, 2) += r * std::sin(t.phis[i]);
  }
  f.m(2, 0) = f.m(0, 2);
  f.m(2, 1) = f.m(1, 2);
  f.m(2, 2) = static_cast<double>(anchors.size()) /
              (model.sigma_db * model.sigma_db);
  return f;
}

EquivalentFim equivalent_fim_unknown_power(std::span<const Anchor> anchors,
                                           const Vec2& source,
                                           const PropagationModel& model) {
  if (anchors.size() < 2) {
    throw Error("equivalent FIM needs at least two anchors");
  }
  const Terms t = per_anchor_terms(anchors, source, model);
  // Loss direction vector: sum sqrt(lambda_k) q_k; the Schur complement of
  // the 3x3 drops (1/n) v v^T from the position block.
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    const double r = std::sqrt(t.lambdas[i]);
    v.x() += r * std::cos(t.phis[i]);
    v.y() += r * std::sin(t.phis[i]);
  }
  return schur_onto_position(position_fim(t), v,
                             static_cast<double>(anchors.size()),
                             "transmit power");
}

Fim3 fim_unknown_gamma(std::span<const Anchor> anchors, const Vec2& source,
                       const PropagationModel& model) {
  const Terms t = per_anchor_terms(anchors, source, model);
  Fim3 f;
  const InfoMatrix2 psi = position_fim(t);
  f.m(0, 0) = psi.f11;
  f.m(0, 1) = f.m(1, 0) = psi.f12;
  f.m(1, 1) = psi.f22;
  const double s2 = model.sigma_db * model.sigma_db;
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    const double r =
        10.0 * std::sqrt(t.lambdas[i]) / model.sigma_db * t.logs[i];
    f.m(0, 2) -= r * std::cos(t.phis[i]);
    f.m(1, 2) -= r * std::sin(t.phis[i]);
    f.m(2, 2) += 100.0 * t.logs[i] * t.logs[i] / s2;
  }
  f.m(2, 0) = f.m(0, 2);
  f.m(2, 1) = f.m(1, 2);
  return f;
}

EquivalentFim equivalent_fim_unknown_gamma(std::span<const Anchor> anchors,
                                           const Vec2& source,
                                           const PropagationModel& model) {
  if (anchors.size() < 2) {
    throw Error("equivalent FIM needs at least two anchors");
  }
  const Terms t = per_anchor_terms(anchors, source, model);
  Eigen::Vector2d w = Eigen::Vector2d::Zero();
  double log_sq = 0.0;
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    const double r = std::sqrt(t.lambdas[i]) * t.logs[i];
    w.x() += r * std::cos(t.phis[i]);
    w.y() += r * std::sin(t.phis[i]);
    log_sq += t.logs[i] * t.logs[i];
  }
  // The 10/sigma factors of the cross terms cancel against the nuisance
  // entry, leaving w w^T / sum(log^2).
  return schur_onto_position(position_fim(t), w, log_sq, "path-loss exponent");
}

Eigen::Matrix4d fim_unknown_power_gamma(std::span<const Anchor> anchors,
                                        const Vec2& source,
                                        const PropagationModel& model) {
  const Terms t = per_anchor_terms(anchors, source, model);
  Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < t.lambdas.size(); ++i) {
    const double r = std::sqrt(t.lambdas[i]) * model.sigma_db;
    Eigen::Vector4d u;
    u << r * std::cos(t.phis[i]), r * std::sin(t.phis[i]), 1.0,
        -10.0 * t.logs[i];
    f += u * u.transpose() / (model.sigma_db * model.sigma_db);
  }
  return f;
}

double joint_power_gamma_singularity(std::span<const Anchor> anchors,
                                     const Vec2& source,
                                     const PropagationModel& model) {
  const Eigen::Matrix4d f = fim_unknown_power_gamma(anchors, source, model);
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(f);
  const auto& sv = svd.singularValues();
  return sv(3) / sv(0);
}

}  // namespace rssloc
