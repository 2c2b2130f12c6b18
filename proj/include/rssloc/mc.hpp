#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "rssloc/ellipse.hpp"
#include "rssloc/scenario.hpp"
#include "rssloc/unknown_params.hpp"

namespace rssloc {

/// One draw of the full observation vector: RSS samples for every
/// (source, anchor, sample) triple and prior position estimates for every
/// uncertain anchor.
struct ObservationDraw {
  // Flattened as [source j][anchor k][sample i]; per-source offsets below.
  std::vector<double> rss;
  std::vector<int> rss_offset;  // one entry per source
  // Flattened prior estimates; per-uncertain-anchor offsets below.
  std::vector<Vec2> prior_estimates;
  std::vector<int> prior_offset;
  std::uint64_t rng_seed{0};

  // Index of the first sample of (source j, anchor k); the source's
  // sample count strides the anchor dimension.
  int rss_index(int source_idx, int anchor_idx, int sample_count) const {
    return rss_offset[source_idx] + anchor_idx * sample_count;
  }
};

// Unknown-position nodes in parameter-vector order (sources first).
std::vector<NodeRef> parameter_nodes(const Scenario& sc);

// True positions of the unknown nodes, stacked in parameter order.
Eigen::VectorXd truth_parameter_vector(const Scenario& sc);

// Draws RSS samples around the model means and prior estimates around the
// true anchor positions. Deterministic in (scenario, seed); every
// (source, anchor) pair and every anchor prior uses its own derived stream.
ObservationDraw simulate(const Scenario& sc, std::uint64_t seed);

// Log-likelihood of theta given the draw, up to an additive constant.
// Evaluates the propagation formula as-is outside the d >= d0 region so
// estimator iterates can traverse it.
double log_likelihood(const Scenario& sc, const ObservationDraw& obs,
                      const Eigen::VectorXd& theta);

// Gradient of log_likelihood with respect to theta.
Eigen::VectorXd score(const Scenario& sc, const ObservationDraw& obs,
                      const Eigen::VectorXd& theta);

struct MlEstimate {
  Eigen::VectorXd theta_hat;
  bool converged{false};
  double objective{0.0};  // final negative log-likelihood (constant dropped)
  int iterations{0};
};

// Levenberg-Marquardt ascent of the log-likelihood with analytic Jacobian.
// Converged means gradient norm < 1e-6 * (1 + |objective|); failure to get
// there within max_iters is reported, not thrown.
MlEstimate ml_estimate(const Scenario& sc, const ObservationDraw& obs,
                       const Eigen::VectorXd& init, int max_iters = 500);

struct EmpiricalFim {
  Eigen::MatrixXd matrix;
  double rel_frobenius{0.0};  // distance to the analytic joint FIM
  int trials{0};
};

// Average of score outer products at the truth over independent trials,
// pairwise-reduced so the result is identical for any worker count.
EmpiricalFim empirical_fim(const Scenario& sc, int trials,
                           std::uint64_t seed);

// Same estimator for the [x, y, p_tx, gamma] parametrization of the basic
// model, for probing its zero-information direction.
Eigen::Matrix4d empirical_fim_power_gamma(std::span<const Anchor> anchors,
                                          const Vec2& source,
                                          const PropagationModel& model,
                                          int trials, std::uint64_t seed);

struct CoverageResult {
  double fraction{0.0};  // converged estimates inside the scaled error ellipse
  int converged_trials{0};
  int failed_trials{0};
  double mc_stderr{0.0};
};

// Fraction of ML estimates of one node falling inside its error ellipse
// scaled by confidence.k. Trials that fail to converge are excluded and
// counted; more than 5% of them throws InsufficientConvergenceError.
CoverageResult crlb_coverage(const Scenario& sc, const NodeRef& node,
                             int trials, const ConfidenceScale& confidence,
                             std::uint64_t seed);

// Max relative component error between the analytic score and central
// finite differences at `points` random parameter points.
double gradient_check_max_rel_error(const Scenario& sc, int points,
                                    std::uint64_t seed);

}  // namespace rssloc
