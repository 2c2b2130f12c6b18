#include "rssloc/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rssloc/joint_fim.hpp"
#include "rssloc/parallel.hpp"
#include "rssloc/rng.hpp"

namespace rssloc {

namespace {

constexpr double kGradientTolFactor = 1e-6;

double raw_mean(const PropagationModel& m, double d) {
  return m.p0_dbm - 10.0 * m.gamma * std::log10(std::max(d, 1e-12) / m.d0_m);
}

double raw_sqrt_lambda(const PropagationModel& m, double d) {
  return 10.0 * m.gamma /
         (m.sigma_db * std::numbers::ln10 * std::max(d, 1e-12));
}

// Lower Cholesky factor of a PD covariance and its inverse (the residual
// whitener).
struct PriorWhitener {
  Eigen::Matrix2d chol;
  Eigen::Matrix2d inv_chol;
};

PriorWhitener whitener(const Cov2& k) {
  const double l11 = std::sqrt(k.c11);
  const double l21 = k.c12 / l11;
  const double l22 = std::sqrt(k.c22 - l21 * l21);
  PriorWhitener w;
  w.chol << l11, 0.0, l21, l22;
  w.inv_chol << 1.0 / l11, 0.0, -l21 / (l11 * l22), 1.0 / l22;
  return w;
}

// Static description of the estimation problem: which positions come from
// theta, sample counts, prior whiteners.
struct Problem {
  const Scenario* sc;
  int n{0};
  int dim{0};
  std::vector<int> source_param;  // per source: theta offset or -1 if known
  std::vector<int> anchor_param;  // per uncertain anchor: theta offset
  std::vector<PriorWhitener> priors;

  std::vector<Vec2> source_positions(const Eigen::VectorXd& theta) const {
    std::vector<Vec2> out(sc->sources.size());
    for (std::size_t j = 0; j < sc->sources.size(); ++j) {
      if (source_param[j] >= 0) {
        out[j] = {theta(source_param[j]), theta(source_param[j] + 1)};
      } else {
        out[j] = sc->sources[j].position;
      }
    }
    return out;
  }

  std::vector<Vec2> anchor_positions(const Eigen::VectorXd& theta) const {
    std::vector<Vec2> out = sc->all_anchor_positions();
    const int v = static_cast<int>(sc->certain_anchors.size());
    for (std::size_t u = 0; u < sc->uncertain_anchors.size(); ++u) {
      out[v + u] = {theta(anchor_param[u]), theta(anchor_param[u] + 1)};
    }
    return out;
  }
};

Problem make_problem(const Scenario& sc) {
  Problem p;
  p.sc = &sc;
  p.n = sc.anchor_count();
  int off = 0;
  p.source_param.assign(sc.sources.size(), -1);
  for (std::size_t j = 0; j < sc.sources.size(); ++j) {
    if (!sc.sources[j].known_position) {
      p.source_param[j] = off;
      off += 2;
    }
  }
  p.anchor_param.resize(sc.uncertain_anchors.size());
  for (std::size_t u = 0; u < sc.uncertain_anchors.size(); ++u) {
    p.anchor_param[u] = off;
    off += 2;
    p.priors.push_back(whitener(sc.uncertain_anchors[u].prior_cov));
  }
  p.dim = off;
  return p;
}

int residual_count(const Scenario& sc) {
  int rows = 0;
  for (const Source& s : sc.sources) {
    rows += sc.anchor_count() * s.sample_count;
  }
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    rows += 2 * a.prior_count;
  }
  return rows;
}

// Whitened residuals and their Jacobian; 0.5 * ||res||^2 is the negative
// log-likelihood up to the dropped constant.
void residuals(const Problem& p, const ObservationDraw& obs,
               const Eigen::VectorXd& theta, Eigen::VectorXd& res,
               Eigen::MatrixXd* jac) {
  const Scenario& sc = *p.sc;
  const double sigma = sc.model.sigma_db;
  const int v = static_cast<int>(sc.certain_anchors.size());
  res.resize(residual_count(sc));
  if (jac) {
    jac->resize(res.size(), p.dim);
    jac->setZero();
  }
  const std::vector<Vec2> src_pos = p.source_positions(theta);
  const std::vector<Vec2> anc_pos = p.anchor_positions(theta);

  int row = 0;
  for (std::size_t j = 0; j < sc.sources.size(); ++j) {
    const int t = sc.sources[j].sample_count;
    for (int k = 0; k < p.n; ++k) {
      const Vec2 diff = anc_pos[k] - src_pos[j];
      const double d = diff.norm();
      const double delta = raw_mean(sc.model, d);
      const double sl = raw_sqrt_lambda(sc.model, d);
      const double qx = d > 1e-12 ? diff.x / d : 1.0;
      const double qy = d > 1e-12 ? diff.y / d : 0.0;
      const int base = obs.rss_index(static_cast<int>(j), k, t);
      for (int i = 0; i < t; ++i) {
        res(row) = (delta - obs.rss[base + i]) / sigma;
        if (jac) {
          if (p.source_param[j] >= 0) {
            (*jac)(row, p.source_param[j]) = sl * qx;
            (*jac)(row, p.source_param[j] + 1) = sl * qy;
          }
          if (k >= v) {
            const int col = p.anchor_param[k - v];
            (*jac)(row, col) = -sl * qx;
            (*jac)(row, col + 1) = -sl * qy;
          }
        }
        ++row;
      }
    }
  }
  for (std::size_t u = 0; u < sc.uncertain_anchors.size(); ++u) {
    const UncertainAnchor& a = sc.uncertain_anchors[u];
    const Eigen::Matrix2d& w = p.priors[u].inv_chol;
    const Eigen::Vector2d rk(theta(p.anchor_param[u]),
                             theta(p.anchor_param[u] + 1));
    for (int z = 0; z < a.prior_count; ++z) {
      const Vec2 est = obs.prior_estimates[obs.prior_offset[u] + z];
      const Eigen::Vector2d r = w * (rk - Eigen::Vector2d(est.x, est.y));
      res(row) = r(0);
      res(row + 1) = r(1);
      if (jac) {
        jac->block<2, 2>(row, p.anchor_param[u]) = w;
      }
      row += 2;
    }
  }
}

}  // namespace

std::vector<NodeRef> parameter_nodes(const Scenario& sc) {
  std::vector<NodeRef> nodes;
  for (const Source& s : sc.sources) {
    if (!s.known_position) {
      nodes.push_back({NodeRef::Kind::Source, s.id});
    }
  }
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    nodes.push_back({NodeRef::Kind::Anchor, a.id});
  }
  return nodes;
}

Eigen::VectorXd truth_parameter_vector(const Scenario& sc) {
  const Problem p = make_problem(sc);
  Eigen::VectorXd theta(p.dim);
  for (std::size_t j = 0; j < sc.sources.size(); ++j) {
    if (p.source_param[j] >= 0) {
      theta(p.source_param[j]) = sc.sources[j].position.x;
      theta(p.source_param[j] + 1) = sc.sources[j].position.y;
    }
  }
  for (std::size_t u = 0; u < sc.uncertain_anchors.size(); ++u) {
    theta(p.anchor_param[u]) = sc.uncertain_anchors[u].position.x;
    theta(p.anchor_param[u] + 1) = sc.uncertain_anchors[u].position.y;
  }
  return theta;
}

ObservationDraw simulate(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  ObservationDraw obs;
  obs.rng_seed = seed;
  const int n = sc.anchor_count();
  const std::vector<Vec2> anchors = sc.all_anchor_positions();

  int total = 0;
  for (const Source& s : sc.sources) {
    obs.rss_offset.push_back(total);
    total += n * s.sample_count;
  }
  obs.rss.resize(total);
  for (std::size_t j = 0; j < sc.sources.size(); ++j) {
    const Source& s = sc.sources[j];
    for (int k = 0; k < n; ++k) {
      RngStream stream = RngStream::derive(
          seed, static_cast<std::uint64_t>(j) * n + static_cast<std::uint64_t>(k));
      const double d = (anchors[k] - s.position).norm();
      const double mean = mean_rss(sc.model, d);
      const int base = obs.rss_index(static_cast<int>(j), k, s.sample_count);
      for (int i = 0; i < s.sample_count; ++i) {
        obs.rss[base + i] = stream.normal(mean, sc.model.sigma_db);
      }
    }
  }

  const std::uint64_t prior_base =
      static_cast<std::uint64_t>(sc.sources.size()) * n;
  int prior_total = 0;
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    obs.prior_offset.push_back(prior_total);
    prior_total += a.prior_count;
  }
  obs.prior_estimates.resize(prior_total);
  for (std::size_t u = 0; u < sc.uncertain_anchors.size(); ++u) {
    const UncertainAnchor& a = sc.uncertain_anchors[u];
    RngStream stream = RngStream::derive(seed, prior_base + u);
    const PriorWhitener w = whitener(a.prior_cov);
    for (int z = 0; z < a.prior_count; ++z) {
      const Eigen::Vector2d noise(stream.normal(), stream.normal());
      const Eigen::Vector2d draw =
          Eigen::Vector2d(a.position.x, a.position.y) + w.chol * noise;
      obs.prior_estimates[obs.prior_offset[u] + z] = {draw(0), draw(1)};
    }
  }
  return obs;
}

double log_likelihood(const Scenario& sc, const ObservationDraw& obs,
                      const Eigen::VectorXd& theta) {
  const Problem p = make_problem(sc);
  Eigen::VectorXd res;
  residuals(p, obs, theta, res, nullptr);
  return -0.5 * res.squaredNorm();
}

Eigen::VectorXd score(const Scenario& sc, const ObservationDraw& obs,
                      const Eigen::VectorXd& theta) {
  const Problem p = make_problem(sc);
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  residuals(p, obs, theta, res, &jac);
  return -jac.transpose() * res;
}

MlEstimate ml_estimate(const Scenario& sc, const ObservationDraw& obs,
                       const Eigen::VectorXd& init, int max_iters) {
  const Problem p = make_problem(sc);
  if (init.size() != p.dim) {
    throw Error("initial parameter vector has length " +
                std::to_string(init.size()) + ", expected " +
                std::to_string(p.dim));
  }
  MlEstimate out;
  out.theta_hat = init;

  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  residuals(p, obs, out.theta_hat, res, &jac);
  double obj = 0.5 * res.squaredNorm();
  Eigen::VectorXd grad = jac.transpose() * res;
  Eigen::MatrixXd jtj = jac.transpose() * jac;

  double nu = 1e-3 * std::max(jtj.diagonal().maxCoeff(), 1e-12);
  const auto converged = [&] {
    return grad.norm() < kGradientTolFactor * (1.0 + std::abs(obj));
  };

  int iter = 0;
  while (iter < max_iters && !converged()) {
    ++iter;
    const Eigen::MatrixXd lhs =
        jtj + nu * Eigen::MatrixXd::Identity(p.dim, p.dim);
    const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
    const double predicted = 0.5 * step.dot(nu * step - grad);
    const Eigen::VectorXd candidate = out.theta_hat + step;
    Eigen::VectorXd res_new;
    residuals(p, obs, candidate, res_new, nullptr);
    const double obj_new = 0.5 * res_new.squaredNorm();
    const double rho =
        predicted > 0.0 ? (obj - obj_new) / predicted : -1.0;
    if (rho > 0.0 && obj_new < obj) {
      out.theta_hat = candidate;
      obj = obj_new;
      residuals(p, obs, out.theta_hat, res, &jac);
      grad = jac.transpose() * res;
      jtj = jac.transpose() * jac;
      nu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
    } else {
      nu *= 2.0;
      if (nu > 1e30) break;
    }
  }
  out.converged = converged();
  out.objective = obj;
  out.iterations = iter;
  return out;
}

namespace {

// Fixed-shape pairwise reduction over [lo, hi): immune to execution order.
void reduce_outer(const std::vector<Eigen::VectorXd>& scores, int lo, int hi,
                  Eigen::MatrixXd& out) {
  if (hi - lo == 1) {
    out = scores[lo] * scores[lo].transpose();
    return;
  }
  const int mid = lo + (hi - lo) / 2;
  Eigen::MatrixXd right;
  reduce_outer(scores, lo, mid, out);
  reduce_outer(scores, mid, hi, right);
  out += right;
}

}  // namespace

EmpiricalFim empirical_fim(const Scenario& sc, int trials,
                           std::uint64_t seed) {
  if (trials < 1000) {
    throw Error("empirical FIM needs at least 1000 trials");
  }
  const Eigen::VectorXd truth = truth_parameter_vector(sc);
  std::vector<Eigen::VectorXd> scores(trials);
  parallel_for(
      trials,
      [&](int trial) {
        const ObservationDraw obs =
            simulate(sc, derive_stream_key(seed, trial));
        scores[trial] = score(sc, obs, truth);
      },
      worker_count());

  EmpiricalFim out;
  reduce_outer(scores, 0, trials, out.matrix);
  out.matrix /= static_cast<double>(trials);
  out.trials = trials;
  const BlockFim analytic = assemble_block_fim(sc);
  out.rel_frobenius = (out.matrix - analytic.matrix()).norm() /
                      analytic.matrix().norm();
  return out;
}

Eigen::Matrix4d empirical_fim_power_gamma(std::span<const Anchor> anchors,
                                          const Vec2& source,
                                          const PropagationModel& model,
                                          int trials, std::uint64_t seed) {
  const SourceGeometry g = SourceGeometry::from(anchors, source, model);
  const int n = static_cast<int>(anchors.size());
  std::vector<Eigen::Vector4d> us(n);
  for (int k = 0; k < n; ++k) {
    const double sl = raw_sqrt_lambda(model, g.distances[k]);
    us[k] << sl * std::cos(g.bearings[k]), sl * std::sin(g.bearings[k]),
        1.0 / model.sigma_db,
        -10.0 * std::log10(g.distances[k] / model.d0_m) / model.sigma_db;
  }
  std::vector<Eigen::Vector4d> scores(trials);
  parallel_for(
      trials,
      [&](int trial) {
        RngStream stream(derive_stream_key(seed, trial));
        Eigen::Vector4d s = Eigen::Vector4d::Zero();
        for (int k = 0; k < n; ++k) {
          // e = p - delta in units of sigma
          s += stream.normal() * us[k];
        }
        scores[trial] = s;
      },
      worker_count());
  Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
  // trials here are cheap; a simple fixed-order sum keeps this readable
  for (const Eigen::Vector4d& s : scores) {
    sum += s * s.transpose();
  }
  return sum / static_cast<double>(trials);
}

CoverageResult crlb_coverage(const Scenario& sc, const NodeRef& node,
                             int trials, const ConfidenceScale& confidence,
                             std::uint64_t seed) {
  InfoMatrix2 net;
  if (node.kind == NodeRef::Kind::Source) {
    net = source_marginal_fim(sc, node.id).net;
  } else {
    net = anchor_marginal_fim(sc, node.id).net;
  }
  const EllipseParams ee = error_ellipse(net);

  const std::vector<NodeRef> nodes = parameter_nodes(sc);
  int node_offset = -1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == node) {
      node_offset = 2 * static_cast<int>(i);
      break;
    }
  }
  if (node_offset < 0) {
    throw UnknownNodeIdError("node " + node.to_string() +
                             " has no unknown position");
  }

  const Eigen::VectorXd truth = truth_parameter_vector(sc);
  constexpr double kInitSigma = 0.5;  // meters around the truth

  struct TrialOutcome {
    bool converged;
    bool inside;
  };
  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(
      trials,
      [&](int trial) {
        const ObservationDraw obs =
            simulate(sc, derive_stream_key(seed, 2ULL * trial));
        RngStream init_stream(derive_stream_key(seed, 2ULL * trial + 1));
        Eigen::VectorXd init = truth;
        for (int i = 0; i < init.size(); ++i) {
          init(i) += init_stream.normal(0.0, kInitSigma);
        }
        const MlEstimate est = ml_estimate(sc, obs, init);
        TrialOutcome o{est.converged, false};
        if (est.converged) {
          const Vec2 err{est.theta_hat(node_offset) - truth(node_offset),
                         est.theta_hat(node_offset + 1) - truth(node_offset + 1)};
          o.inside = ellipse_contains(ee, err, confidence.k);
        }
        outcomes[trial] = o;
      },
      worker_count());

  CoverageResult out;
  int inside = 0;
  for (const TrialOutcome& o : outcomes) {
    if (!o.converged) {
      ++out.failed_trials;
    } else {
      ++out.converged_trials;
      if (o.inside) ++inside;
    }
  }
  if (out.failed_trials > 0.05 * trials) {
    throw InsufficientConvergenceError(
        std::to_string(out.failed_trials) + " of " + std::to_string(trials) +
        " trials failed to converge");
  }
  out.fraction = static_cast<double>(inside) / out.converged_trials;
  out.mc_stderr = std::sqrt(confidence.p_e * (1.0 - confidence.p_e) /
                            out.converged_trials);
  return out;
}

double gradient_check_max_rel_error(const Scenario& sc, int points,
                                    std::uint64_t seed) {
  const Problem p = make_problem(sc);
  const ObservationDraw obs = simulate(sc, splitmix64(seed ^ 0x5eedULL));
  const Eigen::VectorXd truth = truth_parameter_vector(sc);
  double worst = 0.0;
  for (int pt = 0; pt < points; ++pt) {
    RngStream stream = RngStream::derive(seed, pt);
    Eigen::VectorXd theta = truth;
    for (int i = 0; i < theta.size(); ++i) {
      theta(i) += stream.uniform(-1.0, 1.0);
    }
    const Eigen::VectorXd analytic = score(sc, obs, theta);
    Eigen::VectorXd fd(p.dim);
    for (int i = 0; i < p.dim; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(theta(i)));
      Eigen::VectorXd lo = theta, hi = theta;
      lo(i) -= h;
      hi(i) += h;
      fd(i) = (log_likelihood(sc, obs, hi) - log_likelihood(sc, obs, lo)) /
              (2.0 * h);
    }
    const double scale = 1e-8 * (1.0 + fd.cwiseAbs().maxCoeff());
    for (int i = 0; i < p.dim; ++i) {
      const double denom =
          std::max({std::abs(analytic(i)), std::abs(fd(i)), scale});
      worst = std::max(worst, std::abs(analytic(i) - fd(i)) / denom);
    }
  }
  return worst;
}

}  // namespace rssloc
