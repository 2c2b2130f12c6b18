#include "rssloc/joint_fim.hpp"

#include <algorithm>
#include <cmath>

namespace rssloc {

namespace {

Eigen::Matrix2d to_eigen(const InfoMatrix2& f) {
  Eigen::Matrix2d m;
  m << f.f11, f.f12, f.f12, f.f22;
  return m;
}

InfoMatrix2 from_eigen(const Eigen::Matrix2d& m) {
  return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
}

Eigen::Matrix2d invert_pd_2x2(const Eigen::Matrix2d& m, const char* what) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (!(det > 0.0) || !(m(0, 0) > 0.0)) {
    throw SingularBlockError(std::string(what) + " block is singular");
  }
  Eigen::Matrix2d inv;
  inv << m(1, 1) / det, -m(0, 1) / det, -m(1, 0) / det, m(0, 0) / det;
  return inv;
}

// Per-(source, anchor) coefficients; anchors ordered certain first.
struct ScenarioTerms {
  std::vector<std::vector<double>> lambda;  // [source][anchor]
  std::vector<std::vector<double>> phi;
  std::vector<int> unknown_source_idx;      // indices into sc.sources
};

ScenarioTerms scenario_terms(const Scenario& sc) {
  sc.validate();
  const std::vector<Vec2> anchors = sc.all_anchor_positions();
  ScenarioTerms t;
  t.lambda.resize(sc.sources.size());
  t.phi.resize(sc.sources.size());
  for (std::size_t j = 0; j < sc.sources.size(); ++j) {
    const Vec2 src = sc.sources[j].position;
    t.lambda[j].reserve(anchors.size());
    t.phi[j].reserve(anchors.size());
    for (const Vec2& a : anchors) {
      const double d = (a - src).norm();
      t.lambda[j].push_back(lambda_coeff(sc.model, d));
      t.phi[j].push_back(bearing_of(src, a));
    }
    if (!sc.sources[j].known_position) {
      t.unknown_source_idx.push_back(static_cast<int>(j));
    }
  }
  return t;
}

Eigen::Matrix2d psi_matrix(const ScenarioTerms& t, int source_idx) {
  Eigen::Matrix2d psi = Eigen::Matrix2d::Zero();
  for (std::size_t k = 0; k < t.lambda[source_idx].size(); ++k) {
    psi += t.lambda[source_idx][k] *
           to_eigen(bearing_matrix(t.phi[source_idx][k]));
  }
  return psi;
}

// B C^{-1} B^T with a positive-definiteness check on C.
Eigen::MatrixXd eliminate(const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                          const char* what) {
  if (c.rows() == 0) {
    return Eigen::MatrixXd::Zero(b.rows(), b.rows());
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    throw SingularBlockError(std::string(what) +
                             " block is not positive definite");
  }
  const Eigen::MatrixXd result = b * llt.solve(b.transpose());
  if (!result.allFinite()) {
    throw SingularBlockError(std::string(what) + " block is singular");
  }
  return result;
}

// Removes the 2x2 block at `off` from a symmetric matrix, returning the
// coupling row B (2 x (m-2)) and the remainder C ((m-2) x (m-2)).
void split_at(const Eigen::MatrixXd& m, int off, Eigen::MatrixXd& b,
              Eigen::MatrixXd& c) {
  const int n = static_cast<int>(m.rows());
  const int rest = n - 2;
  b.resize(2, rest);
  c.resize(rest, rest);
  std::vector<int> keep;
  keep.reserve(rest);
  for (int i = 0; i < n; ++i) {
    if (i < off || i >= off + 2) keep.push_back(i);
  }
  for (int i = 0; i < rest; ++i) {
    b(0, i) = m(off, keep[i]);
    b(1, i) = m(off + 1, keep[i]);
    for (int j = 0; j < rest; ++j) {
      c(i, j) = m(keep[i], keep[j]);
    }
  }
}

}  // namespace

BlockFim::BlockFim(Eigen::MatrixXd matrix, std::vector<int> source_ids,
                   std::vector<int> anchor_ids)
    : matrix_(std::move(matrix)),
      source_ids_(std::move(source_ids)),
      anchor_ids_(std::move(anchor_ids)) {}

int BlockFim::offset_of(const NodeRef& node) const {
  if (node.kind == NodeRef::Kind::Source) {
    for (std::size_t i = 0; i < source_ids_.size(); ++i) {
      if (source_ids_[i] == node.id) return 2 * static_cast<int>(i);
    }
  } else {
    for (std::size_t i = 0; i < anchor_ids_.size(); ++i) {
      if (anchor_ids_[i] == node.id) {
        return 2 * static_cast<int>(source_ids_.size() + i);
      }
    }
  }
  throw UnknownNodeIdError("node " + node.to_string() +
                           " has no block in the joint FIM");
}

Eigen::MatrixXd BlockFim::xi() const {
  const int s2 = 2 * source_blocks();
  return matrix_.topLeftCorner(s2, s2);
}

Eigen::MatrixXd BlockFim::gamma() const {
  const int s2 = 2 * source_blocks();
  return matrix_.topRightCorner(s2, 2 * anchor_blocks());
}

Eigen::MatrixXd BlockFim::omega() const {
  const int u2 = 2 * anchor_blocks();
  return matrix_.bottomRightCorner(u2, u2);
}

BlockFim assemble_block_fim(const Scenario& sc) {
  const ScenarioTerms t = scenario_terms(sc);
  const int s_unknown = static_cast<int>(t.unknown_source_idx.size());
  const int u = static_cast<int>(sc.uncertain_anchors.size());
  if (s_unknown == 0 && u == 0) {
    throw EmptyParameterVectorError(
        "scenario has no unknown-position node to estimate");
  }
  const int dim = 2 * (s_unknown + u);
  const int v = static_cast<int>(sc.certain_anchors.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(dim, dim);

  std::vector<int> source_ids;
  for (int block = 0; block < s_unknown; ++block) {
    const int j = t.unknown_source_idx[block];
    const double tj = sc.sources[j].sample_count;
    source_ids.push_back(sc.sources[j].id);
    f.block<2, 2>(2 * block, 2 * block) = tj * psi_matrix(t, j);
    for (int ui = 0; ui < u; ++ui) {
      const int k = v + ui;
      const Eigen::Matrix2d coupling =
          -tj * t.lambda[j][k] * to_eigen(bearing_matrix(t.phi[j][k]));
      f.block<2, 2>(2 * block, 2 * (s_unknown + ui)) = coupling;
      f.block<2, 2>(2 * (s_unknown + ui), 2 * block) = coupling;
    }
  }

  std::vector<int> anchor_ids;
  for (int ui = 0; ui < u; ++ui) {
    const UncertainAnchor& a = sc.uncertain_anchors[ui];
    anchor_ids.push_back(a.id);
    const int k = v + ui;
    Eigen::Matrix2d omega =
        a.prior_count * to_eigen(invert_cov(a.prior_cov));
    for (std::size_t j = 0; j < sc.sources.size(); ++j) {
      omega += sc.sources[j].sample_count * t.lambda[j][k] *
               to_eigen(bearing_matrix(t.phi[j][k]));
    }
    f.block<2, 2>(2 * (s_unknown + ui), 2 * (s_unknown + ui)) = omega;
  }

  return BlockFim(std::move(f), std::move(source_ids), std::move(anchor_ids));
}

SourceFimDecomposition source_marginal_fim(const Scenario& sc, int source_id) {
  const Source& src = sc.source_by_id(source_id);
  if (src.known_position) {
    throw PreconditionViolationError("source " + std::to_string(source_id) +
                                     " has a known position");
  }
  const BlockFim fim = assemble_block_fim(sc);
  const int off = fim.offset_of({NodeRef::Kind::Source, source_id});
  const int s2 = 2 * fim.source_blocks();
  const int u = fim.anchor_blocks();

  SourceFimDecomposition out;
  out.pure = from_eigen(fim.matrix().block<2, 2>(off, off));

  // Eliminate the uncertain anchors; omega is block diagonal.
  Eigen::MatrixXd f_sources = fim.xi();
  if (u > 0) {
    const Eigen::MatrixXd gamma = fim.gamma();
    Eigen::MatrixXd omega_inv = Eigen::MatrixXd::Zero(2 * u, 2 * u);
    for (int ui = 0; ui < u; ++ui) {
      omega_inv.block<2, 2>(2 * ui, 2 * ui) = invert_pd_2x2(
          fim.omega().block<2, 2>(2 * ui, 2 * ui), "anchor information");
    }
    const Eigen::MatrixXd drop = gamma * omega_inv * gamma.transpose();
    out.loss_anchors = from_eigen(drop.block<2, 2>(off, off));
    f_sources -= drop;
  } else {
    out.loss_anchors = InfoMatrix2{};
  }

  // Eliminate the other unknown sources.
  if (s2 > 2) {
    Eigen::MatrixXd b, c;
    split_at(f_sources, off, b, c);
    const Eigen::MatrixXd drop = eliminate(b, c, "other-source");
    out.loss_other_sources = from_eigen(drop);
  } else {
    out.loss_other_sources = InfoMatrix2{};
  }

  out.net = out.pure - out.loss_anchors - out.loss_other_sources;
  return out;
}

AnchorFimDecomposition anchor_marginal_fim(const Scenario& sc, int anchor_id) {
  const UncertainAnchor& anchor = sc.uncertain_anchor_by_id(anchor_id);
  const BlockFim fim = assemble_block_fim(sc);
  const int off = fim.offset_of({NodeRef::Kind::Anchor, anchor_id});
  const int s2 = 2 * fim.source_blocks();
  const int off_in_omega = off - s2;

  AnchorFimDecomposition out;
  out.prior =
      invert_cov(anchor.prior_cov).scaled(anchor.prior_count);
  out.gain_main =
      from_eigen(fim.matrix().block<2, 2>(off, off)) - out.prior;

  // Eliminate the unknown sources; xi is block diagonal.
  Eigen::MatrixXd f_anchors = fim.omega();
  if (s2 > 0) {
    const Eigen::MatrixXd gamma = fim.gamma();
    Eigen::MatrixXd xi_inv = Eigen::MatrixXd::Zero(s2, s2);
    for (int b = 0; b < fim.source_blocks(); ++b) {
      xi_inv.block<2, 2>(2 * b, 2 * b) = invert_pd_2x2(
          fim.xi().block<2, 2>(2 * b, 2 * b), "source information");
    }
    const Eigen::MatrixXd drop = gamma.transpose() * xi_inv * gamma;
    out.loss_unknown_sources =
        from_eigen(drop.block<2, 2>(off_in_omega, off_in_omega));
    f_anchors -= drop;
  } else {
    out.loss_unknown_sources = InfoMatrix2{};
  }

  // Eliminate the other uncertain anchors.
  if (f_anchors.rows() > 2) {
    Eigen::MatrixXd b, c;
    split_at(f_anchors, off_in_omega, b, c);
    const Eigen::MatrixXd drop = eliminate(b, c, "other-anchor");
    out.loss_other_anchors = from_eigen(drop);
  } else {
    out.loss_other_anchors = InfoMatrix2{};
  }

  out.net = out.prior + out.gain_main - out.loss_unknown_sources -
            out.loss_other_anchors;
  return out;
}

InfoMatrix2 all_uncertain_closed_form(std::span<const double> lambdas,
                                      std::span<const double> phis,
                                      double delta_m) {
  if (lambdas.size() != phis.size()) {
    throw Error("lambda and bearing lists must be equally sized");
  }
  InfoMatrix2 f{};
  const double d2 = delta_m * delta_m;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    f = f + bearing_matrix(phis[k]).scaled(lambdas[k] /
                                           (1.0 + lambdas[k] * d2));
  }
  return f;
}

namespace {

// Extracts the common isotropic uncertainty delta of an anchor, or throws.
double isotropic_delta(const UncertainAnchor& a) {
  const Cov2& k = a.prior_cov;
  const double scale = std::max(k.c11, k.c22);
  if (std::abs(k.c11 - k.c22) > 1e-9 * scale ||
      std::abs(k.c12) > 1e-9 * scale) {
    throw PreconditionViolationError(
        "anchor " + std::to_string(a.id) +
        ": prior covariance is not isotropic (delta^2 I)");
  }
  return std::sqrt(k.c11);
}

}  // namespace

InfoMatrix2 all_uncertain_source_fim(const Scenario& sc) {
  if (!sc.certain_anchors.empty()) {
    throw PreconditionViolationError(
        "closed form requires every anchor to be uncertain");
  }
  if (sc.sources.size() != 1 || sc.sources[0].known_position ||
      sc.sources[0].sample_count != 1) {
    throw PreconditionViolationError(
        "closed form requires a single unknown source with t = 1");
  }
  if (sc.uncertain_anchors.empty()) {
    throw PreconditionViolationError("scenario has no anchors");
  }
  double delta = 0.0;
  for (std::size_t i = 0; i < sc.uncertain_anchors.size(); ++i) {
    const UncertainAnchor& a = sc.uncertain_anchors[i];
    if (a.prior_count != 1) {
      throw PreconditionViolationError("closed form requires a_k = 1");
    }
    const double di = isotropic_delta(a);
    if (i == 0) {
      delta = di;
    } else if (std::abs(di - delta) > 1e-9 * std::max(di, delta)) {
      throw PreconditionViolationError(
          "closed form requires a common uncertainty delta");
    }
  }
  const ScenarioTerms t = scenario_terms(sc);
  return all_uncertain_closed_form(t.lambda[0], t.phi[0], delta);
}

double multi_source_loss_coeff(const Scenario& sc, int anchor_id,
                               int source_id) {
  const UncertainAnchor& anchor = sc.uncertain_anchor_by_id(anchor_id);
  const Source& src = sc.source_by_id(source_id);
  if (src.known_position) {
    throw PreconditionViolationError("source " + std::to_string(source_id) +
                                     " has a known position");
  }
  for (const Source& other : sc.sources) {
    if (other.id != source_id && !other.known_position) {
      throw PreconditionViolationError(
          "closed form requires the other sources at known positions");
    }
    if (other.sample_count != 1) {
      throw PreconditionViolationError("closed form requires t = 1");
    }
  }
  if (anchor.prior_count != 1) {
    throw PreconditionViolationError("closed form requires a_k = 1");
  }
  const double delta = isotropic_delta(anchor);
  const double d2 = delta * delta;

  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  double lambda_j = 0.0;
  Eigen::Vector2d q_j = Eigen::Vector2d::Zero();
  for (const Source& s : sc.sources) {
    const double d = (anchor.position - s.position).norm();
    const double lambda = lambda_coeff(sc.model, d);
    const double phi = bearing_of(s.position, anchor.position);
    m += lambda * to_eigen(bearing_matrix(phi));
    if (s.id == source_id) {
      lambda_j = lambda;
      q_j << std::cos(phi), std::sin(phi);
    }
  }
  const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() + d2 * m;
  const Eigen::Vector2d solved = lhs.ldlt().solve(q_j);
  return lambda_j * lambda_j * d2 * q_j.dot(solved);
}

InfoMatrix2 marginal_fim_full_inverse(const Scenario& sc,
                                      const NodeRef& node) {
  const BlockFim fim = assemble_block_fim(sc);
  const int off = fim.offset_of(node);
  const Eigen::MatrixXd crlb = fim.matrix().inverse();
  if (!crlb.allFinite()) {
    throw SingularBlockError("joint FIM is singular");
  }
  const Eigen::Matrix2d block = crlb.block<2, 2>(off, off);
  return from_eigen(invert_pd_2x2(block, "node CRLB"));
}

}  // namespace rssloc
