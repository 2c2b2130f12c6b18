#pragma once

#include <Eigen/Dense>

#include "rssloc/scenario.hpp"

namespace rssloc {

/// Joint FIM of all unknown-position nodes, ordered sources first then
/// uncertain anchors (2x2 blocks each). Immutable after assembly.
class BlockFim {
 public:
  BlockFim(Eigen::MatrixXd matrix, std::vector<int> source_ids,
           std::vector<int> anchor_ids);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  int source_blocks() const { return static_cast<int>(source_ids_.size()); }
  int anchor_blocks() const { return static_cast<int>(anchor_ids_.size()); }
  const std::vector<int>& source_ids() const { return source_ids_; }
  const std::vector<int>& anchor_ids() const { return anchor_ids_; }

  // Row/column offset of a node's 2x2 block; throws UnknownNodeIdError.
  int offset_of(const NodeRef& node) const;

  // Named views of the block structure.
  Eigen::MatrixXd xi() const;     // 2s' x 2s'
  Eigen::MatrixXd gamma() const;  // 2s' x 2u
  Eigen::MatrixXd omega() const;  // 2u x 2u

 private:
  Eigen::MatrixXd matrix_;
  std::vector<int> source_ids_;
  std::vector<int> anchor_ids_;
};

BlockFim assemble_block_fim(const Scenario& sc);

/// F(r_tx(j)) = t Psi_j - loss_anchors - loss_other_sources.
struct SourceFimDecomposition {
  InfoMatrix2 pure;
  InfoMatrix2 loss_anchors;
  InfoMatrix2 loss_other_sources;
  InfoMatrix2 net;
};

/// F(r_k) = a_k K_k^{-1} + gain_main - loss_unknown_sources - loss_other_anchors.
struct AnchorFimDecomposition {
  InfoMatrix2 prior;
  InfoMatrix2 gain_main;
  InfoMatrix2 loss_unknown_sources;
  InfoMatrix2 loss_other_anchors;
  InfoMatrix2 net;
};

// Marginal FIM of one unknown source, by block elimination of the anchors
// followed by the other unknown sources.
SourceFimDecomposition source_marginal_fim(const Scenario& sc, int source_id);

// Marginal FIM of one uncertain anchor, by block elimination of the unknown
// sources followed by the other uncertain anchors.
AnchorFimDecomposition anchor_marginal_fim(const Scenario& sc, int anchor_id);

// Closed form sum lambda_k / (1 + lambda_k delta^2) R_k for the fully
// uncertain network (every anchor isotropically uncertain, one unknown
// source, single samples and priors).
InfoMatrix2 all_uncertain_source_fim(const Scenario& sc);

// Formula-level core of the above, usable without a scenario (delta >= 0).
InfoMatrix2 all_uncertain_closed_form(std::span<const double> lambdas,
                                      std::span<const double> phis,
                                      double delta_m);

// Per-anchor loss coefficient for one unknown source when the other sources
// transmit from known positions (isotropic priors, single samples):
// lambda^2 delta^2 q^T (I + delta^2 sum_p lambda_p R_p)^{-1} q.
double multi_source_loss_coeff(const Scenario& sc, int anchor_id,
                               int source_id);

// Verification path for the block-elimination marginals: invert the whole
// joint FIM, take the node's 2x2 CRLB block, invert back. Kept separate
// from the production path on purpose.
InfoMatrix2 marginal_fim_full_inverse(const Scenario& sc,
                                      const NodeRef& node);

}  // namespace rssloc
