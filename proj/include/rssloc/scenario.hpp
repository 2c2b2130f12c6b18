#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rssloc/rss_model.hpp"

namespace rssloc {

/// Symmetric 2x2 covariance (m^2) of a prior position estimate.
struct Cov2 {
  double c11{0.0};
  double c12{0.0};
  double c22{0.0};

  double det() const { return c11 * c22 - c12 * c12; }
  bool is_pd() const { return c11 > 0.0 && det() > 0.0; }
  static Cov2 isotropic(double delta_m) {
    return {delta_m * delta_m, 0.0, delta_m * delta_m};
  }
};

// Inverse of a positive definite covariance, as an information matrix.
InfoMatrix2 invert_cov(const Cov2& k);

/// Anchor whose true position is known only through prior estimates drawn
/// around it with covariance prior_cov. The stored position is the
/// evaluation point of the bounds, not runtime knowledge.
struct UncertainAnchor {
  Vec2 position;
  int id{0};
  Cov2 prior_cov;
  int prior_count{1};
};

struct Source {
  Vec2 position;
  int id{0};
  int sample_count{1};
  bool known_position{false};
};

struct CircleTopology {
  int n{0};
  double d_m{0.0};
  double phi1_rad{0.0};
};

struct GridTopology {
  int rows{0};
  int cols{0};
  double spacing_m{0.0};
};

struct IrregularTopology {
  int n{0};
  std::uint64_t seed{0};
  Vec2 box_min;
  Vec2 box_max;
};

struct ClusteredTopology {
  struct Cluster {
    Vec2 center;
    int count{0};
    double radius_m{0.0};
  };
  std::vector<Cluster> clusters;
  std::uint64_t seed{0};
};

using TopologySpec =
    std::variant<CircleTopology, GridTopology, IrregularTopology,
                 ClusteredTopology>;

/// Remembers how a scenario's anchors were generated so sweeps can
/// regenerate them (e.g. over the anchor count).
struct TopologyProvenance {
  TopologySpec spec;
  std::vector<int> uncertain_ids;
  double delta_m{0.0};
  int prior_count{1};
};

struct NodeRef {
  enum class Kind { Source, Anchor };
  Kind kind{Kind::Source};
  int id{0};

  std::string to_string() const;
  static NodeRef parse(const std::string& text);
  bool operator==(const NodeRef&) const = default;
};

/// Full network description: certain anchors (set V), uncertain anchors
/// (set U), sequentially active sources (set S) and the propagation model.
struct Scenario {
  PropagationModel model;
  std::vector<Anchor> certain_anchors;
  std::vector<UncertainAnchor> uncertain_anchors;
  std::vector<Source> sources;
  double confidence_k{1.0};
  std::optional<TopologyProvenance> topology;

  int anchor_count() const {
    return static_cast<int>(certain_anchors.size() + uncertain_anchors.size());
  }
  int unknown_source_count() const;

  // All anchor positions, certain first then uncertain, the index order
  // used throughout the joint framework.
  std::vector<Vec2> all_anchor_positions() const;

  const Source& source_by_id(int id) const;
  const UncertainAnchor& uncertain_anchor_by_id(int id) const;

  // Checks all scenario invariants; throws on hard violations
  // (non-PD priors, source-anchor distance below d0, bad counts).
  void validate() const;
};

}  // namespace rssloc
