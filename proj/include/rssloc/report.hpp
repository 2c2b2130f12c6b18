#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rssloc/joint_fim.hpp"
#include "rssloc/scenario.hpp"

namespace rssloc {

inline constexpr const char* kToolVersion = "0.1.0";

struct NodeAnalysis {
  NodeRef node;
  InfoMatrix2 net;
  EllipseParams ie;
  std::optional<EllipseParams> ee;  // absent when the net FIM is singular
  double eccentricity{0.0};
  double area{0.0};
  std::optional<double> peb_m;
  std::optional<SourceFimDecomposition> source_terms;
  std::optional<AnchorFimDecomposition> anchor_terms;
};

struct AnalysisReport {
  Scenario scenario;
  double confidence_k{1.0};
  std::vector<NodeAnalysis> nodes;
  std::vector<std::string> warnings;
};

// Marginal FIM, ellipses and scalar metrics for every unknown-position
// node. Throws SingularFimError/SingularBlockError when a node is
// unidentifiable; near-singular nodes only produce warnings.
AnalysisReport analyze_scenario(const Scenario& sc);

nlohmann::json report_to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& j);

// CSV with one row per sweep value; per node the columns
// mu, eta, alpha_rad, xi, area, peb_m. Unanalyzable points leave their
// cells empty and report a warning.
struct SweepTable {
  std::string csv;
  std::vector<std::string> warnings;
};
SweepTable sweep_csv(const Scenario& base, std::string_view axis,
                     std::span<const double> values);

// Scene plot: anchors, sources, and the information / error ellipses of the
// selected nodes (all when empty) at confidence scale k. Semi-axes are
// sqrt(k * eigenvalue) of the plotted matrix, so k = 1 draws the bare
// ellipse parameters.
std::string render_report_svg(const AnalysisReport& report, double k,
                              const std::vector<NodeRef>& nodes);

// Line chart of one metric column family against the swept value.
std::string render_sweep_svg(const std::string& csv_text,
                             const std::string& metric);

}  // namespace rssloc
