#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rssloc/scenario.hpp"

namespace rssloc {

struct ValidationIssue {
  std::string path;     // e.g. "anchors[3].prior_cov_m2"
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<ValidationIssue> errors;

  bool ok() const { return scenario.has_value() && errors.empty(); }
};

// Parses and validates a scenario document. Syntax errors and every
// field-level violation are reported with their location; a scenario is
// only returned when the document is fully valid.
ParseResult parse_scenario(std::string_view text);

// Canonical serialization: sorted keys, two-space indent, 17-significant-
// digit floats. parse(serialize(sc)) reproduces sc exactly and serializing
// again is byte-identical.
std::string serialize_scenario(const Scenario& sc);

// The document object behind serialize_scenario.
nlohmann::json scenario_to_json(const Scenario& sc);

// Deterministic JSON dump used for every file this project writes.
std::string canonical_json_dump(const nlohmann::json& j);

// Anchor positions for a parametric topology; ids are assigned 1..n in
// generation order. Seeded kinds are deterministic in the seed.
std::vector<Anchor> generate_topology(const TopologySpec& spec);

// One scenario per value, identical to base except for the addressed
// parameter. Supported axes: "source.x", "source.y" (first source),
// "sources[<id>].x"/".y", "delta", "sample_count", and "n" (circle
// topologies without uncertain anchors, regenerated).
std::vector<Scenario> sweep_axis(const Scenario& base, std::string_view axis,
                                 std::span<const double> values);

struct RandomScenarioOptions {
  int min_anchors{3};
  int max_anchors{8};
  int max_uncertain{4};
  int min_sources{1};
  int max_sources{3};
  int max_sample_count{4};
  int max_prior_count{3};
};

// Deterministic randomized scenario for oracle-based verification.
Scenario random_scenario(std::uint64_t seed,
                         const RandomScenarioOptions& opts = {});

// Human-readable description of the scenario document schema.
std::string scenario_schema_doc();

}  // namespace rssloc
