#include "rssloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rssloc {

InfoMatrix2 invert_cov(const Cov2& k) {
  if (!k.is_pd()) {
    throw Error("prior covariance must be positive definite");
  }
  const double d = k.det();
  return {k.c22 / d, -k.c12 / d, k.c11 / d};
}

std::string NodeRef::to_string() const {
  return (kind == Kind::Source ? "source:" : "anchor:") + std::to_string(id);
}

NodeRef NodeRef::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw UnknownNodeIdError("node reference must look like source:1 or anchor:3, got '" +
                             text + "'");
  }
  const std::string kind = text.substr(0, colon);
  NodeRef ref;
  if (kind == "source") {
    ref.kind = Kind::Source;
  } else if (kind == "anchor") {
    ref.kind = Kind::Anchor;
  } else {
    throw UnknownNodeIdError("unknown node kind '" + kind + "'");
  }
  try {
    ref.id = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw UnknownNodeIdError("bad node id in '" + text + "'");
  }
  return ref;
}

int Scenario::unknown_source_count() const {
  return static_cast<int>(
      std::count_if(sources.begin(), sources.end(),
                    [](const Source& s) { return !s.known_position; }));
}

std::vector<Vec2> Scenario::all_anchor_positions() const {
  std::vector<Vec2> out;
  out.reserve(certain_anchors.size() + uncertain_anchors.size());
  for (const Anchor& a : certain_anchors) out.push_back(a.position);
  for (const UncertainAnchor& a : uncertain_anchors) out.push_back(a.position);
  return out;
}

const Source& Scenario::source_by_id(int id) const {
  for (const Source& s : sources) {
    if (s.id == id) return s;
  }
  throw UnknownNodeIdError("no source with id " + std::to_string(id));
}

const UncertainAnchor& Scenario::uncertain_anchor_by_id(int id) const {
  for (const UncertainAnchor& a : uncertain_anchors) {
    if (a.id == id) return a;
  }
  throw UnknownNodeIdError("no uncertain anchor with id " + std::to_string(id));
}

void Scenario::validate() const {
  model.validate();
  std::set<int> anchor_ids;
  for (const Anchor& a : certain_anchors) {
    if (!anchor_ids.insert(a.id).second) {
      throw Error("duplicate anchor id " + std::to_string(a.id));
    }
  }
  for (const UncertainAnchor& a : uncertain_anchors) {
    if (!anchor_ids.insert(a.id).second) {
      throw Error("duplicate anchor id " + std::to_string(a.id));
    }
    if (!a.prior_cov.is_pd()) {
      throw Error("anchor " + std::to_string(a.id) +
                  ": prior covariance must be positive definite");
    }
    if (a.prior_count < 1) {
      throw Error("anchor " + std::to_string(a.id) +
                  ": prior_count must be at least 1");
    }
  }
  std::set<int> source_ids;
  for (const Source& s : sources) {
    if (!source_ids.insert(s.id).second) {
      throw Error("duplicate source id " + std::to_string(s.id));
    }
    if (s.sample_count < 1) {
      throw Error("source " + std::to_string(s.id) +
                  ": sample_count must be at least 1");
    }
  }
  const std::vector<Vec2> positions = all_anchor_positions();
  std::vector<int> ids;
  for (const Anchor& a : certain_anchors) ids.push_back(a.id);
  for (const UncertainAnchor& a : uncertain_anchors) ids.push_back(a.id);
  std::string offenders;
  for (const Source& s : sources) {
    for (std::size_t k = 0; k < positions.size(); ++k) {
      if ((positions[k] - s.position).norm() < model.d0_m) {
        if (!offenders.empty()) offenders += "; ";
        offenders += "(source " + std::to_string(s.id) + ", anchor " +
                     std::to_string(ids[k]) + ")";
      }
    }
  }
  if (!offenders.empty()) {
    throw BelowReferenceDistanceError(
        "source-anchor pair(s) closer than the reference distance: " +
        offenders);
  }
}

}  // namespace rssloc
