#include "rssloc/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rssloc/rng.hpp"

namespace rssloc {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

void fail(std::vector<ValidationIssue>& errors, std::string path,
          std::string message) {
  errors.push_back({std::move(path), std::move(message)});
}

// Fetches a finite number at key, recording an issue otherwise.
std::optional<double> get_number(const json& obj, const std::string& key,
                                 const std::string& path,
                                 std::vector<ValidationIssue>& errors) {
  if (!obj.contains(key)) {
    fail(errors, path + "." + key, "missing required field");
    return std::nullopt;
  }
  if (!obj[key].is_number()) {
    fail(errors, path + "." + key, "must be a number");
    return std::nullopt;
  }
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) {
    fail(errors, path + "." + key, "must be finite");
    return std::nullopt;
  }
  return v;
}

std::optional<int> get_int(const json& obj, const std::string& key,
                           const std::string& path,
                           std::vector<ValidationIssue>& errors) {
  if (!obj.contains(key)) {
    fail(errors, path + "." + key, "missing required field");
    return std::nullopt;
  }
  if (!obj[key].is_number_integer()) {
    fail(errors, path + "." + key, "must be an integer");
    return std::nullopt;
  }
  return obj[key].get<int>();
}

std::optional<Cov2> parse_prior(const json& obj, const std::string& path,
                                std::vector<ValidationIssue>& errors) {
  const bool has_cov = obj.contains("prior_cov_m2");
  const bool has_delta = obj.contains("delta_m");
  if (!has_cov && !has_delta) {
    fail(errors, path, "uncertain anchor needs prior_cov_m2 or delta_m");
    return std::nullopt;
  }
  std::optional<Cov2> cov;
  if (has_cov) {
    const json& c = obj["prior_cov_m2"];
    if (!c.is_array() || c.size() != 2 || !c[0].is_array() ||
        !c[1].is_array() || c[0].size() != 2 || c[1].size() != 2) {
      fail(errors, path + ".prior_cov_m2", "must be a 2x2 array");
      return std::nullopt;
    }
    Cov2 k{c[0][0].get<double>(), c[0][1].get<double>(), c[1][1].get<double>()};
    if (std::abs(c[1][0].get<double>() - k.c12) >
        1e-12 * std::max(1.0, std::abs(k.c12))) {
      fail(errors, path + ".prior_cov_m2", "must be symmetric");
      return std::nullopt;
    }
    cov = k;
  }
  if (has_delta) {
    const double delta = obj["delta_m"].get<double>();
    if (!(delta > 0.0)) {
      fail(errors, path + ".delta_m", "must be positive");
      return std::nullopt;
    }
    const Cov2 iso = Cov2::isotropic(delta);
    if (cov) {
      const double scale = std::max(cov->c11, iso.c11);
      if (std::abs(cov->c11 - iso.c11) > 1e-9 * scale ||
          std::abs(cov->c22 - iso.c22) > 1e-9 * scale ||
          std::abs(cov->c12) > 1e-9 * scale) {
        fail(errors, path, "prior_cov_m2 and delta_m are inconsistent");
        return std::nullopt;
      }
      // the explicit covariance wins
    } else {
      cov = iso;
    }
  }
  if (cov && !cov->is_pd()) {
    fail(errors, path + ".prior_cov_m2", "must be positive definite");
    return std::nullopt;
  }
  return cov;
}

std::optional<TopologySpec> parse_topology(
    const json& t, std::vector<ValidationIssue>& errors) {
  const std::string path = "topology";
  if (!t.contains("kind") || !t["kind"].is_string()) {
    fail(errors, path + ".kind", "missing topology kind");
    return std::nullopt;
  }
  const std::string kind = t["kind"].get<std::string>();
  if (kind == "circle") {
    CircleTopology c;
    if (auto n = get_int(t, "n", path, errors)) c.n = *n;
    if (auto d = get_number(t, "d_m", path, errors)) c.d_m = *d;
    if (t.contains("phi1_rad") && t.contains("phi1_deg")) {
      fail(errors, path, "give phi1_rad or phi1_deg, not both");
      return std::nullopt;
    }
    if (t.contains("phi1_deg")) {
      c.phi1_rad = t["phi1_deg"].get<double>() * std::numbers::pi / 180.0;
    } else if (t.contains("phi1_rad")) {
      c.phi1_rad = t["phi1_rad"].get<double>();
    }
    if (c.n < 1) fail(errors, path + ".n", "must be at least 1");
    if (!(c.d_m > 0.0)) fail(errors, path + ".d_m", "must be positive");
    return TopologySpec{c};
  }
  if (kind == "grid") {
    GridTopology g;
    if (auto r = get_int(t, "rows", path, errors)) g.rows = *r;
    if (auto cl = get_int(t, "cols", path, errors)) g.cols = *cl;
    if (auto s = get_number(t, "spacing_m", path, errors)) g.spacing_m = *s;
    if (g.rows < 1 || g.cols < 1) fail(errors, path, "grid needs rows, cols >= 1");
    if (!(g.spacing_m > 0.0)) fail(errors, path + ".spacing_m", "must be positive");
    return TopologySpec{g};
  }
  if (kind == "irregular") {
    IrregularTopology ir;
    if (auto n = get_int(t, "n", path, errors)) ir.n = *n;
    if (auto s = get_int(t, "seed", path, errors)) ir.seed = *s;
    if (!t.contains("box_m") || !t["box_m"].is_array() ||
        t["box_m"].size() != 2) {
      fail(errors, path + ".box_m", "must be [[xmin,ymin],[xmax,ymax]]");
      return std::nullopt;
    }
    ir.box_min = {t["box_m"][0][0].get<double>(), t["box_m"][0][1].get<double>()};
    ir.box_max = {t["box_m"][1][0].get<double>(), t["box_m"][1][1].get<double>()};
    if (!(ir.box_max.x > ir.box_min.x) || !(ir.box_max.y > ir.box_min.y)) {
      fail(errors, path + ".box_m", "box must have positive extent");
    }
    if (ir.n < 1) fail(errors, path + ".n", "must be at least 1");
    return TopologySpec{ir};
  }
  if (kind == "clustered") {
    ClusteredTopology cl;
    if (auto s = get_int(t, "seed", path, errors)) cl.seed = *s;
    if (!t.contains("clusters") || !t["clusters"].is_array() ||
        t["clusters"].empty()) {
      fail(errors, path + ".clusters", "must be a nonempty array");
      return std::nullopt;
    }
    int i = 0;
    for (const json& c : t["clusters"]) {
      const std::string cpath = path + ".clusters[" + std::to_string(i) + "]";
      ClusteredTopology::Cluster cluster;
      if (!c.contains("center_m") || !c["center_m"].is_array() ||
          c["center_m"].size() != 2) {
        fail(errors, cpath + ".center_m", "must be [x, y]");
      } else {
        cluster.center = {c["center_m"][0].get<double>(),
                          c["center_m"][1].get<double>()};
      }
      if (auto n = get_int(c, "count", cpath, errors)) cluster.count = *n;
      if (auto r = get_number(c, "radius_m", cpath, errors))
        cluster.radius_m = *r;
      if (cluster.count < 1) fail(errors, cpath + ".count", "must be >= 1");
      if (!(cluster.radius_m > 0.0))
        fail(errors, cpath + ".radius_m", "must be positive");
      cl.clusters.push_back(cluster);
      ++i;
    }
    return TopologySpec{cl};
  }
  fail(errors, path + ".kind",
       "unknown kind '" + kind + "' (circle, grid, irregular, clustered)");
  return std::nullopt;
}

}  // namespace

std::vector<Anchor> generate_topology(const TopologySpec& spec) {
  std::vector<Anchor> out;
  if (const auto* c = std::get_if<CircleTopology>(&spec)) {
    out.reserve(c->n);
    for (int i = 0; i < c->n; ++i) {
      const double phi = c->phi1_rad + i * 2.0 * std::numbers::pi / c->n;
      out.push_back({{c->d_m * std::cos(phi), c->d_m * std::sin(phi)}, i + 1});
    }
  } else if (const auto* g = std::get_if<GridTopology>(&spec)) {
    out.reserve(g->rows * g->cols);
    int id = 1;
    for (int r = 0; r < g->rows; ++r) {
      for (int col = 0; col < g->cols; ++col) {
        // lattice centered on the origin, row-major ids
        out.push_back({{(col - 0.5 * (g->cols - 1)) * g->spacing_m,
                        (r - 0.5 * (g->rows - 1)) * g->spacing_m},
                       id++});
      }
    }
  } else if (const auto* ir = std::get_if<IrregularTopology>(&spec)) {
    RngStream stream = RngStream::derive(ir->seed, 0);
    out.reserve(ir->n);
    for (int i = 0; i < ir->n; ++i) {
      out.push_back({{stream.uniform(ir->box_min.x, ir->box_max.x),
                      stream.uniform(ir->box_min.y, ir->box_max.y)},
                     i + 1});
    }
  } else if (const auto* cl = std::get_if<ClusteredTopology>(&spec)) {
    int id = 1;
    for (std::size_t c = 0; c < cl->clusters.size(); ++c) {
      const auto& cluster = cl->clusters[c];
      RngStream stream = RngStream::derive(cl->seed, c);
      for (int i = 0; i < cluster.count; ++i) {
        const double r = cluster.radius_m * std::sqrt(stream.uniform01());
        const double a = 2.0 * std::numbers::pi * stream.uniform01();
        out.push_back({{cluster.center.x + r * std::cos(a),
                        cluster.center.y + r * std::sin(a)},
                       id++});
      }
    }
  }
  return out;
}

ParseResult parse_scenario(std::string_view text) {
  ParseResult result;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(result.errors, "$", std::string("syntax error: ") + e.what());
    return result;
  }
  if (!doc.is_object()) {
    fail(result.errors, "$", "document must be a JSON object");
    return result;
  }
  auto& errors = result.errors;

  if (!doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kSchemaVersion) {
    fail(errors, "schema_version",
         "missing or unsupported (expected " + std::to_string(kSchemaVersion) +
             ")");
  }

  Scenario sc;
  if (!doc.contains("model") || !doc["model"].is_object()) {
    fail(errors, "model", "missing required object");
  } else {
    const json& m = doc["model"];
    if (auto v = get_number(m, "p0_dbm", "model", errors)) sc.model.p0_dbm = *v;
    if (auto v = get_number(m, "gamma", "model", errors)) sc.model.gamma = *v;
    if (auto v = get_number(m, "d0_m", "model", errors)) sc.model.d0_m = *v;
    if (auto v = get_number(m, "sigma_db", "model", errors))
      sc.model.sigma_db = *v;
    if (sc.model.gamma <= 0.0) fail(errors, "model.gamma", "must be positive");
    if (sc.model.d0_m <= 0.0) fail(errors, "model.d0_m", "must be positive");
    if (sc.model.sigma_db <= 0.0)
      fail(errors, "model.sigma_db", "must be positive");
  }

  const bool has_anchors = doc.contains("anchors");
  const bool has_topology = doc.contains("topology");
  if (has_anchors == has_topology) {
    fail(errors, "$", "give exactly one of 'anchors' or 'topology'");
  }

  if (has_anchors && doc["anchors"].is_array()) {
    int i = 0;
    for (const json& a : doc["anchors"]) {
      const std::string path = "anchors[" + std::to_string(i) + "]";
      ++i;
      if (!a.is_object()) {
        fail(errors, path, "must be an object");
        continue;
      }
      const auto id = get_int(a, "id", path, errors);
      const auto x = get_number(a, "x_m", path, errors);
      const auto y = get_number(a, "y_m", path, errors);
      std::string kind = "certain";
      if (a.contains("kind")) {
        if (!a["kind"].is_string()) {
          fail(errors, path + ".kind", "must be 'certain' or 'uncertain'");
          continue;
        }
        kind = a["kind"].get<std::string>();
      }
      if (!id || !x || !y) continue;
      if (kind == "certain") {
        sc.certain_anchors.push_back({{*x, *y}, *id});
      } else if (kind == "uncertain") {
        const auto cov = parse_prior(a, path, errors);
        if (!cov) continue;
        UncertainAnchor ua{{*x, *y}, *id, *cov, 1};
        if (a.contains("prior_count")) {
          if (auto pc = get_int(a, "prior_count", path, errors)) {
            ua.prior_count = *pc;
          }
        }
        if (ua.prior_count < 1) {
          fail(errors, path + ".prior_count", "must be at least 1");
          continue;
        }
        sc.uncertain_anchors.push_back(ua);
      } else {
        fail(errors, path + ".kind", "must be 'certain' or 'uncertain'");
      }
    }
  } else if (has_anchors) {
    fail(errors, "anchors", "must be an array");
  }

  if (has_topology && doc["topology"].is_object()) {
    const auto spec = parse_topology(doc["topology"], errors);
    if (spec) {
      TopologyProvenance prov;
      prov.spec = *spec;
      std::vector<Anchor> generated = generate_topology(*spec);
      const json& t = doc["topology"];
      Cov2 cov{};
      bool any_uncertain = false;
      if (t.contains("uncertain")) {
        const json& u = t["uncertain"];
        const std::string upath = "topology.uncertain";
        if (!u.is_object() || !u.contains("ids") || !u["ids"].is_array()) {
          fail(errors, upath, "needs an 'ids' array");
        } else {
          const auto parsed_cov = parse_prior(u, upath, errors);
          if (parsed_cov) {
            cov = *parsed_cov;
            any_uncertain = true;
            if (u.contains("delta_m")) {
              prov.delta_m = u["delta_m"].get<double>();
            }
            prov.prior_count = 1;
            if (u.contains("prior_count")) {
              if (auto pc = get_int(u, "prior_count", upath, errors)) {
                prov.prior_count = *pc;
              }
            }
            for (const json& idj : u["ids"]) {
              if (!idj.is_number_integer()) {
                fail(errors, upath + ".ids", "ids must be integers");
                break;
              }
              prov.uncertain_ids.push_back(idj.get<int>());
            }
          }
        }
      }
      for (const Anchor& a : generated) {
        const bool uncertain =
            any_uncertain &&
            std::find(prov.uncertain_ids.begin(), prov.uncertain_ids.end(),
                      a.id) != prov.uncertain_ids.end();
        if (uncertain) {
          sc.uncertain_anchors.push_back(
              {a.position, a.id, cov, prov.prior_count});
        } else {
          sc.certain_anchors.push_back(a);
        }
      }
      for (int id : prov.uncertain_ids) {
        if (!std::any_of(generated.begin(), generated.end(),
                         [&](const Anchor& a) { return a.id == id; })) {
          fail(errors, "topology.uncertain.ids",
               "id " + std::to_string(id) + " is not a generated anchor");
        }
      }
      sc.topology = std::move(prov);
    }
  } else if (has_topology) {
    fail(errors, "topology", "must be an object");
  }

  if (!doc.contains("sources") || !doc["sources"].is_array() ||
      doc["sources"].empty()) {
    fail(errors, "sources", "must be a nonempty array");
  } else {
    int i = 0;
    for (const json& s : doc["sources"]) {
      const std::string path = "sources[" + std::to_string(i) + "]";
      ++i;
      const auto id = get_int(s, "id", path, errors);
      const auto x = get_number(s, "x_m", path, errors);
      const auto y = get_number(s, "y_m", path, errors);
      if (!id || !x || !y) continue;
      Source src{{*x, *y}, *id, 1, false};
      if (s.contains("sample_count")) {
        if (auto t = get_int(s, "sample_count", path, errors)) {
          src.sample_count = *t;
        }
      }
      if (src.sample_count < 1) {
        fail(errors, path + ".sample_count", "must be at least 1");
        continue;
      }
      if (s.contains("known_position")) {
        if (!s["known_position"].is_boolean()) {
          fail(errors, path + ".known_position", "must be a boolean");
          continue;
        }
        src.known_position = s["known_position"].get<bool>();
      }
      sc.sources.push_back(src);
    }
  }

  if (doc.contains("analysis")) {
    const json& an = doc["analysis"];
    if (an.contains("confidence_k")) {
      const double k = an["confidence_k"].get<double>();
      if (!(k > 0.0)) {
        fail(errors, "analysis.confidence_k", "must be positive");
      } else {
        sc.confidence_k = k;
      }
    }
  }

  if (!errors.empty()) {
    return result;
  }

  // Whole-scenario invariants, mapped back to field-level issues.
  try {
    sc.validate();
  } catch (const BelowReferenceDistanceError& e) {
    fail(errors, "sources", e.what());
  } catch (const Error& e) {
    fail(errors, "$", e.what());
  }
  if (!errors.empty()) {
    return result;
  }
  result.scenario = std::move(sc);
  return result;
}

namespace {

json topology_to_json(const TopologyProvenance& prov) {
  json t;
  if (const auto* c = std::get_if<CircleTopology>(&prov.spec)) {
    t["kind"] = "circle";
    t["n"] = c->n;
    t["d_m"] = c->d_m;
    t["phi1_rad"] = c->phi1_rad;
  } else if (const auto* g = std::get_if<GridTopology>(&prov.spec)) {
    t["kind"] = "grid";
    t["rows"] = g->rows;
    t["cols"] = g->cols;
    t["spacing_m"] = g->spacing_m;
  } else if (const auto* ir = std::get_if<IrregularTopology>(&prov.spec)) {
    t["kind"] = "irregular";
    t["n"] = ir->n;
    t["seed"] = static_cast<std::int64_t>(ir->seed);
    t["box_m"] = json::array({json::array({ir->box_min.x, ir->box_min.y}),
                              json::array({ir->box_max.x, ir->box_max.y})});
  } else if (const auto* cl = std::get_if<ClusteredTopology>(&prov.spec)) {
    t["kind"] = "clustered";
    t["seed"] = static_cast<std::int64_t>(cl->seed);
    json clusters = json::array();
    for (const auto& c : cl->clusters) {
      clusters.push_back({{"center_m", json::array({c.center.x, c.center.y})},
                          {"count", c.count},
                          {"radius_m", c.radius_m}});
    }
    t["clusters"] = clusters;
  }
  if (!prov.uncertain_ids.empty()) {
    json u;
    u["ids"] = prov.uncertain_ids;
    if (prov.delta_m > 0.0) {
      u["delta_m"] = prov.delta_m;
    }
    u["prior_count"] = prov.prior_count;
    t["uncertain"] = u;
  }
  return t;
}

}  // namespace

std::string serialize_scenario(const Scenario& sc) {
  return canonical_json_dump(scenario_to_json(sc));
}

json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["model"] = {{"p0_dbm", sc.model.p0_dbm},
                  {"gamma", sc.model.gamma},
                  {"d0_m", sc.model.d0_m},
                  {"sigma_db", sc.model.sigma_db}};
  if (sc.topology) {
    doc["topology"] = topology_to_json(*sc.topology);
  } else {
    json anchors = json::array();
    for (const Anchor& a : sc.certain_anchors) {
      anchors.push_back({{"id", a.id},
                         {"kind", "certain"},
                         {"x_m", a.position.x},
                         {"y_m", a.position.y}});
    }
    for (const UncertainAnchor& a : sc.uncertain_anchors) {
      anchors.push_back(
          {{"id", a.id},
           {"kind", "uncertain"},
           {"x_m", a.position.x},
           {"y_m", a.position.y},
           {"prior_cov_m2",
            json::array({json::array({a.prior_cov.c11, a.prior_cov.c12}),
                         json::array({a.prior_cov.c12, a.prior_cov.c22})})},
           {"prior_count", a.prior_count}});
    }
    doc["anchors"] = anchors;
  }
  json sources = json::array();
  for (const Source& s : sc.sources) {
    sources.push_back({{"id", s.id},
                       {"known_position", s.known_position},
                       {"sample_count", s.sample_count},
                       {"x_m", s.position.x},
                       {"y_m", s.position.y}});
  }
  doc["sources"] = sources;
  doc["analysis"] = {{"confidence_k", sc.confidence_k}};
  return doc;
}

namespace {

void dump_value(const json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.cbegin(); it != j.cend(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_value(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const json& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(item, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string canonical_json_dump(const json& j) {
  std::string out;
  dump_value(j, out, 0);
  out += "\n";
  return out;
}

std::vector<Scenario> sweep_axis(const Scenario& base, std::string_view axis,
                                 std::span<const double> values) {
  const std::string ax(axis);
  std::vector<Scenario> out;
  out.reserve(values.size());

  auto source_index_for = [&](const std::string& path) -> int {
    if (path.rfind("sources[", 0) == 0) {
      const auto close = path.find(']');
      const int id = std::stoi(path.substr(8, close - 8));
      for (std::size_t i = 0; i < base.sources.size(); ++i) {
        if (base.sources[i].id == id) return static_cast<int>(i);
      }
      throw UnknownNodeIdError("no source with id " + std::to_string(id));
    }
    return 0;  // "source.*" addresses the first source
  };

  const bool is_x = ax == "source.x" || (ax.rfind("sources[", 0) == 0 &&
                                         ax.size() > 2 &&
                                         ax.substr(ax.size() - 2) == ".x");
  const bool is_y = ax == "source.y" || (ax.rfind("sources[", 0) == 0 &&
                                         ax.size() > 2 &&
                                         ax.substr(ax.size() - 2) == ".y");

  for (double v : values) {
    Scenario sc = base;
    if (is_x || is_y) {
      if (sc.sources.empty()) {
        throw UnknownParameterPathError("scenario has no sources");
      }
      const int idx = source_index_for(ax);
      if (is_x) {
        sc.sources[idx].position.x = v;
      } else {
        sc.sources[idx].position.y = v;
      }
    } else if (ax == "delta") {
      if (sc.uncertain_anchors.empty()) {
        throw UnknownParameterPathError(
            "axis 'delta' needs uncertain anchors");
      }
      for (UncertainAnchor& a : sc.uncertain_anchors) {
        a.prior_cov = Cov2::isotropic(v);
      }
      if (sc.topology) sc.topology->delta_m = v;
    } else if (ax == "sample_count") {
      const int t = static_cast<int>(v);
      if (t < 1 || std::abs(v - t) > 1e-9) {
        throw UnknownParameterPathError(
            "sample_count sweep values must be positive integers");
      }
      for (Source& s : sc.sources) s.sample_count = t;
    } else if (ax == "n") {
      if (!sc.topology ||
          !std::holds_alternative<CircleTopology>(sc.topology->spec)) {
        throw UnknownParameterPathError(
            "axis 'n' needs a circle topology provenance");
      }
      if (!sc.topology->uncertain_ids.empty()) {
        throw UnknownParameterPathError(
            "axis 'n' is only supported for all-certain topologies");
      }
      const int n = static_cast<int>(v);
      if (n < 1 || std::abs(v - n) > 1e-9) {
        throw UnknownParameterPathError(
            "n sweep values must be positive integers");
      }
      std::get<CircleTopology>(sc.topology->spec).n = n;
      sc.certain_anchors = generate_topology(sc.topology->spec);
      sc.uncertain_anchors.clear();
    } else {
      throw UnknownParameterPathError("unknown sweep axis '" + ax + "'");
    }
    // geometric validity (d >= d0 at every point) is left to the analysis
    // of each scenario; a sweep may legitimately cross invalid points
    out.push_back(std::move(sc));
  }
  return out;
}

Scenario random_scenario(std::uint64_t seed,
                         const RandomScenarioOptions& opts) {
  RngStream stream = RngStream::derive(seed, 0xa11ce);
  Scenario sc;
  sc.model = {0.0, 3.5, 1.0, 5.0};

  const int s = stream.uniform_int(opts.min_sources, opts.max_sources);
  for (int j = 0; j < s; ++j) {
    Source src;
    src.id = j + 1;
    src.position = {stream.uniform(-4.0, 4.0), stream.uniform(-4.0, 4.0)};
    src.sample_count = stream.uniform_int(1, opts.max_sample_count);
    src.known_position = stream.uniform01() < 0.35;
    sc.sources.push_back(src);
  }
  if (sc.unknown_source_count() == 0) {
    sc.sources[0].known_position = false;
  }

  const int n = stream.uniform_int(opts.min_anchors, opts.max_anchors);
  const int u = std::min(n - 1, stream.uniform_int(0, opts.max_uncertain));
  for (int k = 0; k < n; ++k) {
    Vec2 pos;
    bool valid = false;
    for (int attempt = 0; attempt < 256 && !valid; ++attempt) {
      pos = {stream.uniform(-15.0, 15.0), stream.uniform(-15.0, 15.0)};
      valid = true;
      for (const Source& src : sc.sources) {
        if ((pos - src.position).norm() < 1.2 * sc.model.d0_m) {
          valid = false;
          break;
        }
      }
    }
    if (k < n - u) {
      sc.certain_anchors.push_back({pos, k + 1});
    } else {
      const double a = stream.uniform(0.6, 2.5);
      const double c = stream.uniform(0.6, 2.5);
      const double b = stream.uniform(-0.5, 0.5);
      // K = L L^T with lower-triangular L = [[a,0],[b,c]]
      Cov2 cov{a * a, a * b, b * b + c * c};
      const int ak = stream.uniform_int(1, opts.max_prior_count);
      sc.uncertain_anchors.push_back({pos, k + 1, cov, ak});
    }
  }
  sc.validate();
  return sc;
}

std::string scenario_schema_doc() {
  return R"(Scenario document (JSON, UTF-8)

{
  "schema_version": 1,
  "model": {
    "p0_dbm":   received power at the reference distance (dBm),
    "gamma":    path-loss exponent (> 0),
    "d0_m":     reference distance in meters (> 0),
    "sigma_db": shadowing standard deviation in dB (> 0)
  },

  // exactly one of "anchors" / "topology"
  "anchors": [
    {"id": 1, "kind": "certain",   "x_m": 5.0, "y_m": 0.0},
    {"id": 2, "kind": "uncertain", "x_m": 0.0, "y_m": 5.0,
     "prior_cov_m2": [[4.0, 1.5], [1.5, 3.0]],   // 2x2 SPD, meters^2
     "prior_count": 1}
    // "delta_m": D is sugar for prior_cov_m2 = D^2 I; if both are given
    // they must agree and the explicit covariance wins
  ],
  "topology": {
    "kind": "circle",  "n": 64, "d_m": 5.0, "phi1_rad": 0.0,  // or "phi1_deg"
    // "kind": "grid",      "rows": 8, "cols": 8, "spacing_m": 2.0
    // "kind": "irregular", "n": 10, "seed": 9, "box_m": [[-10,-10],[10,10]]
    // "kind": "clustered", "seed": 3,
    //   "clusters": [{"center_m": [0,0], "count": 5, "radius_m": 2.0}]
    "uncertain": {"ids": [1, 2], "delta_m": 3.0, "prior_count": 1}  // optional
  },

  "sources": [
    {"id": 1, "x_m": 0.0, "y_m": 0.0, "sample_count": 1,
     "known_position": false}
  ],

  "analysis": {"confidence_k": 1.0}  // optional, k > 0
}

Distances and positions are meters, powers dBm, angles radians unless the
field name carries a _deg suffix. Every source-anchor distance must be at
least d0_m.
)";
}

}  // namespace rssloc
