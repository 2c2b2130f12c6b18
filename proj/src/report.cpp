#include "rssloc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "rssloc/scenario_io.hpp"

namespace rssloc {

using nlohmann::json;

namespace {

constexpr double kNearSingularRatio = 1e-9;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json matrix_json(const InfoMatrix2& f) {
  return json::array({json::array({f.f11, f.f12}),
                      json::array({f.f12, f.f22})});
}

InfoMatrix2 matrix_from_json(const json& j) {
  return {j[0][0].get<double>(), j[0][1].get<double>(),
          j[1][1].get<double>()};
}

json ellipse_json(const EllipseParams& e) {
  return {{"major", e.major}, {"minor", e.minor}, {"angle_rad", e.angle}};
}

EllipseParams ellipse_from_json(const json& j) {
  return {j["major"].get<double>(), j["minor"].get<double>(),
          j["angle_rad"].get<double>()};
}

}  // namespace

AnalysisReport analyze_scenario(const Scenario& sc) {
  sc.validate();
  AnalysisReport report;
  report.scenario = sc;
  report.confidence_k = sc.confidence_k;

  std::vector<NodeRef> nodes;
  for (const Source& s : sc.sources) {
    if (!s.known_position) nodes.push_back({NodeRef::Kind::Source, s.id});
  }
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    nodes.push_back({NodeRef::Kind::Anchor, a.id});
  }
  if (nodes.empty()) {
    throw EmptyParameterVectorError(
        "scenario has no unknown-position node to analyze");
  }
  if (sc.anchor_count() < 3) {
    report.warnings.push_back(
        "fewer than 3 anchors: two-dimensional localization is degenerate "
        "or ambiguous");
  }

  for (const NodeRef& node : nodes) {
    NodeAnalysis na;
    na.node = node;
    if (node.kind == NodeRef::Kind::Source) {
      na.source_terms = source_marginal_fim(sc, node.id);
      na.net = na.source_terms->net;
    } else {
      na.anchor_terms = anchor_marginal_fim(sc, node.id);
      na.net = na.anchor_terms->net;
    }
    na.ie = fim_to_ellipse(na.net);
    if (!(na.ie.major > 0.0)) {
      throw SingularFimError("node " + node.to_string() +
                             " carries no location information");
    }
    na.eccentricity = eccentricity(na.ie);
    na.area = area(na.ie);
    if (na.ie.minor > 0.0) {
      na.ee = error_ellipse(na.net);
      na.peb_m = peb(na.ie);
      if (na.ie.minor <= kNearSingularRatio * na.ie.major) {
        report.warnings.push_back("node " + node.to_string() +
                                  ": information ellipse is near-singular");
      }
    } else {
      throw SingularFimError(
          "node " + node.to_string() +
          ": information is confined to one direction; position "
          "unidentifiable");
    }
    report.nodes.push_back(std::move(na));
  }
  return report;
}

json report_to_json(const AnalysisReport& report) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "analysis_report";
  doc["tool"] = {{"name", "rssloc"}, {"version", kToolVersion}};
  doc["confidence_k"] = report.confidence_k;
  doc["scenario"] = scenario_to_json(report.scenario);
  json nodes = json::array();
  for (const NodeAnalysis& na : report.nodes) {
    json n;
    n["node"] = na.node.to_string();
    n["fim"] = matrix_json(na.net);
    n["ie"] = ellipse_json(na.ie);
    n["ee"] = na.ee ? ellipse_json(*na.ee) : json(nullptr);
    n["eccentricity"] = na.eccentricity;
    n["area"] = na.area;
    n["peb_m"] = na.peb_m ? json(*na.peb_m) : json(nullptr);
    if (na.source_terms) {
      n["decomposition"] = {
          {"pure", matrix_json(na.source_terms->pure)},
          {"loss_anchors", matrix_json(na.source_terms->loss_anchors)},
          {"loss_other_sources",
           matrix_json(na.source_terms->loss_other_sources)}};
    }
    if (na.anchor_terms) {
      n["decomposition"] = {
          {"prior", matrix_json(na.anchor_terms->prior)},
          {"gain_main", matrix_json(na.anchor_terms->gain_main)},
          {"loss_unknown_sources",
           matrix_json(na.anchor_terms->loss_unknown_sources)},
          {"loss_other_anchors",
           matrix_json(na.anchor_terms->loss_other_anchors)}};
    }
    nodes.push_back(n);
  }
  doc["nodes"] = nodes;
  if (!report.warnings.empty()) {
    doc["warnings"] = report.warnings;
  }
  return doc;
}

AnalysisReport report_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "analysis_report") {
    throw Error("not an analysis report document");
  }
  AnalysisReport report;
  report.confidence_k = j["confidence_k"].get<double>();
  const ParseResult parsed =
      parse_scenario(canonical_json_dump(j["scenario"]));
  if (!parsed.ok()) {
    throw Error("report carries an invalid scenario echo");
  }
  report.scenario = *parsed.scenario;
  for (const json& n : j["nodes"]) {
    NodeAnalysis na;
    na.node = NodeRef::parse(n["node"].get<std::string>());
    na.net = matrix_from_json(n["fim"]);
    na.ie = ellipse_from_json(n["ie"]);
    if (!n["ee"].is_null()) na.ee = ellipse_from_json(n["ee"]);
    na.eccentricity = n["eccentricity"].get<double>();
    na.area = n["area"].get<double>();
    if (!n["peb_m"].is_null()) na.peb_m = n["peb_m"].get<double>();
    report.nodes.push_back(na);
  }
  if (j.contains("warnings")) {
    for (const json& w : j["warnings"]) {
      report.warnings.push_back(w.get<std::string>());
    }
  }
  return report;
}

SweepTable sweep_csv(const Scenario& base, std::string_view axis,
                     std::span<const double> values) {
  SweepTable out;
  std::vector<NodeRef> nodes;
  for (const Source& s : base.sources) {
    if (!s.known_position) nodes.push_back({NodeRef::Kind::Source, s.id});
  }
  for (const UncertainAnchor& a : base.uncertain_anchors) {
    nodes.push_back({NodeRef::Kind::Anchor, a.id});
  }
  // Swept circle topologies regenerate anchors, but the analyzed node set
  // of an all-certain sweep is just the sources, so the header is stable.
  std::ostringstream csv;
  csv << "value";
  for (const NodeRef& n : nodes) {
    const std::string p = n.to_string();
    csv << "," << p << ".mu," << p << ".eta," << p << ".alpha_rad," << p
        << ".xi," << p << ".area," << p << ".peb_m";
  }
  csv << "\n";

  const std::vector<Scenario> scenarios = sweep_axis(base, axis, values);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    csv << fmt17(values[i]);
    try {
      const AnalysisReport report = analyze_scenario(scenarios[i]);
      for (const NodeRef& n : nodes) {
        const auto it =
            std::find_if(report.nodes.begin(), report.nodes.end(),
                         [&](const NodeAnalysis& na) { return na.node == n; });
        if (it == report.nodes.end()) {
          csv << ",,,,,,";
          continue;
        }
        csv << "," << fmt17(it->ie.major) << "," << fmt17(it->ie.minor) << ","
            << fmt17(it->ie.angle) << "," << fmt17(it->eccentricity) << ","
            << fmt17(it->area) << ","
            << (it->peb_m ? fmt17(*it->peb_m) : std::string());
      }
    } catch (const Error& e) {
      for (std::size_t c = 0; c < nodes.size(); ++c) csv << ",,,,,,";
      out.warnings.push_back("value " + fmt17(values[i]) +
                             " not analyzable: " + e.what());
    }
    csv << "\n";
  }
  out.csv = csv.str();
  return out;
}

namespace {

struct SvgFrame {
  double min_x, max_x, min_y, max_y;
  double scale;
  static constexpr double kWidth = 640.0;
  static constexpr double kHeight = 640.0;
  static constexpr double kMargin = 60.0;

  double px(double x) const { return kMargin + (x - min_x) * scale; }
  double py(double y) const { return kHeight - kMargin - (y - min_y) * scale; }
};

SvgFrame fit_frame(const std::vector<Vec2>& points, double pad) {
  SvgFrame f{};
  f.min_x = f.min_y = 1e300;
  f.max_x = f.max_y = -1e300;
  for (const Vec2& p : points) {
    f.min_x = std::min(f.min_x, p.x);
    f.max_x = std::max(f.max_x, p.x);
    f.min_y = std::min(f.min_y, p.y);
    f.max_y = std::max(f.max_y, p.y);
  }
  f.min_x -= pad;
  f.max_x += pad;
  f.min_y -= pad;
  f.max_y += pad;
  const double extent =
      std::max({f.max_x - f.min_x, f.max_y - f.min_y, 1e-6});
  // keep the frame square so meters are isotropic on screen
  const double cx = 0.5 * (f.min_x + f.max_x);
  const double cy = 0.5 * (f.min_y + f.max_y);
  f.min_x = cx - extent / 2;
  f.max_x = cx + extent / 2;
  f.min_y = cy - extent / 2;
  f.max_y = cy + extent / 2;
  f.scale = (SvgFrame::kWidth - 2 * SvgFrame::kMargin) / extent;
  return f;
}

double tick_step(double extent) {
  const double raw = extent / 8.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

void draw_axes(std::ostringstream& svg, const SvgFrame& f) {
  const double step = tick_step(f.max_x - f.min_x);
  svg << "<g stroke=\"#cccccc\" stroke-width=\"1\" font-size=\"11\" "
         "font-family=\"monospace\" fill=\"#444444\">\n";
  for (double x = std::ceil(f.min_x / step) * step; x <= f.max_x + 1e-9;
       x += step) {
    svg << "<line x1=\"" << fmt6(f.px(x)) << "\" y1=\"" << fmt6(f.py(f.min_y))
        << "\" x2=\"" << fmt6(f.px(x)) << "\" y2=\"" << fmt6(f.py(f.max_y))
        << "\"/>\n";
    svg << "<text x=\"" << fmt6(f.px(x)) << "\" y=\""
        << fmt6(f.py(f.min_y) + 16.0) << "\" text-anchor=\"middle\" "
        << "stroke=\"none\">" << fmt6(x) << "</text>\n";
  }
  for (double y = std::ceil(f.min_y / step) * step; y <= f.max_y + 1e-9;
       y += step) {
    svg << "<line x1=\"" << fmt6(f.px(f.min_x)) << "\" y1=\"" << fmt6(f.py(y))
        << "\" x2=\"" << fmt6(f.px(f.max_x)) << "\" y2=\"" << fmt6(f.py(y))
        << "\"/>\n";
    svg << "<text x=\"" << fmt6(f.px(f.min_x) - 8.0) << "\" y=\""
        << fmt6(f.py(y) + 4.0) << "\" text-anchor=\"end\" "
        << "stroke=\"none\">" << fmt6(y) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"" << fmt6(SvgFrame::kWidth / 2) << "\" y=\""
      << fmt6(SvgFrame::kHeight - 12.0)
      << "\" text-anchor=\"middle\" font-size=\"12\" "
         "font-family=\"monospace\" fill=\"#222222\">x [m]</text>\n";
}

void draw_ellipse(std::ostringstream& svg, const SvgFrame& f, const Vec2& at,
                  const EllipseParams& e, double k, const char* color,
                  bool dashed) {
  const double rx = std::sqrt(std::max(k * e.major, 0.0)) * f.scale;
  const double ry = std::sqrt(std::max(k * e.minor, 0.0)) * f.scale;
  // SVG y points down, so a counterclockwise world angle rotates clockwise.
  const double deg = -e.angle * 180.0 / std::numbers::pi;
  svg << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << fmt6(rx) << "\" ry=\""
      << fmt6(ry) << "\" transform=\"translate(" << fmt6(f.px(at.x)) << " "
      << fmt6(f.py(at.y)) << ") rotate(" << fmt6(deg) << ")\" fill=\"none\" "
      << "stroke=\"" << color << "\" stroke-width=\"1.5\""
      << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
}

}  // namespace

std::string render_report_svg(const AnalysisReport& report, double k,
                              const std::vector<NodeRef>& selected) {
  const Scenario& sc = report.scenario;
  std::vector<Vec2> pts = sc.all_anchor_positions();
  for (const Source& s : sc.sources) pts.push_back(s.position);

  std::vector<const NodeAnalysis*> chosen;
  for (const NodeAnalysis& na : report.nodes) {
    if (selected.empty() ||
        std::find(selected.begin(), selected.end(), na.node) !=
            selected.end()) {
      chosen.push_back(&na);
    }
  }
  if (!selected.empty() && chosen.size() != selected.size()) {
    throw UnknownNodeIdError("a requested node is not in the report");
  }

  double pad = 1.0;
  for (const NodeAnalysis* na : chosen) {
    pad = std::max(pad, std::sqrt(std::max(k * na->ie.major, 0.0)));
    if (na->ee) pad = std::max(pad, std::sqrt(k * na->ee->major));
  }
  const SvgFrame f = fit_frame(pts, pad);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << fmt6(SvgFrame::kWidth) << "\" height=\"" << fmt6(SvgFrame::kHeight)
      << "\" viewBox=\"0 0 " << fmt6(SvgFrame::kWidth) << " "
      << fmt6(SvgFrame::kHeight) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  draw_axes(svg, f);

  for (const NodeAnalysis* na : chosen) {
    Vec2 at{};
    if (na->node.kind == NodeRef::Kind::Source) {
      at = sc.source_by_id(na->node.id).position;
    } else {
      at = sc.uncertain_anchor_by_id(na->node.id).position;
    }
    draw_ellipse(svg, f, at, na->ie, k, "#1f77b4", false);
    if (na->ee) {
      draw_ellipse(svg, f, at, *na->ee, k, "#d62728", true);
    }
  }

  svg << "<g>\n";
  for (const Anchor& a : sc.certain_anchors) {
    svg << "<circle cx=\"" << fmt6(f.px(a.position.x)) << "\" cy=\""
        << fmt6(f.py(a.position.y))
        << "\" r=\"4\" fill=\"#2ca02c\" stroke=\"none\"/>\n";
  }
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    const double x = f.px(a.position.x);
    const double y = f.py(a.position.y);
    svg << "<path d=\"M " << fmt6(x) << " " << fmt6(y - 5.0) << " L "
        << fmt6(x + 5.0) << " " << fmt6(y) << " L " << fmt6(x) << " "
        << fmt6(y + 5.0) << " L " << fmt6(x - 5.0) << " " << fmt6(y)
        << " Z\" fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"1.5\"/>\n";
  }
  for (const Source& s : sc.sources) {
    const double x = f.px(s.position.x);
    const double y = f.py(s.position.y);
    svg << "<path d=\"M " << fmt6(x - 4.0) << " " << fmt6(y - 4.0) << " L "
        << fmt6(x + 4.0) << " " << fmt6(y + 4.0) << " M " << fmt6(x - 4.0)
        << " " << fmt6(y + 4.0) << " L " << fmt6(x + 4.0) << " "
        << fmt6(y - 4.0) << "\" stroke=\"#000000\" stroke-width=\"1.8\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g font-size=\"12\" font-family=\"monospace\" fill=\"#222222\">\n"
      << "<text x=\"16\" y=\"20\">IE (solid) / EE (dashed), k = " << fmt6(k)
      << "</text>\n"
      << "<text x=\"16\" y=\"36\">anchors: filled = certain, open = "
         "uncertain; x = source</text>\n</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string render_sweep_svg(const std::string& csv_text,
                             const std::string& metric) {
  std::istringstream in(csv_text);
  std::string header;
  if (!std::getline(in, header)) {
    throw Error("empty sweep table");
  }
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) cols.push_back(col);
  }
  const std::string suffix = "." + metric;
  std::vector<std::size_t> selected;
  std::vector<std::string> series_names;
  for (std::size_t c = 1; c < cols.size(); ++c) {
    if (cols[c].size() > suffix.size() &&
        cols[c].compare(cols[c].size() - suffix.size(), suffix.size(),
                        suffix) == 0) {
      selected.push_back(c);
      series_names.push_back(cols[c].substr(0, cols[c].size() - suffix.size()));
    }
  }
  if (selected.empty()) {
    throw Error("no column matches metric '" + metric + "'");
  }

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(selected.size());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(cols.size());
    xs.push_back(std::stod(cells[0]));
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const std::string& v = cells[selected[i]];
      ys[i].push_back(v.empty() ? std::nan("") : std::stod(v));
    }
  }
  if (xs.empty()) {
    throw Error("sweep table has no rows");
  }

  double min_x = xs.front(), max_x = xs.front();
  for (double x : xs) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
  }
  double min_y = 1e300, max_y = -1e300;
  for (const auto& series : ys) {
    for (double y : series) {
      if (std::isnan(y)) continue;
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (min_y > max_y) {
    throw Error("metric column has no values");
  }
  if (max_y - min_y < 1e-12) {
    max_y = min_y + 1.0;
  }
  if (max_x - min_x < 1e-12) {
    max_x = min_x + 1.0;
  }

  const double w = 640.0, h = 480.0, m = 60.0;
  auto px = [&](double x) { return m + (x - min_x) / (max_x - min_x) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - min_y) / (max_y - min_y) * (h - 2 * m); };

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(w)
      << "\" height=\"" << fmt6(h) << "\" viewBox=\"0 0 " << fmt6(w) << " "
      << fmt6(h) << "\">\n<rect width=\"100%\" height=\"100%\" "
      << "fill=\"#ffffff\"/>\n";
  svg << "<g stroke=\"#cccccc\" stroke-width=\"1\" font-size=\"11\" "
         "font-family=\"monospace\" fill=\"#444444\">\n";
  const double xstep = tick_step(max_x - min_x);
  for (double x = std::ceil(min_x / xstep) * xstep; x <= max_x + 1e-9;
       x += xstep) {
    svg << "<line x1=\"" << fmt6(px(x)) << "\" y1=\"" << fmt6(py(min_y))
        << "\" x2=\"" << fmt6(px(x)) << "\" y2=\"" << fmt6(py(max_y))
        << "\"/>\n<text x=\"" << fmt6(px(x)) << "\" y=\""
        << fmt6(py(min_y) + 16.0)
        << "\" text-anchor=\"middle\" stroke=\"none\">" << fmt6(x)
        << "</text>\n";
  }
  const double ystep = tick_step(max_y - min_y);
  for (double y = std::ceil(min_y / ystep) * ystep; y <= max_y + 1e-9;
       y += ystep) {
    svg << "<line x1=\"" << fmt6(px(min_x)) << "\" y1=\"" << fmt6(py(y))
        << "\" x2=\"" << fmt6(px(max_x)) << "\" y2=\"" << fmt6(py(y))
        << "\"/>\n<text x=\"" << fmt6(px(min_x) - 8.0) << "\" y=\""
        << fmt6(py(y) + 4.0) << "\" text-anchor=\"end\" stroke=\"none\">"
        << fmt6(y) << "</text>\n";
  }
  svg << "</g>\n";

  for (std::size_t s = 0; s < selected.size(); ++s) {
    const char* color = kColors[s % 6];
    svg << "<path d=\"";
    bool pen_down = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(ys[s][i])) {
        pen_down = false;
        continue;
      }
      svg << (pen_down ? " L " : " M ") << fmt6(px(xs[i])) << " "
          << fmt6(py(ys[s][i]));
      pen_down = true;
    }
    svg << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    svg << "<text x=\"" << fmt6(w - m + 4.0) << "\" y=\""
        << fmt6(m + 16.0 * s)
        << "\" font-size=\"11\" font-family=\"monospace\" fill=\"" << color
        << "\">" << series_names[s] << "</text>\n";
  }
  svg << "<text x=\"" << fmt6(w / 2) << "\" y=\"" << fmt6(h - 12.0)
      << "\" text-anchor=\"middle\" font-size=\"12\" "
         "font-family=\"monospace\" fill=\"#222222\">" << metric
      << " vs swept value</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rssloc
