#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rssloc/mc.hpp"
#include "rssloc/report.hpp"
#include "rssloc/scenario_io.hpp"

namespace {

using namespace rssloc;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSingular = 2;
constexpr int kExitVerification = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path + "'");
  }
  out << content;
}

Scenario load_scenario(const std::string& path) {
  const ParseResult result = parse_scenario(read_file(path));
  if (!result.ok()) {
    std::ostringstream msg;
    msg << "invalid scenario '" << path << "':";
    for (const ValidationIssue& issue : result.errors) {
      msg << "\n  " << issue.path << ": " << issue.message;
    }
    throw Error(msg.str());
  }
  return *result.scenario;
}

// "1,2,3" or "start:stop:step" (inclusive of stop within half a step).
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  if (text.empty()) {
    return values;
  }
  if (text.find(':') != std::string::npos) {
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
        step <= 0.0) {
      throw Error("range must be start:stop:step with positive step");
    }
    for (int i = 0;; ++i) {
      const double v = start + i * step;
      if (v > stop + 0.5 * step) break;
      values.push_back(v);
      if (i > 1000000) throw Error("range produces too many values");
    }
  } else {
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      values.push_back(std::stod(item));
    }
  }
  return values;
}

std::vector<NodeRef> parse_nodes(const std::string& text) {
  std::vector<NodeRef> nodes;
  if (text.empty()) return nodes;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    nodes.push_back(NodeRef::parse(item));
  }
  return nodes;
}

int cmd_analyze(const std::string& scenario_path, const std::string& out_path,
                double k_override) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = load_scenario(scenario_path);
  if (k_override > 0.0) {
    sc.confidence_k = k_override;
  }
  const AnalysisReport report = analyze_scenario(sc);
  for (const std::string& w : report.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  const std::string text = canonical_json_dump(report_to_json(report));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  // timing stays on the diagnostics stream so report bytes are reproducible
  std::cerr << "analyzed " << report.nodes.size() << " node(s) in "
            << std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
                   .count()
            << " ms\n";
  return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& axis,
              const std::string& values_text, const std::string& out_path) {
  const Scenario sc = load_scenario(scenario_path);
  const std::vector<double> values = parse_values(values_text);
  const SweepTable table = sweep_csv(sc, axis, values);
  for (const std::string& w : table.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (out_path.empty()) {
    std::cout << table.csv;
  } else {
    write_file(out_path, table.csv);
  }
  return kExitOk;
}

int cmd_plot(const std::string& input_path, double k,
             const std::string& nodes_text, const std::string& metric,
             const std::string& out_path) {
  const std::string input = read_file(input_path);
  std::string svg;
  const auto first = input.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && input[first] == '{') {
    const AnalysisReport report =
        report_from_json(nlohmann::json::parse(input));
    const double scale = k > 0.0 ? k : report.confidence_k;
    svg = render_report_svg(report, scale, parse_nodes(nodes_text));
  } else {
    svg = render_sweep_svg(input, metric);
  }
  if (out_path.empty()) {
    std::cout << svg;
  } else {
    write_file(out_path, svg);
  }
  return kExitOk;
}

int cmd_verify(const std::string& scenario_path, const std::string& suite,
               int trials, std::uint64_t seed, const std::string& out_path) {
  nlohmann::json checks = nlohmann::json::array();
  bool all_pass = true;
  auto add_check = [&](const std::string& name, double measured,
                       double tolerance, bool pass) {
    checks.push_back({{"name", name},
                      {"measured", measured},
                      {"tolerance", tolerance},
                      {"pass", pass}});
    all_pass = all_pass && pass;
  };

  if (suite == "gradient-check") {
    const Scenario sc = load_scenario(scenario_path);
    const double err = gradient_check_max_rel_error(sc, 100, seed);
    add_check("score vs central differences, max relative error", err, 1e-5,
              err < 1e-5);
  } else if (suite == "empirical-fim") {
    const Scenario sc = load_scenario(scenario_path);
    const int t = trials > 0 ? trials : 100000;
    const EmpiricalFim emp = empirical_fim(sc, t, seed);
    // 3% at 1e5 trials, scaled by the Monte-Carlo 1/sqrt(trials) law
    const double tol = 0.03 * std::sqrt(100000.0 / t);
    add_check("score outer-product vs analytic FIM, relative Frobenius",
              emp.rel_frobenius, tol, emp.rel_frobenius < tol);
  } else if (suite == "crlb-coverage") {
    const Scenario sc = load_scenario(scenario_path);
    const std::vector<NodeRef> nodes = parameter_nodes(sc);
    if (nodes.empty()) {
      throw EmptyParameterVectorError("nothing to verify");
    }
    const int t = trials > 0 ? trials : 2000;
    const ConfidenceScale conf = ConfidenceScale::from_k(sc.confidence_k);
    const CoverageResult cov = crlb_coverage(sc, nodes.front(), t, conf, seed);
    const double tol = 3.0 * cov.mc_stderr;
    add_check("error-ellipse coverage vs P_e = " + std::to_string(conf.p_e),
              cov.fraction - conf.p_e, tol,
              std::abs(cov.fraction - conf.p_e) <= tol);
  } else if (suite == "schur-oracle") {
    const int count = trials > 0 ? trials : 20;
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      const Scenario sc = random_scenario(seed + i);
      for (const NodeRef& node : parameter_nodes(sc)) {
        const InfoMatrix2 oracle = marginal_fim_full_inverse(sc, node);
        InfoMatrix2 net;
        if (node.kind == NodeRef::Kind::Source) {
          net = source_marginal_fim(sc, node.id).net;
        } else {
          net = anchor_marginal_fim(sc, node.id).net;
        }
        const double scale =
            std::max({std::abs(oracle.f11), std::abs(oracle.f22), 1e-300});
        worst = std::max(
            worst, std::max({std::abs(net.f11 - oracle.f11),
                             std::abs(net.f12 - oracle.f12),
                             std::abs(net.f22 - oracle.f22)}) /
                       scale);
      }
    }
    add_check("block elimination vs full-inverse oracle, max relative error",
              worst, 1e-8, worst < 1e-8);
  } else {
    throw Error("unknown suite '" + suite +
                "' (gradient-check, empirical-fim, crlb-coverage, "
                "schur-oracle)");
  }

  nlohmann::json doc = {{"kind", "verification_report"},
                        {"suite", suite},
                        {"seed", static_cast<std::int64_t>(seed)},
                        {"pass", all_pass},
                        {"checks", checks}};
  const std::string text = canonical_json_dump(doc);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return all_pass ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rssloc - Fisher information, error bounds and their ellipse geometry "
      "for RSS source localization with uncertain anchors"};
  app.require_subcommand(0, 1);

  bool show_schema = false;
  app.add_flag("--schema", show_schema, "print the scenario document schema");

  std::string scenario_path, out_path, axis, values_text, nodes_text;
  std::string suite = "schur-oracle";
  std::string metric = "xi";
  double k_flag = 0.0;
  int trials = 0;
  std::uint64_t seed = 1;

  CLI::App* analyze =
      app.add_subcommand("analyze", "bounds and ellipses for a scenario");
  analyze->add_option("scenario", scenario_path, "scenario file")->required();
  analyze->add_option("--out", out_path, "report file (default stdout)");
  analyze->add_option("--k", k_flag, "confidence scale override");

  CLI::App* sweep =
      app.add_subcommand("sweep", "analyze along a parameter axis");
  sweep->add_option("scenario", scenario_path, "scenario file")->required();
  sweep->add_option("--axis", axis, "parameter path, e.g. source.x, delta, n")
      ->required();
  sweep->add_option("--values", values_text, "comma list or start:stop:step")
      ->required();
  sweep->add_option("--out", out_path, "CSV file (default stdout)");

  CLI::App* plot = app.add_subcommand("plot", "render a report or sweep as SVG");
  plot->add_option("input", scenario_path, "analysis report or sweep CSV")
      ->required();
  plot->add_option("--k", k_flag, "ellipse scale (default: report value)");
  plot->add_option("--nodes", nodes_text,
                   "comma list like source:1,anchor:5 (default: all)");
  plot->add_option("--metric", metric,
                   "sweep column family: mu, eta, alpha_rad, xi, area, peb_m");
  plot->add_option("--out", out_path, "SVG file (default stdout)");

  CLI::App* verify =
      app.add_subcommand("verify", "run a statistical verification suite");
  verify->add_option("scenario", scenario_path, "scenario file")->required();
  verify->add_option("--suite", suite,
                     "gradient-check | empirical-fim | crlb-coverage | "
                     "schur-oracle");
  verify->add_option("--trials", trials, "trial/scenario count");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--out", out_path, "report file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (show_schema) {
      std::cout << scenario_schema_doc();
      return kExitOk;
    }
    if (analyze->parsed()) {
      return cmd_analyze(scenario_path, out_path, k_flag);
    }
    if (sweep->parsed()) {
      return cmd_sweep(scenario_path, axis, values_text, out_path);
    }
    if (plot->parsed()) {
      return cmd_plot(scenario_path, k_flag, nodes_text, metric, out_path);
    }
    if (verify->parsed()) {
      return cmd_verify(scenario_path, suite, trials, seed, out_path);
    }
    std::cout << app.help();
    return kExitOk;
  } catch (const SingularFimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const SingularBlockError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const InsufficientConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
