#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rssloc/scenario_io.hpp"

using namespace rssloc;
constexpr double kPi = std::numbers::pi;

namespace {

const char* kMinimalDoc = R"({
  "schema_version": 1,
  "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
  "anchors": [
    {"id": 1, "kind": "certain", "x_m": 3.0, "y_m": 0.0},
    {"id": 2, "kind": "certain", "x_m": -1.5, "y_m": 2.598},
    {"id": 3, "kind": "certain", "x_m": -1.5, "y_m": -2.598}
  ],
  "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
})";

}  // namespace

TEST_CASE("minimal document parses") {
  const ParseResult r = parse_scenario(kMinimalDoc);
  REQUIRE(r.ok());
  CHECK(r.scenario->anchor_count() == 3);
  CHECK(r.scenario->uncertain_anchors.empty());
  CHECK(r.scenario->sources.size() == 1);
  CHECK(r.scenario->sources[0].sample_count == 1);
  CHECK_FALSE(r.scenario->sources[0].known_position);
  CHECK(r.scenario->confidence_k == 1.0);
}

TEST_CASE("syntax errors are reported with location") {
  const ParseResult r = parse_scenario("{ not json");
  CHECK_FALSE(r.ok());
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].path == "$");
}

TEST_CASE("uncertain anchor without a prior is rejected by field path") {
  const char* doc = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "anchors": [
      {"id": 4, "kind": "uncertain", "x_m": 3.0, "y_m": 0.0},
      {"id": 5, "kind": "certain", "x_m": 0.0, "y_m": 3.0}
    ],
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  const ParseResult r = parse_scenario(doc);
  CHECK_FALSE(r.ok());
  bool found = false;
  for (const ValidationIssue& e : r.errors) {
    if (e.path.find("anchors[0]") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("below-reference distances name the source-anchor pair") {
  const char* doc = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "anchors": [
      {"id": 1, "kind": "certain", "x_m": 0.5, "y_m": 0.0},
      {"id": 2, "kind": "certain", "x_m": 0.0, "y_m": 3.0},
      {"id": 3, "kind": "certain", "x_m": 3.0, "y_m": 3.0}
    ],
    "sources": [{"id": 7, "x_m": 0.0, "y_m": 0.0}]
  })";
  const ParseResult r = parse_scenario(doc);
  CHECK_FALSE(r.ok());
  REQUIRE_FALSE(r.errors.empty());
  bool names_pair = false;
  for (const ValidationIssue& e : r.errors) {
    if (e.message.find("source 7") != std::string::npos &&
        e.message.find("anchor 1") != std::string::npos) {
      names_pair = true;
    }
  }
  CHECK(names_pair);
}

TEST_CASE("duplicate ids are rejected") {
  const char* doc = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "anchors": [
      {"id": 1, "kind": "certain", "x_m": 3.0, "y_m": 0.0},
      {"id": 1, "kind": "certain", "x_m": 0.0, "y_m": 3.0}
    ],
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  CHECK_FALSE(parse_scenario(doc).ok());
}

TEST_CASE("delta sugar expands and conflicts are caught") {
  const char* good = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "anchors": [
      {"id": 1, "kind": "uncertain", "x_m": 5.0, "y_m": 0.0, "delta_m": 3.0},
      {"id": 2, "kind": "certain", "x_m": 0.0, "y_m": 5.0},
      {"id": 3, "kind": "certain", "x_m": -5.0, "y_m": 0.0}
    ],
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  const ParseResult r = parse_scenario(good);
  REQUIRE(r.ok());
  CHECK(r.scenario->uncertain_anchors[0].prior_cov.c11 == 9.0);
  CHECK(r.scenario->uncertain_anchors[0].prior_cov.c12 == 0.0);

  const char* conflicting = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "anchors": [
      {"id": 1, "kind": "uncertain", "x_m": 5.0, "y_m": 0.0, "delta_m": 3.0,
       "prior_cov_m2": [[4.0, 0.0], [0.0, 4.0]]},
      {"id": 2, "kind": "certain", "x_m": 0.0, "y_m": 5.0},
      {"id": 3, "kind": "certain", "x_m": -5.0, "y_m": 0.0}
    ],
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  CHECK_FALSE(parse_scenario(conflicting).ok());
}

TEST_CASE("circle topology generates the cardinal points") {
  const TopologySpec spec = CircleTopology{4, 5.0, 0.0};
  const std::vector<Anchor> anchors = generate_topology(spec);
  REQUIRE(anchors.size() == 4);
  CHECK(anchors[0].position.x == doctest::Approx(5.0));
  CHECK(anchors[0].position.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(anchors[1].position.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(anchors[1].position.y == doctest::Approx(5.0));
  CHECK(anchors[2].position.x == doctest::Approx(-5.0));
  CHECK(anchors[3].position.y == doctest::Approx(-5.0));
  CHECK(anchors[0].id == 1);
  CHECK(anchors[3].id == 4);
}

TEST_CASE("circle topology spacing is exactly 2 pi / n") {
  const int n = 64;
  const std::vector<Anchor> anchors =
      generate_topology(CircleTopology{n, 5.0, kPi / n});
  for (int i = 0; i + 1 < n; ++i) {
    const double a1 =
        std::atan2(anchors[i].position.y, anchors[i].position.x);
    const double a2 =
        std::atan2(anchors[i + 1].position.y, anchors[i + 1].position.x);
    double diff = a2 - a1;
    while (diff <= -kPi) diff += 2.0 * kPi;
    while (diff > kPi) diff -= 2.0 * kPi;
    CHECK(std::abs(diff - 2.0 * kPi / n) < 1e-12);
  }
}

TEST_CASE("seeded topologies are deterministic") {
  const TopologySpec irregular =
      IrregularTopology{10, 9, {-10.0, -10.0}, {10.0, 10.0}};
  const auto a = generate_topology(irregular);
  const auto b = generate_topology(irregular);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position.x == b[i].position.x);
    CHECK(a[i].position.y == b[i].position.y);
  }
  const TopologySpec clustered = ClusteredTopology{
      {{{0.0, 0.0}, 5, 2.0}, {{8.0, 8.0}, 4, 1.5}}, 3};
  const auto c = generate_topology(clustered);
  CHECK(c.size() == 9);
  CHECK(c.back().id == 9);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::hypot(c[i].position.x, c[i].position.y) <= 2.0 + 1e-12);
  }
}

TEST_CASE("grid topology is a centered row-major lattice") {
  const auto grid = generate_topology(GridTopology{2, 3, 2.0});
  REQUIRE(grid.size() == 6);
  CHECK(grid[0].position.x == doctest::Approx(-2.0));
  CHECK(grid[0].position.y == doctest::Approx(-1.0));
  CHECK(grid[2].position.x == doctest::Approx(2.0));
  CHECK(grid[5].position.y == doctest::Approx(1.0));
}

TEST_CASE("topology documents parse, expand and round-trip") {
  const char* doc = R"({
  "analysis": {
    "confidence_k": 1
  },
  "model": {
    "d0_m": 1,
    "gamma": 3.5,
    "p0_dbm": 0,
    "sigma_db": 5
  },
  "schema_version": 1,
  "sources": [
    {
      "id": 1,
      "known_position": false,
      "sample_count": 1,
      "x_m": 4,
      "y_m": 0
    }
  ],
  "topology": {
    "d_m": 5,
    "kind": "circle",
    "n": 64,
    "phi1_rad": 0,
    "uncertain": {
      "delta_m": 3,
      "ids": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16],
      "prior_count": 1
    }
  }
})";
  const ParseResult r = parse_scenario(doc);
  REQUIRE(r.ok());
  const Scenario& sc = *r.scenario;
  CHECK(sc.anchor_count() == 64);
  CHECK(sc.uncertain_anchors.size() == 16);
  // first-quadrant anchors (bearing in [0, pi/2)) are the uncertain ones
  for (const UncertainAnchor& a : sc.uncertain_anchors) {
    CHECK(a.position.x > -1e-9);
    CHECK(a.position.y > -1e-9);
    CHECK(a.prior_cov.c11 == 9.0);
  }
  // canonical serialization is a fixed point
  const std::string once = serialize_scenario(sc);
  const ParseResult again = parse_scenario(once);
  REQUIRE(again.ok());
  const std::string twice = serialize_scenario(*again.scenario);
  CHECK(once == twice);
}

TEST_CASE("serialize/parse round trip restores every field") {
  const Scenario sc = random_scenario(77);
  const std::string text = serialize_scenario(sc);
  const ParseResult r = parse_scenario(text);
  REQUIRE(r.ok());
  CHECK(serialize_scenario(*r.scenario) == text);
  CHECK(r.scenario->certain_anchors.size() == sc.certain_anchors.size());
  CHECK(r.scenario->uncertain_anchors.size() == sc.uncertain_anchors.size());
  for (std::size_t i = 0; i < sc.uncertain_anchors.size(); ++i) {
    CHECK(r.scenario->uncertain_anchors[i].prior_cov.c12 ==
          sc.uncertain_anchors[i].prior_cov.c12);
    CHECK(r.scenario->uncertain_anchors[i].prior_count ==
          sc.uncertain_anchors[i].prior_count);
  }
}

TEST_CASE("degree suffix is honored for the ring rotation") {
  const char* doc = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "topology": {"kind": "circle", "n": 4, "d_m": 5.0, "phi1_deg": 90.0},
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  const ParseResult r = parse_scenario(doc);
  REQUIRE(r.ok());
  CHECK(r.scenario->certain_anchors[0].position.x ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.scenario->certain_anchors[0].position.y == doctest::Approx(5.0));
}

TEST_CASE("sweeping the source x coordinate") {
  const ParseResult base = parse_scenario(kMinimalDoc);
  REQUIRE(base.ok());
  std::vector<double> values;
  for (int i = 0; i <= 20; ++i) values.push_back(0.5 * i);
  const std::vector<Scenario> swept =
      sweep_axis(*base.scenario, "source.x", values);
  CHECK(swept.size() == 21);
  CHECK(swept[4].sources[0].position.x == 2.0);
  CHECK(swept[4].sources[0].position.y == 0.0);
  // the values keep going through geometrically invalid points; analysis
  // decides what to do with them
  CHECK(swept[6].sources[0].position.x == 3.0);
}

TEST_CASE("sweeping delta rewrites every prior") {
  Scenario base;
  base.model = {0.0, 3.5, 1.0, 5.0};
  base.certain_anchors = generate_topology(CircleTopology{6, 5.0, 0.0});
  base.uncertain_anchors.push_back(
      {base.certain_anchors.back().position, 99, Cov2::isotropic(1.0), 1});
  base.certain_anchors.pop_back();
  base.sources.push_back({{0.0, 0.0}, 1, 1, false});
  const std::vector<double> deltas{0.5, 1.0, 2.0, 3.0};
  const auto swept = sweep_axis(base, "delta", deltas);
  REQUIRE(swept.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(swept[i].uncertain_anchors[0].prior_cov.c11 ==
          doctest::Approx(deltas[i] * deltas[i]));
  }
}

TEST_CASE("sweeping n regenerates the ring") {
  const char* doc = R"({
    "schema_version": 1,
    "model": {"p0_dbm": 0.0, "gamma": 3.5, "d0_m": 1.0, "sigma_db": 5.0},
    "topology": {"kind": "circle", "n": 4, "d_m": 5.0, "phi1_rad": 0.0},
    "sources": [{"id": 1, "x_m": 0.0, "y_m": 0.0}]
  })";
  const ParseResult base = parse_scenario(doc);
  REQUIRE(base.ok());
  const std::vector<double> ns{4, 8, 16, 32, 64};
  const auto swept = sweep_axis(*base.scenario, "n", ns);
  REQUIRE(swept.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(swept[i].certain_anchors.size() == static_cast<std::size_t>(ns[i]));
  }
}

TEST_CASE("sweep rejects unknown axes and empty inputs politely") {
  const ParseResult base = parse_scenario(kMinimalDoc);
  REQUIRE(base.ok());
  CHECK(sweep_axis(*base.scenario, "source.x", {}).empty());
  CHECK_THROWS_AS(
      (void)sweep_axis(*base.scenario, "model.gamma", std::vector<double>{1.0}),
      UnknownParameterPathError);
  CHECK_THROWS_AS(
      (void)sweep_axis(*base.scenario, "delta", std::vector<double>{1.0}),
      UnknownParameterPathError);
  CHECK_THROWS_AS(
      (void)sweep_axis(*base.scenario, "n", std::vector<double>{4.0}),
      UnknownParameterPathError);
}

TEST_CASE("random scenarios are deterministic in the seed") {
  const Scenario a = random_scenario(5);
  const Scenario b = random_scenario(5);
  CHECK(serialize_scenario(a) == serialize_scenario(b));
  const Scenario c = random_scenario(6);
  CHECK(serialize_scenario(a) != serialize_scenario(c));
}

TEST_CASE("schema doc mentions every top-level key") {
  const std::string doc = scenario_schema_doc();
  for (const char* key : {"schema_version", "model", "anchors", "topology",
                          "sources", "analysis", "prior_cov_m2", "delta_m"}) {
    CHECK(doc.find(key) != std::string::npos);
  }
}
