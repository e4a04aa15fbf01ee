// Tests for strict scenario parsing and validation.

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "qcorr/scenario.hpp"

using namespace qcorr;
using namespace qcorr::cli;

namespace {

const std::string kSinglet = R"({
  "format_version": 1,
  "dimension": 4,
  "subsystems": [2, 2],
  "state": {"builtin": "singlet"},
  "projectors": [
    {"name": "A1", "spin": {"angle_deg": 0.0, "slot": 0}},
    {"name": "B1", "spin": {"angle_deg": 225.0, "slot": 1}},
    {"name": "A2", "spin": {"angle_deg": 90.0, "slot": 0}},
    {"name": "B2", "spin": {"angle_deg": 135.0, "slot": 1}}
  ],
  "analyses": {
    "rvr": {"max_subset": 4},
    "bell": {"alice": ["A1", "A2"], "bob": ["B1", "B2"], "maximize": true},
    "entropy": {}
  }
})";

}  // namespace

TEST_CASE("a builtin singlet scenario with spin projectors parses") {
    const ScenarioFile sc = parse_scenario(kSinglet);
    CHECK(sc.dimension == 4);
    CHECK(sc.projectors.size() == 4);
    CHECK(sc.rvr.has_value());
    CHECK(sc.bell_request.has_value());
    CHECK(sc.entropy_request.has_value());
    CHECK_FALSE(sc.hvm_request.has_value());
    CHECK(sc.projector_by_name("A2").spin_slot == 0);
    // The singlet builtin: both-up joint probability vanishes.
    CHECK(hilbert::trace_product(
              sc.state, {hilbert::tensor_product(hilbert::basis_projector(2, 0),
                                                 hilbert::basis_projector(2, 0))}) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("invalid JSON is a syntax error") {
    CHECK_THROWS_AS(parse_scenario("{ not json"), ScenarioSyntaxError);
}

TEST_CASE("unknown keys are rejected") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2,
      "state": {"builtin": "maximally_mixed"},
      "projektors": []
    })";
    CHECK_THROWS_WITH(parse_scenario(bad),
                      Catch::Matchers::ContainsSubstring("projektors"));
}

TEST_CASE("a density matrix with the wrong trace names the residual") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2,
      "state": {"matrix": [[[0.6, 0], [0, 0]], [[0, 0], [0.3, 0]]]}
    })";
    try {
        parse_scenario(bad);
        FAIL("expected ScenarioValidationError");
    } catch (const ScenarioValidationError& e) {
        CHECK(std::string(e.what()).find("trace") != std::string::npos);
        CHECK(std::string(e.what()).find("0.1") != std::string::npos);
    }
}

TEST_CASE("unknown builtins are rejected") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2, "state": {"builtin": "tripel"}
    })";
    CHECK_THROWS_AS(parse_scenario(bad), UnknownBuiltinError);
}

TEST_CASE("angles outside [0, 360) are rejected") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2, "subsystems": [2],
      "state": {"builtin": "maximally_mixed"},
      "projectors": [{"name": "P", "spin": {"angle_deg": 360.0, "slot": 0}}]
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("spin projectors demand a qubit slot") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 3, "subsystems": [3],
      "state": {"builtin": "maximally_mixed"},
      "projectors": [{"name": "P", "spin": {"angle_deg": 10.0, "slot": 0}}]
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("non-idempotent projector matrices are rejected with the name") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2,
      "state": {"builtin": "maximally_mixed"},
      "projectors": [{"name": "Q", "matrix": [[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]}]
    })";
    try {
        parse_scenario(bad);
        FAIL("expected ScenarioValidationError");
    } catch (const ScenarioValidationError& e) {
        CHECK(std::string(e.what()).find("'Q'") != std::string::npos);
        CHECK(std::string(e.what()).find("idempotent") != std::string::npos);
    }
}

TEST_CASE("duplicate projector names are rejected") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2, "subsystems": [2],
      "state": {"builtin": "maximally_mixed"},
      "projectors": [
        {"name": "P", "spin": {"angle_deg": 10.0, "slot": 0}},
        {"name": "P", "spin": {"angle_deg": 20.0, "slot": 0}}
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("bell requests must reference declared projectors") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 4, "subsystems": [2, 2],
      "state": {"builtin": "singlet"},
      "projectors": [{"name": "A1", "spin": {"angle_deg": 0.0, "slot": 0}}],
      "analyses": {"bell": {"alice": ["A1", "A9"], "bob": ["A1", "A1"]}}
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("product states multiply to the declared dimension") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 4, "subsystems": [2, 2],
      "state": {"product": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("hvm models validate weights and responses") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2,
      "state": {"builtin": "maximally_mixed"},
      "hvm": [{"name": "m", "weights": [0.5, 0.6], "observables": ["A"],
               "responses": [[1], [0]]}]
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);

    const std::string bad2 = R"({
      "format_version": 1, "dimension": 2,
      "state": {"builtin": "maximally_mixed"},
      "hvm": [{"name": "m", "weights": [1.0], "observables": ["A"], "responses": [[2]]}]
    })";
    CHECK_THROWS_AS(parse_scenario(bad2), ScenarioSyntaxError);
}

TEST_CASE("analysis requests referencing unknown hvm models fail") {
    const std::string bad = R"({
      "format_version": 1, "dimension": 2,
      "state": {"builtin": "maximally_mixed"},
      "analyses": {"hvm": {"expectations": [{"model": "ghost", "observables": ["A"]}]}}
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ScenarioValidationError);
}

TEST_CASE("format_version and dimension are mandatory") {
    CHECK_THROWS_AS(parse_scenario(R"({"dimension": 2, "state": {"builtin": "maximally_mixed"}})"),
                    ScenarioSyntaxError);
    CHECK_THROWS_AS(parse_scenario(R"({"format_version": 1, "state": {}})"),
                    ScenarioSyntaxError);
    CHECK_THROWS_AS(
        parse_scenario(
            R"({"format_version": 7, "dimension": 2, "state": {"builtin": "maximally_mixed"}})"),
        ScenarioValidationError);
}
