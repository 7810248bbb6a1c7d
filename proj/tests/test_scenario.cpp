#include "rigmaint/errors.hpp"
#include "rigmaint/framework_io.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/scenario.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace rigmaint;

namespace {

const std::string kData = RIGMAINT_TEST_DATA;
const std::string kScenarios = RIGMAINT_SCENARIO_DIR;

const char* kMinimal = R"({
  "schema_version": 1,
  "framework": {"n": 4, "positions": [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]},
  "duration": 1.0
})";

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_scenario(text, "s.json", overrides);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(FrameworkIo, CompleteGraphByDefault) {
  const FrameworkFile f = load_framework(kData + "/k4.json");
  EXPECT_EQ(f.graph.vertex_count(), 4);
  EXPECT_EQ(f.graph.edge_count(), 6);
  EXPECT_FALSE(f.explicit_edges);
  EXPECT_FALSE(f.weights.has_value());
  EXPECT_TRUE(f.obstacles.points.empty());
  EXPECT_DOUBLE_EQ(f.positions(2, 1), 1.0);
}

TEST(FrameworkIo, ExplicitEdgesObstaclesAndWeights) {
  const FrameworkFile f = load_framework(kData + "/k4_weighted.json");
  EXPECT_TRUE(f.explicit_edges);
  ASSERT_TRUE(f.weights.has_value());
  EXPECT_DOUBLE_EQ(f.weights->l_min, 0.5);
  ASSERT_EQ(f.obstacles.points.size(), 1u);
  const WeightedFramework wf = to_weighted_framework(f);
  const RigidityReport r = rigidity_report(wf);
  EXPECT_TRUE(r.is_rigid);
  for (Eigen::Index k = 0; k < wf.weights().size(); ++k) {
    EXPECT_GT(wf.weights()(k), 0.0);
    EXPECT_LE(wf.weights()(k), 1.0);
  }
}

TEST(FrameworkIo, MalformedJsonReportsLineAndColumn) {
  try {
    load_framework(kData + "/malformed.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("malformed.json:4:"), std::string::npos) << msg;
  }
}

TEST(FrameworkIo, RejectsUnknownFieldsAndBadShapes) {
  EXPECT_THROW(load_framework(kData + "/unknown_field.json"), ParseError);
  EXPECT_THROW(load_framework(kData + "/does_not_exist.json"), ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3, "positions": [[0,0,0],[1,0,0]]})"), ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 2, "positions": [[0,0,0],[1,0,0]]})"), ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3, "positions": [[0,0,0],[1,0],[0,1,0]]})"), ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3, "positions": [[0,0,0],[1,0,"x"],[0,1,0]]})"), ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3, "positions": [[0,0,0],[1,0,0],[0,1,0]], "edges": [[0,0]]})"),
               ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3, "positions": [[0,0,0],[1,0,0],[0,1,0]], "edges": [[0,3]]})"),
               ParseError);
  EXPECT_THROW(parse_framework(R"({"n": 3.5, "positions": []})"), ParseError);
  EXPECT_THROW(parse_framework(R"([1, 2, 3])"), ParseError);
}

TEST(FrameworkIo, OverridesEditTheDocument) {
  const FrameworkFile f = load_framework(kData + "/k4.json", {"positions.0.2=3.5", "obstacles=[[9,9,9]]"});
  EXPECT_DOUBLE_EQ(f.positions(0, 2), 3.5);
  ASSERT_EQ(f.obstacles.points.size(), 1u);
  EXPECT_THROW(load_framework(kData + "/k4.json", {"positions.7.0=1"}), ParseError);
  EXPECT_THROW(load_framework(kData + "/k4.json", {"positions.a.0=1"}), ParseError);
  EXPECT_THROW(load_framework(kData + "/k4.json", {"n.x=1"}), ParseError);
  EXPECT_THROW(load_framework(kData + "/k4.json", {"novalue"}), ParseError);
  EXPECT_THROW(load_framework(kData + "/k4.json", {"a..b=1"}), ParseError);
}

TEST(FrameworkIo, ReportJsonHasTheDocumentedFields) {
  const FrameworkFile f = load_framework(kData + "/k4.json");
  const std::string j = report_to_json(rigidity_report(to_weighted_framework(f)));
  for (const char* key : {"\"rank\"", "\"eigenvalues\"", "\"lambda7\"", "\"lambda8\"", "\"gap\"", "\"is_rigid\"",
                          "\"rank_rigid\"", "\"null_space\""}) {
    EXPECT_NE(j.find(key), std::string::npos) << key;
  }
}

TEST(Scenario, MinimalUsesDefaults) {
  const Scenario s = parse_scenario(kMinimal);
  const Scenario d;
  EXPECT_EQ(s.agent_count(), 4);
  EXPECT_EQ(s.graph.edge_count(), 6);
  EXPECT_DOUBLE_EQ(s.duration, 1.0);
  EXPECT_DOUBLE_EQ(s.dt_ctrl, d.dt_ctrl);
  EXPECT_EQ(s.est_substeps, d.est_substeps);
  EXPECT_EQ(s.seed, d.seed);
  EXPECT_DOUBLE_EQ(s.gains.k1, d.gains.k1);
  EXPECT_DOUBLE_EQ(s.weights.D, d.weights.D);
  EXPECT_TRUE(s.modes.controller);
  EXPECT_FALSE(s.modes.oracle_consensus);
  EXPECT_EQ(s.tick_count(), 100);
}

TEST(Scenario, DemoLoads) {
  const Scenario s = load_scenario(kScenarios + "/demo.json");
  EXPECT_EQ(s.agent_count(), 6);
  EXPECT_EQ(s.obstacles.points.size(), 3u);
  EXPECT_EQ(s.exogenous.size(), 2u);
  EXPECT_EQ(s.special_agent, 3);
  EXPECT_NEAR(s.dt_est(), s.dt_ctrl / s.est_substeps, 1e-18);
  // Unspecified velocity components default to zero.
  EXPECT_EQ(s.exogenous[0].segments[0].velocity, Vec3(0.15, 0.0, 0.0));
}

TEST(Scenario, RequiredFieldsAndVersion) {
  EXPECT_NE(error_of(R"({"framework": {"n": 3, "positions": [[0,0,0],[1,0,0],[0,1,0]]}, "duration": 1})")
                .find("schema_version"),
            std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"schema_version=2"}).find("unsupported"), std::string::npos);
  EXPECT_NE(error_of(R"({"schema_version": 1, "duration": 1})").find("framework"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"duration=null"}).find("duration"), std::string::npos);
}

TEST(Scenario, UnknownKeysAreRejectedWithTheirPath) {
  EXPECT_NE(error_of(kMinimal, {"gains.k4=1"}).find("s.json.gains.k4"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"durration=1"}).find("durration"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"framework.weights={}"}).find("weights"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"modes.fast=true"}).find("fast"), std::string::npos);
}

TEST(Scenario, TypeErrors) {
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"seed=-1"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"seed=1.5"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"modes.controller=1"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"est_substeps=2.5"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"gains.k1=fast"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"exogenous=[{\"agent\":0}]"}), ParseError);
}

TEST(Scenario, DtEstMustDivideDtCtrl) {
  const Scenario s = parse_scenario(kMinimal, "s", {"dt_ctrl=0.01", "dt_est=0.0005"});
  EXPECT_EQ(s.est_substeps, 20);
  EXPECT_NEAR(s.dt_est(), 0.0005, 1e-15);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"dt_est=0.003"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"dt_est=0"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"dt_est=0.02"}), ParseError);
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"dt_est=0.001", "est_substeps=5"}), ParseError);
  EXPECT_NO_THROW(parse_scenario(kMinimal, "s", {"dt_est=0.001", "est_substeps=10"}));
}

TEST(Scenario, RangeValidationRejects) {
  for (const char* o : {"special_agent=4", "special_agent=-1", "dt_ctrl=0", "est_substeps=0", "duration=-1",
                        "warmup=-0.5", "v_max=0", "noise.sigma_range=-0.1", "init.position_noise=-1",
                        "oracle_every=0", "pass.max_spikes=-1", "gains.k1=0", "potential.b=0",
                        "weights.l_0=0.5", "exogenous=[{\"agent\":9,\"segments\":[]}]",
                        "exogenous=[{\"agent\":0,\"segments\":[{\"t_start\":2,\"t_end\":1}]}]"}) {
    EXPECT_THROW(parse_scenario(kMinimal, "s", {o}), Error) << o;
  }
  EXPECT_THROW(parse_scenario(kMinimal, "s", {"special_agent=4"}), ScenarioRejected);
}

TEST(Scenario, RoundTripsThroughJson) {
  const Scenario a = load_scenario(kScenarios + "/demo.json", {"noise.sigma_range=0.01", "modes.oracle_consensus=true"});
  const std::string text = scenario_to_json(a);
  const Scenario b = parse_scenario(text);
  EXPECT_EQ(scenario_to_json(b), text);
  EXPECT_EQ(b.graph.edges(), a.graph.edges());
  EXPECT_EQ(b.positions, a.positions);
  EXPECT_EQ(b.seed, a.seed);
  EXPECT_EQ(b.est_substeps, a.est_substeps);
  EXPECT_DOUBLE_EQ(b.noise.sigma_range, 0.01);
  EXPECT_TRUE(b.modes.oracle_consensus);
  ASSERT_EQ(b.exogenous.size(), a.exogenous.size());
  EXPECT_EQ(b.exogenous[1].segments[1].velocity, a.exogenous[1].segments[1].velocity);
}

TEST(Scenario, OverridesCreateMissingObjects) {
  const Scenario s = parse_scenario(kMinimal, "s", {"gains.k2=3", "modes.controller=false", "name=trial"});
  EXPECT_DOUBLE_EQ(s.gains.k2, 3.0);
  EXPECT_FALSE(s.modes.controller);
}
