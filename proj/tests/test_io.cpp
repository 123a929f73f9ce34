#include <gtest/gtest.h>

#include "gnst/io.hpp"

using namespace gnst;

namespace {

std::string location_of(const std::string& text) {
  try {
    parse_behavior(text);
  } catch (const ParseError& e) {
    return e.location();
  }
  return "<no error>";
}

}  // namespace

TEST(BehaviorDoc, ExactRoundTrip) {
  Scenario sc({2, 3});
  auto b = uniform_behavior<Rational>(sc);
  auto back = parse_behavior(serialize_behavior(b));
  ASSERT_TRUE(std::holds_alternative<ExactBehavior>(back));
  EXPECT_EQ(std::get<ExactBehavior>(back).table(), b.table());
  EXPECT_EQ(serialize_behavior(std::get<ExactBehavior>(back)), serialize_behavior(b));
}

TEST(BehaviorDoc, FloatRoundTripIsBitExact) {
  Scenario sc({2, 2, 2});
  std::vector<double> t(sc.table_size());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c)
    for (std::size_t k = 0; k < sc.cells_per_context(); ++k) t[c * 8 + k] = (k == 0 ? 0.1 : 0.9 / 7);
  FloatBehavior b(sc, t);
  auto back = std::get<FloatBehavior>(parse_behavior(serialize_behavior(b)));
  EXPECT_EQ(back.table(), b.table());
}

TEST(BehaviorDoc, LayoutIsContextMajor) {
  auto j = json::parse(R"({"format":"gnst-behavior/1","parties":2,"outcomes":[2,2],"arithmetic":"exact",
    "contexts":[["1","0","0","0"],["1/2","0","0","1/2"],["0","1","0","0"],["0","0","0","1"]]})");
  auto b = behavior_from_json_as<Rational>(j);
  EXPECT_EQ(b.at({{0, 1}}, {{1, 1}}), Rational(1, 2));
  EXPECT_EQ(b.at({{1, 0}}, {{1, 2}}), Rational(1));
  EXPECT_EQ(b.at({{1, 1}}, {{2, 2}}), Rational(1));
}

TEST(BehaviorDoc, ShortTableIsRejected) {
  // 15 entries for a 16-cell table.
  std::string text = R"({"format":"gnst-behavior/1","parties":2,"outcomes":[2,2],"arithmetic":"float",
    "contexts":[[0.25,0.25,0.25,0.25],[0.25,0.25,0.25,0.25],[0.25,0.25,0.25,0.25],[0.25,0.25,0.5]]})";
  try {
    parse_behavior(text);
    FAIL() << "accepted a short table";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("table length mismatch"), std::string::npos);
    EXPECT_EQ(e.location(), "/contexts");
  }
}

TEST(BehaviorDoc, ErrorsCarryLocations) {
  const json good = behavior_to_json(uniform_behavior<Rational>(Scenario::uniform(2, 2)));
  auto edited = [&](const std::string& ptr, const json& value) {
    json j = good;
    j[json::json_pointer(ptr)] = value;
    return location_of(j.dump());
  };
  EXPECT_EQ(edited("/contexts/1/1", "-1/4"), "/contexts/1/1");
  EXPECT_EQ(edited("/contexts/1/0", "x"), "/contexts/1/0");
  EXPECT_EQ(edited("/contexts/2/3", 0.25), "/contexts/2/3");
  EXPECT_EQ(edited("/format", "gnst-behavior/2"), "/format");
  EXPECT_EQ(edited("/outcomes", json::array({2})), "/outcomes");
  EXPECT_EQ(edited("/arithmetic", "fuzzy"), "/arithmetic");
  json missing = good;
  missing.erase("contexts");
  EXPECT_EQ(location_of(missing.dump()), "/");
  EXPECT_NE(location_of("[1, 2"), "<no error>");
}

TEST(ArgumentDoc, RoundTripRegeneratesEvents) {
  auto arg = build_argument(HardyFamily::GeneralizedQudit, Scenario({2, 3, 2}), 1);
  auto j = argument_to_json(arg);
  EXPECT_EQ(j["fixed_j"], 2);
  EXPECT_FALSE(j.contains("zero_events"));
  auto back = parse_argument(j.dump());
  EXPECT_EQ(back.family, arg.family);
  EXPECT_EQ(back.fixed_j, arg.fixed_j);
  EXPECT_EQ(back.zero_events, arg.zero_events);
  EXPECT_EQ(back.positive_event, arg.positive_event);
}

TEST(ArgumentDoc, FixedJDefaultsToLastParty) {
  auto a = parse_argument(R"({"format":"gnst-argument/1","family":"chen","parties":3,"outcomes":[2,2,2]})");
  EXPECT_EQ(a.fixed_j, 2);
  EXPECT_EQ(a.family, HardyFamily::ChenQubit);
}

TEST(ArgumentDoc, BadFieldsAreRejected) {
  EXPECT_THROW(parse_argument(R"({"format":"gnst-argument/1","family":"ladder","parties":2,"outcomes":[2,2]})"),
               ParseError);
  EXPECT_THROW(
      parse_argument(R"({"format":"gnst-argument/1","family":"general","parties":2,"outcomes":[2,2],"fixed_j":3})"),
      ParseError);
  // The qubit family needs d = 2 everywhere.
  EXPECT_THROW(parse_argument(R"({"format":"gnst-argument/1","family":"chen","parties":2,"outcomes":[2,3]})"),
               ParseError);
}

TEST(CertificateDoc, RoundTripAndDeterminism) {
  auto arg = build_argument(HardyFamily::GeneralizedQudit, Scenario::uniform(3, 2));
  auto res = optimize_success<Rational>(arg);
  auto j1 = certificate_to_json(arg, res, false);
  auto j2 = certificate_to_json(arg, optimize_success<Rational>(arg), false);
  EXPECT_EQ(j1.dump(), j2.dump());
  EXPECT_TRUE(j1["wall_ms"].is_null());
  EXPECT_EQ(j1["q_star"], "1/3");
  auto rec = certificate_from_json(j1);
  EXPECT_EQ(rec.q_star, "1/3");
  EXPECT_NEAR(rec.q_star_value, 1.0 / 3, 1e-15);
  EXPECT_TRUE(rec.verified);
  EXPECT_EQ(rec.arithmetic, Arithmetic::exact);
  EXPECT_EQ(std::get<ExactBehavior>(rec.behavior).table(), res.optimal_behavior.table());
}

TEST(VerdictDoc, LocalAndNonlocalShapes) {
  Scenario sc = Scenario::uniform(3, 2);
  auto local = ns2_membership<Rational>(uniform_behavior<Rational>(sc));
  auto jl = verdict_to_json(local);
  EXPECT_EQ(jl["format"], kVerdictFormat);
  EXPECT_EQ(jl["status"], "local");
  EXPECT_TRUE(jl["witness"].is_null());
  ASSERT_TRUE(jl["decomposition"].is_array());
  for (const auto& c : jl["decomposition"]) {
    EXPECT_EQ(c["group"].size() + c["complement"].size(), 3u);
    for (int p : c["complement"]) EXPECT_GE(p, 1);
  }

  auto arg = build_argument(HardyFamily::GeneralizedQudit, sc);
  auto nl = ns2_membership<Rational>(optimize_success<Rational>(arg).optimal_behavior);
  auto jn = verdict_to_json(nl);
  EXPECT_EQ(jn["status"], "genuinely_nonlocal");
  EXPECT_TRUE(jn["decomposition"].is_null());
  EXPECT_EQ(jn["witness"]["coefficients"].size(), sc.table_size());
}

TEST(QuantumDoc, RoundTrip) {
  std::mt19937_64 rng(3);
  auto m = random_model({2, 3}, rng);
  auto back = parse_quantum(quantum_to_json(m).dump());
  EXPECT_EQ(back.outcomes, m.outcomes);
  EXPECT_LT((back.state - m.state).norm(), 1e-15);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t s = 0; s < 2; ++s) EXPECT_LT((back.bases[i][s] - m.bases[i][s]).norm(), 1e-15);
}

TEST(QuantumDoc, RejectsInvalidModels) {
  auto j = quantum_to_json(computational_model({2, 2}, Eigen::Vector4cd(1, 0, 0, 0)));
  auto bad = j;
  bad["state"][0] = json::array({2.0, 0.0});
  EXPECT_THROW(quantum_from_json(bad), InputError);
  bad = j;
  bad["bases"][1][1][1] = json::array({json::array({1.0, 0.0}), json::array({0.0, 0.0})});
  EXPECT_THROW(quantum_from_json(bad), InputError);
  bad = j;
  bad["state"].erase(3);
  try {
    quantum_from_json(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), "/state");
  }
}
