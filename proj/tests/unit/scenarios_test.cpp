#include <gtest/gtest.h>

#include <set>

#include "causal_audit/checks.hpp"
#include "causal_audit/errors.hpp"
#include "causal_audit/estimators.hpp"
#include "causal_audit/scenarios.hpp"
#include "test_support.hpp"

using namespace causal_audit;
using test_support::truth;

namespace {

std::set<std::string> edge_set(const CausalGraph& g) {
  std::set<std::string> out;
  for (const auto& e : g.edges()) out.insert(to_string(e));
  return out;
}

}  // namespace

TEST(Scenarios, Names) {
  EXPECT_EQ(scenario_names(), (std::vector<std::string>{"visa", "hiring", "district",
                                                        "banknote-collider", "love-confounder",
                                                        "popularity-mediation"}));
  EXPECT_TRUE(is_scenario("visa"));
  EXPECT_FALSE(is_scenario("compas"));
  EXPECT_THROW(make_scenario("compas"), ConfigError);
}

TEST(Scenarios, AllValidAndAcyclic) {
  for (const auto& name : scenario_names()) {
    auto s = make_scenario(name);
    EXPECT_LE(s.scm.exogenous_configurations(), kEnumerationBudget) << name;
    EXPECT_EQ(s.scm.graph().topological_order().size(), s.scm.graph().size()) << name;
    for (const auto& [key, value] : default_parameters(name)) {
      EXPECT_GE(value, 0.0) << key;
      EXPECT_LE(value, 1.0) << key;
    }
  }
}

TEST(Scenarios, VisaStructure) {
  EXPECT_EQ(edge_set(visa_scenario().graph()),
            (std::set<std::string>{"Age->Nationality", "Age->Visa", "FamilyStatus->Visa",
                                   "Nationality->FamilyStatus", "Nationality->Skill",
                                   "Nationality->Visa", "Skill->Visa"}));
}

TEST(Scenarios, HiringStructureAndRoles) {
  auto s = make_scenario("hiring");
  EXPECT_EQ(edge_set(s.scm.graph()),
            (std::set<std::string>{"LastName->Hired", "Race->Hired", "Race->LastName",
                                   "Race->Skill", "Skill->Hired"}));
  EXPECT_EQ(s.roles.at("Skill"), Role::explaining);
  EXPECT_EQ(s.roles.at("LastName"), Role::proxy);
  EXPECT_EQ(causal_paths(s.scm.graph(), "Race", "Hired").size(), 3u);
}

TEST(Scenarios, DistrictStructure) {
  auto g = district_scenario().graph();
  EXPECT_EQ(edge_set(g), (std::set<std::string>{"District->Race", "District->SchoolRating",
                                                "SchoolRating->PredictedAbility"}));
  EXPECT_TRUE(causal_paths(g, "Race", "PredictedAbility").empty());
}

TEST(Scenarios, GroundTruthRegenerates) {
  for (const auto& name : scenario_names()) {
    auto s = make_scenario(name);
    auto gt = ground_truth(name);
    auto m = default_mediation(s.scm.graph(), s.query);
    EXPECT_NEAR(gt.tv, truth(name, "tv"), 1e-12) << name;
    EXPECT_NEAR(gt.te, truth(name, "te"), 1e-12) << name;
    EXPECT_NEAR(gt.ate, truth(name, "ate"), 1e-12) << name;
    EXPECT_NEAR(gt.nde, truth(name, "nde"), 1e-12) << name;
    EXPECT_NEAR(gt.nie, truth(name, "nie"), 1e-12) << name;
    EXPECT_NEAR(gt.pse, truth(name, "pse"), 1e-12) << name;
    EXPECT_NEAR(total_effect(s.scm, s.query).value, gt.te, 1e-12) << name;
    EXPECT_NEAR(natural_direct_effect(s.scm, s.query, m).value, gt.nde, 1e-12) << name;
    EXPECT_NEAR(path_specific_effect(s.scm, s.query, s.pi).value, gt.pse, 1e-12) << name;
  }
}

TEST(Scenarios, ParameterErrors) {
  EXPECT_THROW(visa_scenario({{"Visa.Nowhere", 0.1}}), ParameterRangeError);
  EXPECT_THROW(visa_scenario({{"Visa.Age", 1.5}}), ParameterRangeError);
  EXPECT_THROW(visa_scenario({{"Visa.Age", -0.1}}), ParameterRangeError);
  // Valid individually, but pushes P(Visa=1 | ...) above 1.
  EXPECT_THROW(visa_scenario({{"Visa.base", 0.9}}), ParameterRangeError);
}

TEST(Scenarios, VisaNoDirectEffect) {
  auto s = make_scenario("visa", {{"Visa.Nationality", 0.0}});
  EXPECT_NEAR(natural_direct_effect(s.scm, s.query, default_mediation(s.scm.graph(), s.query)).value,
              0.0, 1e-12);
}

TEST(Scenarios, HiringZeroedProxy) {
  auto s = make_scenario("hiring", {{"LastName.Race", 0.0}});
  EXPECT_NEAR(path_specific_effect(s.scm, s.query, s.pi).value, 0.0, 1e-12);
  auto def = make_scenario("hiring");
  EXPECT_NEAR(path_specific_effect(def.scm, def.query, def.pi).value, truth("hiring", "pse"), 1e-12);
}

TEST(Scenarios, DistrictConfounding) {
  auto s = make_scenario("district");
  EXPECT_NEAR(total_effect(s.scm, s.query).value, 0.0, 1e-12);
  auto d = scenario_sample(s, 100000, 1);
  EXPECT_GT(total_variation(d, s.query).value, 0.1);
  auto cut = make_scenario("district", {{"Race.District", 0.0}, {"SchoolRating.District", 0.0}});
  EXPECT_NEAR(total_variation(cut.scm, cut.query).value, 0.0, 1e-12);
}

TEST(Scenarios, BanknoteSelection) {
  auto s = make_scenario("banknote-collider");
  ASSERT_TRUE(s.selection);
  auto joint = joint_distribution(s.scm);
  for (const char* g : {"0", "1"}) {
    for (const char* t : {"0", "1"}) {
      EXPECT_NEAR(joint.probability(std::map<std::string, std::string>{{"Gender", g}, {"Talent", t}}),
                  joint.probability(Event{"Gender", g}) * joint.probability(Event{"Talent", t}),
                  1e-12);
    }
  }
  EXPECT_FALSE(d_separated(s.scm.graph(), {"Gender"}, {"Talent"}, {"Fame"}));
  auto selected = scenario_sample(s, 10000, 3, true);
  EXPECT_LT(ci_test(selected, "Gender", "Talent", {}).p_value, 1e-4);
  auto full = scenario_sample(s, 10000, 3);
  EXPECT_GT(ci_test(full, "Gender", "Talent", {}).p_value, 1e-4);
}

TEST(Scenarios, LoveConfounder) {
  auto s = make_scenario("love-confounder");
  EXPECT_NEAR(total_effect(s.scm, s.query).value, 0.0, 1e-12);
  EXPECT_GT(total_variation(s.scm, s.query).value, 0.1);
}

TEST(Scenarios, PopularityMediatorPathsSum) {
  auto s = make_scenario("popularity-mediation");
  const auto& q = s.query;
  PathSelection smile{q.sensitive, q.outcome, {{"Happy", "Smile"}, {"Smile", "Popular"}}};
  PathSelection help{q.sensitive, q.outcome, {{"Happy", "Help"}, {"Help", "Popular"}}};
  const double te = total_effect(s.scm, q).value;
  const double nde = natural_direct_effect(s.scm, q, default_mediation(s.scm.graph(), q)).value;
  const double sum = path_specific_effect(s.scm, q, smile).value +
                     path_specific_effect(s.scm, q, help).value;
  EXPECT_NEAR(sum, te - nde, 1e-12);
}

TEST(Scenarios, SampleObservedColumnsOnly) {
  auto s = make_scenario("visa");
  auto d = scenario_sample(s, 10, 1);
  EXPECT_EQ(d.columns(), 5u);
  EXPECT_EQ(d.rows(), 10u);
}
