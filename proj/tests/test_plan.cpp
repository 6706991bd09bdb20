#include <gtest/gtest.h>

#include "support.hpp"

using namespace metadecomp;
using namespace testing_support;

TEST(Plan, ParseAndRender) {
  auto h = hierarchical();
  auto p = parse_plan_expr("((R2,R3),(R4, R1))", h);
  EXPECT_EQ(p.size(), 7);
  EXPECT_EQ(p.relations(), h.all());
  EXPECT_EQ(p.to_string(h), "((R2,R3),(R4,R1))");
  EXPECT_EQ(p.canonical(h), "((R1,R4),(R2,R3))");
  EXPECT_THROW(parse_plan_expr("((R1,R2)", h), Error);
  EXPECT_THROW(parse_plan_expr("(R1,R9)", h), Error);
  EXPECT_THROW(parse_plan_expr("((R1,R1),R2)", h), Error);
}

TEST(Plan, CheckPlanRejectsCartesianProducts) {
  auto h = hierarchical();
  EXPECT_TRUE(check_plan(parse_plan_expr("(((R1,R2),R3),R4)", h), h).ok);
  EXPECT_EQ(check_plan(parse_plan_expr("((R3,R4),(R1,R2))", h), h).condition, "cartesian");
  EXPECT_EQ(check_plan(parse_plan_expr("((R1,R2),R3)", h), h).condition, "plan");
}

TEST(PlanWidth, CliqueFigurePlans) {
  auto h = clique4();
  EXPECT_EQ(width(parse_plan_expr("(((R1,R2),R3),R4)", h), h), 1);
  EXPECT_EQ(width(parse_plan_expr("(((R2,R3),R1),R4)", h), h), 2);
}

TEST(PlanWidth, HierarchicalFigurePlans) {
  auto h = hierarchical();
  auto bushy = parse_plan_expr("((R1,R4),(R2,R3))", h);
  auto deep = parse_plan_expr("(((R1,R2),R3),R4)", h);
  EXPECT_EQ(width(bushy, h), 1);
  EXPECT_EQ(width(deep, h), 2);
  auto tree = JoinTree::from_parents(h, {-1, 0, 1, 0});
  EXPECT_TRUE(is_induced_by(bushy, tree, h));
  EXPECT_FALSE(is_induced_by(deep, tree, h));
  auto report = width_report(deep, h);
  auto worst = std::max_element(report.begin(), report.end(), [](const auto& a, const auto& b) { return a.width < b.width; });
  EXPECT_EQ(worst->relations, rels(h, {"R1", "R2"}));
  EXPECT_EQ(worst->interface, attrs(h, {"x3", "x5"}));
}

TEST(PlanWidth, EmptyInterfaceHasWidthZero) {
  // A lone scan still has an interface unless it is the whole query.
  auto h = hierarchical();
  EXPECT_EQ(width(QueryPlan::scan(0), h), 1);
  auto one = Hypergraph::from_lists({{"R", {"a"}}});
  EXPECT_EQ(width(QueryPlan::scan(0), one), 0);
}

TEST(PlanWidth, OverflowRaisesWidthOverflow) {
  // The interface {a,b,c} of {A,B,D} needs all three relations.
  auto h = Hypergraph::from_lists({{"C", {"a", "b", "c"}}, {"A", {"a", "x"}}, {"B", {"b", "x"}}, {"D", {"c", "x"}}});
  auto p = parse_plan_expr("(((A,B),D),C)", h);
  EXPECT_TRUE(check_plan(p, h).ok);
  try {
    width(p, h, 2);
    FAIL() << "expected width-overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kWidthOverflow);
  }
  EXPECT_EQ(width(p, h, 4), 3);
}

TEST(Induced, JoinTreeFromPlanFigures) {
  auto h = hierarchical();
  auto tree = join_tree_from_plan(parse_plan_expr("((R1,R4),(R2,R3))", h), h);
  ASSERT_TRUE(tree.has_value());
  EXPECT_TRUE(validate(*tree, h).ok);
  EXPECT_TRUE(is_induced_by(parse_plan_expr("((R1,R4),(R2,R3))", h), *tree, h));
  EXPECT_FALSE(join_tree_from_plan(parse_plan_expr("(((R1,R2),R3),R4)", h), h).has_value());
}

TEST(Induced, WidthOnePlansAreExactlyTheInducedOnes) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto h = random_instance(2 + static_cast<int>(seed % 4), seed);
    auto m = build_meta(h);
    auto trees = enumerate_join_trees(h, m);
    for (const auto& p : oracle_plans(h)) {
      bool induced = std::any_of(trees.begin(), trees.end(), [&](const JoinTree& t) { return is_induced_by(p, t, h); });
      bool narrow = width(p, h) <= 1;
      EXPECT_EQ(induced, narrow) << p.to_string(h) << "\n" << query_to_text(h);
      auto built = join_tree_from_plan(p, h);
      EXPECT_EQ(built.has_value(), narrow);
      if (built) {
        EXPECT_TRUE(is_induced_by(p, *built, h));
      }
    }
  }
}

TEST(Cost, CoutSumsEveryNode) {
  auto h = hierarchical();
  auto cards = load_cards(std::string(METADECOMP_SAMPLES) + "/hierarchical.cards.json", h);
  EXPECT_EQ(cost(parse_plan_expr("((R1,R4),(R2,R3))", h), cards), 435);
  EXPECT_EQ(cost(parse_plan_expr("(((R1,R2),R3),R4)", h), cards), 400 + 50 + 40 + 5);
  EXPECT_EQ(cost(QueryPlan::scan(0), cards), 100);
}

TEST(Cost, MissingEntryIsReported) {
  auto h = hierarchical();
  CardinalityProvider cards;
  cards.set(RelSet::single(0), 3);
  try {
    cost(parse_plan_expr("(R1,R2)", h), cards);
    FAIL() << "expected unknown-cardinality";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownCardinality);
  }
  cards.enable_estimator(h, std::vector<double>(static_cast<std::size_t>(h.num_attributes()), 10.0));
  cards.set(RelSet::single(1), 5);
  EXPECT_GT(cards.cardinality(rels(h, {"R1", "R2"})), 0);
  EXPECT_EQ(cards.estimated_lookups(), 1u);
}
