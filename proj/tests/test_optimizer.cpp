#include <gtest/gtest.h>

#include "support.hpp"

using namespace metadecomp;
using namespace testing_support;

namespace {

std::string sample(const std::string& name) { return std::string(METADECOMP_SAMPLES) + "/" + name; }

double best_over_trees(const std::vector<JoinTree>& trees, const Hypergraph& h, const CardinalityProvider& cards,
                       std::optional<RelId> root = std::nullopt) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : trees)
    if (!root || t.node(t.root()).relation == *root) best = std::min(best, optimize_tree(t, h, cards).cost);
  return best;
}

}  // namespace

TEST(Optimizer, HierarchicalSample) {
  auto h = load_query(sample("hierarchical.json"));
  auto cards = load_cards(sample("hierarchical.cards.json"), h);
  auto res = optimize(build_meta(h), h, cards);
  EXPECT_EQ(res.cost, 435);
  EXPECT_EQ(res.plan.canonical(h), "((R1,R4),(R2,R3))");
  ASSERT_TRUE(res.join_tree.has_value());
  EXPECT_TRUE(is_induced_by(res.plan, *res.join_tree, h));
  EXPECT_TRUE(res.warnings.empty());
}

TEST(Optimizer, JobSampleFindsTheBushyPlan) {
  auto h = load_query(sample("job17f.json"));
  auto cards = load_cards(sample("job17f.cards.json"), h);
  auto res = optimize(build_meta(h), h, cards);
  EXPECT_EQ(res.cost, 4216);
  EXPECT_EQ(width(res.plan, h), 1);
  EXPECT_EQ(res.cost, oracle_width1_dp(h, cards).cost);
  EXPECT_EQ(res.plan.canonical(h), "((ci,((cn,mc),((k,mk),t))),n)");
}

TEST(Optimizer, OptimizeTreeMatchesExhaustiveInducedPlans) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto h = random_instance(2 + static_cast<int>(seed % 4), seed);
    auto cards = random_cards(h, seed);
    auto plans = oracle_plans(h);
    for (const auto& t : enumerate_join_trees(h, build_meta(h))) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : plans)
        if (is_induced_by(p, t, h)) best = std::min(best, cost(p, cards));
      auto res = optimize_tree(t, h, cards);
      EXPECT_EQ(res.cost, best) << t.canonical(h) << "\n" << query_to_text(h);
      EXPECT_TRUE(is_induced_by(res.plan, t, h));
    }
  }
}

TEST(Optimizer, RebranchIsExactOverAllJoinTrees) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    int n = 2 + static_cast<int>(seed % 6);
    auto h = random_instance(n, seed);
    auto cards = random_cards(h, seed * 7 + 1, 1000);
    auto m = build_meta(h);
    auto trees = enumerate_join_trees(h, m);
    auto res = optimize_meta_rebranch(m, h, cards);
    EXPECT_EQ(res.cost, best_over_trees(trees, h, cards)) << query_to_text(h);
    EXPECT_EQ(res.cost, oracle_width1_dp(h, cards).cost);
    EXPECT_EQ(res.cost, cost(res.plan, cards));
    EXPECT_LE(width(res.plan, h), 1);
    EXPECT_LE(oracle_global_dp(h, cards).cost, res.cost);
    EXPECT_GE(optimize_meta(m, h, cards).cost, res.cost);
  }
}

TEST(Optimizer, RootedSearch) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto h = random_instance(3 + static_cast<int>(seed % 3), seed);
    auto cards = random_cards(h, seed);
    auto m = build_meta(h);
    auto trees = enumerate_join_trees(h, m);
    for (RelId r = 0; r < h.num_relations(); ++r) {
      OptimizerOptions o;
      o.root_relation = r;
      auto res = optimize_meta_rebranch(m, h, cards, o);
      EXPECT_EQ(res.cost, best_over_trees(trees, h, cards, r));
      ASSERT_TRUE(res.join_tree.has_value());
      EXPECT_EQ(res.join_tree->node(res.join_tree->root()).relation, r);
    }
  }
}

TEST(Optimizer, CounterexampleForDownSetBlocks) {
  // Re-rooting inside a re-branched subtree is needed for the optimum here.
  auto h = Hypergraph::from_lists({{"R1", {"x1", "x7", "x8", "x11"}},
                                   {"R2", {"x2", "x7", "x9"}},
                                   {"R3", {"x3", "x7", "x8"}},
                                   {"R4", {"x4", "x9", "x10"}},
                                   {"R5", {"x5", "x10"}},
                                   {"R6", {"x6", "x7", "x11"}}});
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cards = random_cards(h, seed, 1000);
    auto m = build_meta(h);
    EXPECT_EQ(optimize_meta_rebranch(m, h, cards).cost, best_over_trees(enumerate_join_trees(h, m), h, cards));
  }
}

TEST(Optimizer, GreedyLocalOrderingIsAnUpperBound) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto h = gen_star(3 + static_cast<int>(seed % 5));
    auto cards = random_cards(h, seed);
    auto m = build_meta(h);
    OptimizerOptions greedy;
    greedy.local = LocalMode::kGreedy;
    auto g = optimize(m, h, cards, greedy);
    auto e = optimize(m, h, cards);
    EXPECT_GE(g.cost, e.cost);
    EXPECT_LE(width(g.plan, h), 1);
    EXPECT_TRUE(check_plan(g.plan, h).ok);
  }
}

TEST(Optimizer, WideStarFallsBackWithWarning) {
  auto h = gen_star(8);
  auto cards = random_cards(h, 3);
  OptimizerOptions o;
  o.exact_fanout_limit = 3;
  auto res = optimize(build_meta(h), h, cards, o);
  EXPECT_FALSE(res.warnings.empty());
  EXPECT_LE(width(res.plan, h), 1);
  EXPECT_EQ(cost(res.plan, cards), res.cost);
}

TEST(Optimizer, StateCapTriggersFallback) {
  auto saved = global_caps();
  Caps tight = saved;
  tight.rebranch_states = 3;
  set_global_caps(tight);
  auto h = nested_minor();
  auto cards = random_cards(h, 5);
  auto res = optimize_meta_rebranch(build_meta(h), h, cards);
  set_global_caps(saved);
  EXPECT_FALSE(res.warnings.empty());
  EXPECT_LE(width(res.plan, h), 1);
}

TEST(Optimizer, SingleRelation) {
  auto h = Hypergraph::from_lists({{"R", {"a"}}});
  CardinalityProvider cards;
  cards.set(RelSet::single(0), 42);
  auto res = optimize(build_meta(h), h, cards);
  EXPECT_EQ(res.cost, 42);
  EXPECT_EQ(res.plan.size(), 1);
}
