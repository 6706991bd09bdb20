#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace metadecomp;
using namespace testing_support;

namespace {

/// Nested-loop evaluation of the full join, projected onto `keep`.
std::set<Row> naive(const MicroDatabase& db, RelSet s, const AttrSet& keep) {
  std::set<Row> out;
  auto order = s.to_vector();
  std::map<AttrId, Value> binding;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == order.size()) {
      Row r;
      keep.for_each([&](AttrId a) { r.push_back(binding.at(a)); });
      out.insert(r);
      return;
    }
    const Table& t = db.tables[static_cast<std::size_t>(order[i])];
    for (const auto& row : t.rows) {
      std::vector<AttrId> fresh;
      bool ok = true;
      for (std::size_t c = 0; c < t.schema.size() && ok; ++c) {
        auto it = binding.find(t.schema[c]);
        if (it == binding.end()) {
          binding[t.schema[c]] = row[c];
          fresh.push_back(t.schema[c]);
        } else {
          ok = it->second == row[c];
        }
      }
      if (ok) rec(i + 1);
      for (AttrId a : fresh) binding.erase(a);
    }
  };
  rec(0);
  return out;
}

Hypergraph random_output(const Hypergraph& h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AttrSet out;
  for (AttrId a = 0; a < h.num_attributes(); ++a)
    if (rng() % 3 == 0) out.insert(a);
  return with_output(h, out);
}

}  // namespace

TEST(Executor, MatchesNestedLoopsForEveryPlan) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto h = random_output(random_instance(2 + static_cast<int>(seed % 4), seed), seed);
    auto db = gen_database(h, 8, seed);
    auto expected = naive(db, h.all(), h.output());
    for (const auto& p : oracle_plans(h)) {
      auto res = execute(p, h, db);
      std::set<Row> got(res.rows.begin(), res.rows.end());
      EXPECT_EQ(got, expected) << p.to_string(h);
      EXPECT_EQ(res.rows.size(), got.size());
    }
  }
}

TEST(Executor, NodeCountsAreTrueCardinalities) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto h = random_output(random_instance(2 + static_cast<int>(seed % 5), seed), seed + 1);
    auto db = gen_database(h, 10, seed);
    auto cards = true_cardinalities(h, db);
    for_each_subset(h.all(), [&](RelSet s) {
      if (h.connected(s)) {
        EXPECT_EQ(cards.cardinality(s), static_cast<double>(naive(db, s, h.kept_attrs(s)).size()));
      }
    });
    auto plan = optimize(build_meta(h), h, cards).plan;
    for (const auto& n : execute(plan, h, db).nodes) EXPECT_EQ(static_cast<double>(n.rows), cards.cardinality(n.relations));
  }
}

TEST(Executor, WidthOneIntermediatesStayWithinInputSize) {
  int instances = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto h = random_instance(3 + static_cast<int>(seed % 5), seed);
    auto db = gen_database(h, 200, seed);
    auto cards = true_cardinalities(h, db);
    auto plan = optimize(build_meta(h), h, cards).plan;
    ASSERT_LE(width(plan, h), 1);
    auto res = execute(plan, h, db);
    EXPECT_LE(res.max_interface, db.max_rows());
    ++instances;
  }
  EXPECT_EQ(instances, 60);
}

TEST(Executor, WidthTwoPlanCanExceedInputSize) {
  auto h = hierarchical();
  const Value n = 20;
  MicroDatabase db;
  db.tables.resize(4);
  auto table = [&](RelId r) -> Table& {
    Table& t = db.tables[static_cast<std::size_t>(r)];
    t.schema = h.attrs(r).to_vector();
    return t;
  };
  // Every R1 row meets every R2 row on x1, and the interface {x3,x5} of
  // {R1,R2} keeps all n*n combinations.
  auto x = [&](const char* name) { return *h.find_attribute(name); };
  for (Value i = 0; i < n; ++i) {
    std::map<AttrId, Value> r1{{x("x1"), 0}, {x("x2"), 0}, {x("x3"), i}};
    std::map<AttrId, Value> r2{{x("x1"), 0}, {x("x4"), 0}, {x("x5"), i}};
    std::map<AttrId, Value> r3{{x("x5"), i}, {x("x6"), 0}};
    std::map<AttrId, Value> r4{{x("x3"), i}, {x("x7"), 0}};
    std::vector<std::map<AttrId, Value>> rows{r1, r2, r3, r4};
    for (RelId r = 0; r < 4; ++r) {
      Row row;
      for (AttrId a : table(r).schema) row.push_back(rows[static_cast<std::size_t>(r)].at(a));
      db.tables[static_cast<std::size_t>(r)].rows.push_back(row);
    }
  }
  auto deep = execute(parse_plan_expr("(((R1,R2),R3),R4)", h), h, db);
  auto bushy = execute(parse_plan_expr("((R1,R4),(R2,R3))", h), h, db);
  EXPECT_EQ(deep.max_interface, n * n);
  EXPECT_LE(bushy.max_interface, n);
  EXPECT_EQ(deep.rows, bushy.rows);
}

TEST(Executor, RejectsSchemaMismatch) {
  auto h = hierarchical();
  auto db = gen_database(h, 5, 1);
  db.tables[0].schema.pop_back();
  try {
    execute(parse_plan_expr("((R1,R4),(R2,R3))", h), h, db);
    FAIL() << "expected schema-mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
}

TEST(Oracle, GlobalNeverExceedsWidthOne) {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    auto h = random_instance(2 + static_cast<int>(seed % 7), seed);
    auto cards = random_cards(h, seed);
    auto g = oracle_global_dp(h, cards);
    auto w = oracle_width1_dp(h, cards);
    EXPECT_LE(g.cost, w.cost);
    EXPECT_EQ(cost(g.plan, cards), g.cost);
    EXPECT_EQ(cost(w.plan, cards), w.cost);
    EXPECT_LE(width(w.plan, h), 1);
  }
}

TEST(Oracle, DynamicProgramsMatchPlanEnumeration) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto h = random_instance(2 + static_cast<int>(seed % 4), seed);
    auto cards = random_cards(h, seed);
    double all = std::numeric_limits<double>::infinity(), narrow = all;
    for (const auto& p : oracle_plans(h)) {
      ASSERT_TRUE(check_plan(p, h).ok);
      all = std::min(all, cost(p, cards));
      if (width(p, h) <= 1) narrow = std::min(narrow, cost(p, cards));
    }
    EXPECT_EQ(oracle_global_dp(h, cards).cost, all);
    EXPECT_EQ(oracle_width1_dp(h, cards).cost, narrow);
  }
}

TEST(Oracle, PlanEnumerationHasNoDuplicates) {
  auto h = gen_chain(4);
  auto plans = oracle_plans(h);
  std::set<std::string> seen;
  for (const auto& p : plans) seen.insert(p.to_string(h));
  EXPECT_EQ(seen.size(), plans.size());
  EXPECT_GT(plans.size(), 4u);
}

TEST(Oracle, CapsAreEnforced) {
  auto h = gen_star(10);
  try {
    oracle_join_trees(h);
    FAIL() << "expected cap-exceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapExceeded);
  }
  EXPECT_THROW(oracle_plans(h), Error);
}
