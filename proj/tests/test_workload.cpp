#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"

using namespace metadecomp;
using namespace testing_support;

TEST(Workload, GeneratorsAreDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenOptions o{6, 3, 0.5, 0.3, seed};
    EXPECT_EQ(query_to_text(gen_acyclic(o)), query_to_text(gen_acyclic(o)));
    EXPECT_EQ(query_to_text(gen_acyclic_dense(6, 4, seed)), query_to_text(gen_acyclic_dense(6, 4, seed)));
  }
  EXPECT_NE(query_to_text(gen_acyclic({6, 3, 0.5, 0.3, 1})), query_to_text(gen_acyclic({6, 3, 0.5, 0.3, 2})));
}

TEST(Workload, GeneratedQueriesHaveTheRequestedSize) {
  for (int n = 1; n <= 20; ++n) {
    auto h = gen_acyclic({n, 2, 0.7, 0.3, static_cast<std::uint64_t>(n)});
    EXPECT_EQ(h.num_relations(), n);
    EXPECT_TRUE(gyo_is_acyclic(h));
    EXPECT_TRUE(h.is_boolean());
  }
}

TEST(Workload, FanoutBoundShapesTheTree) {
  // With fan-out 1 the generator draws a path, so every relation shares
  // attributes with at most two others.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto h = gen_acyclic({7, 1, 0.0, 0.0, seed});
    for (RelId r = 0; r < 7; ++r) {
      int neighbours = 0;
      for (RelId s = 0; s < 7; ++s)
        if (s != r && h.attrs(r).intersects(h.attrs(s))) ++neighbours;
      EXPECT_LE(neighbours, 2);
    }
  }
}

TEST(Workload, StarAndChainPresets) {
  auto star = gen_star(5);
  for (RelId r = 0; r < 5; ++r) EXPECT_TRUE(star.attrs(r).contains(0));
  auto chain = gen_chain(5);
  EXPECT_FALSE(chain.attrs(0).intersects(chain.attrs(2)));
  EXPECT_THROW(gen_star(0), Error);
  EXPECT_THROW(gen_acyclic({0, 1, 0.5, 0.3, 1}), Error);
}

TEST(Workload, PerturbationIdentityAndDeterminism) {
  auto h = hierarchical();
  auto cards = random_cards(h, 4);
  auto same = perturb_cards(cards, 0, 9);
  for (const auto& [s, c] : cards.table()) EXPECT_EQ(same.cardinality(s), c);
  auto a = perturb_cards(cards, 1, 9), b = perturb_cards(cards, 1, 9);
  for (const auto& [s, c] : cards.table()) {
    EXPECT_EQ(a.cardinality(s), b.cardinality(s));
    EXPECT_GE(a.cardinality(s), 1);
  }
  EXPECT_THROW(perturb_cards(cards, -1, 9), Error);
}

TEST(Workload, PerturbationIsLogNormal) {
  // Kolmogorov-Smirnov against N(0,1) on log(perturbed / true). Large base
  // values make the rounding up negligible.
  const int draws = 10000;
  const double base = 1e9;
  CardinalityProvider cards;
  for (int i = 1; i <= draws; ++i) cards.set(RelSet(static_cast<std::uint64_t>(i)), base);
  auto noisy = perturb_cards(cards, 1.0, 2024);
  std::vector<double> z;
  for (const auto& [s, c] : noisy.table()) z.push_back(std::log(c / base));
  std::sort(z.begin(), z.end());
  double d = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double f = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
    d = std::max({d, std::abs(f - static_cast<double>(i) / draws), std::abs(f - static_cast<double>(i + 1) / draws)});
  }
  EXPECT_LT(d, 1.36 / std::sqrt(static_cast<double>(draws)));
  double mean = 0;
  for (double v : z) mean += v;
  EXPECT_NEAR(mean / draws, 0.0, 0.05);
}

TEST(Workload, DatabasesRespectSchemaAndCap) {
  auto h = nested_minor();
  auto db = gen_database(h, 50, 3);
  check_database(db, h);
  EXPECT_LE(db.max_rows(), 50);
  for (const auto& t : db.tables) {
    std::set<Row> distinct(t.rows.begin(), t.rows.end());
    EXPECT_EQ(distinct.size(), t.rows.size());
  }
  EXPECT_THROW(check_database(gen_database(h, 50, 3), h, 10), Error);
}

TEST(Workload, DatabaseRoundTripsThroughCsv) {
  auto h = hierarchical();
  auto db = gen_database(h, 30, 8);
  auto dir = std::filesystem::temp_directory_path() / "metadecomp_workload_roundtrip";
  std::filesystem::remove_all(dir);
  save_database(db, h, dir);
  auto back = load_database(h, dir);
  for (RelId r = 0; r < h.num_relations(); ++r) {
    EXPECT_EQ(back.tables[static_cast<std::size_t>(r)].schema, db.tables[static_cast<std::size_t>(r)].schema);
    EXPECT_EQ(back.tables[static_cast<std::size_t>(r)].rows, db.tables[static_cast<std::size_t>(r)].rows);
  }
  std::filesystem::remove_all(dir);
}
