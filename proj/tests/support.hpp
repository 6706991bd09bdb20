#pragma once

#include <set>
#include <string>
#include <vector>

#include "metadecomp/metadecomp.hpp"

namespace testing_support {

using namespace metadecomp;

inline Hypergraph hierarchical() {
  return Hypergraph::from_lists({{"R1", {"x1", "x2", "x3"}},
                                 {"R2", {"x1", "x4", "x5"}},
                                 {"R3", {"x5", "x6"}},
                                 {"R4", {"x3", "x7"}}});
}

inline Hypergraph clique4() {
  return Hypergraph::from_lists({{"R1", {"x1", "x2", "x3", "x4"}},
                                 {"R2", {"x1", "x2", "x5"}},
                                 {"R3", {"x1", "x3", "x6"}},
                                 {"R4", {"x2", "x3", "x7"}}});
}

inline Hypergraph nested_minor() {
  return Hypergraph::from_lists({{"R1", {"x1", "x2", "x6"}},
                                 {"R2", {"x1", "x2", "x3", "x7"}},
                                 {"R3", {"x1", "x3", "x4", "x8"}},
                                 {"R4", {"x1", "x4", "x9"}},
                                 {"R5", {"x1", "x5"}}});
}

inline Hypergraph special_edge() {
  return Hypergraph::from_lists({{"R1", {"x1", "x2", "x3", "x4"}},
                                 {"R2", {"x1", "x2", "x5"}},
                                 {"R3", {"x1", "x3", "x6"}},
                                 {"R4", {"x2", "x3", "x7"}},
                                 {"R5", {"x1", "x2", "x3", "x8"}}});
}

inline Hypergraph triangle() {
  return Hypergraph::from_lists({{"R", {"a", "b"}}, {"S", {"b", "c"}}, {"T", {"c", "a"}}});
}

/// Instance family shared by the randomized suites: sparse trees for even
/// seeds, nested overlaps for odd ones.
inline Hypergraph random_instance(int n, std::uint64_t seed) {
  if (seed % 2 == 0) return gen_acyclic({n, 1 + static_cast<int>(seed % 4), 0.3 + 0.1 * static_cast<double>(seed % 7), 0.3, seed});
  return gen_acyclic_dense(n, static_cast<int>(seed % 5), seed);
}

/// Parent vectors of every labelled spanning tree that passes validate().
inline std::set<std::vector<int>> brute_force_trees(const Hypergraph& h) {
  int n = h.num_relations();
  std::vector<int> verts;
  for (int i = 0; i < n; ++i) verts.push_back(i);
  std::set<std::vector<int>> out;
  for (const auto& e : enumerate_trees(verts))
    for (RelId r = 0; r < n; ++r) {
      auto t = JoinTree::from_edges(h, e, r);
      if (validate(t, h)) out.insert(t.parent_relations(n));
    }
  return out;
}

inline CardinalityProvider random_cards(const Hypergraph& h, std::uint64_t seed, int max_rows = 100) {
  std::mt19937_64 rng(seed);
  CardinalityProvider cards;
  for_each_subset(h.all(), [&](RelSet s) {
    if (h.connected(s)) cards.set(s, static_cast<double>(1 + rng() % static_cast<std::uint64_t>(max_rows)));
  });
  return cards;
}

inline AttrSet attrs(const Hypergraph& h, const std::vector<std::string>& names) {
  AttrSet s;
  for (const auto& n : names) s.insert(*h.find_attribute(n));
  return s;
}

inline RelSet rels(const Hypergraph& h, const std::vector<std::string>& names) {
  RelSet s;
  for (const auto& n : names) s.insert(*h.find_relation(n));
  return s;
}

}  // namespace testing_support
