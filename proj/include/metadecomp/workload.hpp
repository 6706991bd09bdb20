#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/plan.hpp"

namespace metadecomp {

struct GenOptions {
  int n = 5;
  int fanout_max = 4;
  /// Probability that a new tree edge reuses an attribute the parent already
  /// shares elsewhere. Reuse is what produces large families of join trees.
  double shared_attr_bias = 0.5;
  /// Probability that a tree edge carries a second shared attribute.
  double second_attr_prob = 0.3;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<int> random_tree(int n, int fanout_max, std::mt19937_64& rng) {
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<int> kids(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    std::vector<int> open;
    for (int j = 0; j < i; ++j)
      if (kids[static_cast<std::size_t>(j)] < fanout_max) open.push_back(j);
    if (open.empty()) open.push_back(i - 1);
    int p = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
    parent[static_cast<std::size_t>(i)] = p;
    ++kids[static_cast<std::size_t>(p)];
  }
  return parent;
}

inline Hypergraph assemble(const std::vector<std::vector<int>>& attrs, int num_attrs) {
  std::vector<std::string> names;
  for (int a = 0; a < num_attrs; ++a) names.push_back("x" + std::to_string(a + 1));
  std::vector<Hypergraph::Relation> rels;
  for (std::size_t i = 0; i < attrs.size(); ++i)
    rels.push_back({"R" + std::to_string(i + 1), AttrSet::from_vector(attrs[i])});
  return Hypergraph(std::move(names), std::move(rels), AttrSet{});
}

}  // namespace detail

/// Random acyclic Boolean query with `n` relations.
///
/// A random tree with bounded fan-out is drawn first. Every relation gets one
/// private attribute and every tree edge one or two shared attributes, each
/// either fresh or (with probability `shared_attr_bias`) reused from the
/// parent's existing shared attributes. The tree stays a join tree throughout,
/// so the result is acyclic and connected.
inline Hypergraph gen_acyclic(const GenOptions& opt) {
  if (opt.n < 1) fail(ErrorKind::kInvalidArgument, "n must be positive");
  if (opt.n > RelSet::kMaxRelations) fail(ErrorKind::kInvalidArgument, "n must not exceed 64");
  if (opt.fanout_max < 1) fail(ErrorKind::kInvalidArgument, "fanout_max must be positive");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto parent = detail::random_tree(opt.n, opt.fanout_max, rng);

  int next_attr = 0;
  std::vector<std::vector<int>> attrs(static_cast<std::size_t>(opt.n));
  std::vector<std::vector<int>> shared(static_cast<std::size_t>(opt.n));
  for (int i = 0; i < opt.n; ++i) attrs[static_cast<std::size_t>(i)].push_back(next_attr++);
  for (int i = 1; i < opt.n; ++i) {
    auto p = static_cast<std::size_t>(parent[static_cast<std::size_t>(i)]);
    int slots = coin(rng) < opt.second_attr_prob ? 2 : 1;
    std::vector<int> edge;
    for (int s = 0; s < slots; ++s) {
      std::vector<int> reusable;
      for (int a : shared[p])
        if (std::find(edge.begin(), edge.end(), a) == edge.end()) reusable.push_back(a);
      int a;
      if (!reusable.empty() && coin(rng) < opt.shared_attr_bias) {
        a = reusable[std::uniform_int_distribution<std::size_t>(0, reusable.size() - 1)(rng)];
      } else {
        a = next_attr++;
        attrs[p].push_back(a);
        shared[p].push_back(a);
      }
      edge.push_back(a);
    }
    for (int a : edge) {
      attrs[static_cast<std::size_t>(i)].push_back(a);
      shared[static_cast<std::size_t>(i)].push_back(a);
    }
  }
  return detail::assemble(attrs, next_attr);
}

/// Adversarial acyclic query: attributes are spread over random connected
/// subtrees of a random tree, which yields nested and repeated overlaps and
/// occasionally relations with identical attribute sets.
inline Hypergraph gen_acyclic_dense(int n, int num_attrs, std::uint64_t seed) {
  if (n < 1 || n > RelSet::kMaxRelations) fail(ErrorKind::kInvalidArgument, "n must be in 1..64");
  std::mt19937_64 rng(seed);
  auto parent = detail::random_tree(n, n, rng);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) {
    adj[static_cast<std::size_t>(i)].push_back(parent[static_cast<std::size_t>(i)]);
    adj[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<std::vector<int>> attrs(static_cast<std::size_t>(n));
  int next_attr = 0;
  // One attribute per tree edge keeps the query connected.
  for (int i = 1; i < n; ++i) {
    attrs[static_cast<std::size_t>(i)].push_back(next_attr);
    attrs[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])].push_back(next_attr);
    ++next_attr;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int k = 0; k < num_attrs; ++k) {
    int start = pick(rng);
    int target = std::uniform_int_distribution<int>(1, n)(rng);
    std::vector<int> members{start};
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    in[static_cast<std::size_t>(start)] = 1;
    while (static_cast<int>(members.size()) < target) {
      std::vector<int> frontier;
      for (int v : members)
        for (int w : adj[static_cast<std::size_t>(v)])
          if (!in[static_cast<std::size_t>(w)]) frontier.push_back(w);
      if (frontier.empty()) break;
      int w = frontier[std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng)];
      in[static_cast<std::size_t>(w)] = 1;
      members.push_back(w);
    }
    for (int v : members) attrs[static_cast<std::size_t>(v)].push_back(next_attr);
    ++next_attr;
  }
  if (n == 1 && attrs[0].empty()) attrs[0].push_back(next_attr++);
  return detail::assemble(attrs, next_attr);
}

/// R1[x1,x2], R2[x1,x3], ..., Rn[x1,x(n+1)]: every join tree is a spanning tree.
inline Hypergraph gen_star(int n) {
  if (n < 1 || n > RelSet::kMaxRelations) fail(ErrorKind::kInvalidArgument, "n must be in 1..64");
  std::vector<std::vector<int>> attrs;
  for (int i = 0; i < n; ++i) attrs.push_back({0, i + 1});
  return detail::assemble(attrs, n + 1);
}

/// R1[x1,x2], R2[x2,x3], ...: exactly one unrooted join tree.
inline Hypergraph gen_chain(int n) {
  if (n < 1 || n > RelSet::kMaxRelations) fail(ErrorKind::kInvalidArgument, "n must be in 1..64");
  std::vector<std::vector<int>> attrs;
  for (int i = 0; i < n; ++i) attrs.push_back({i, i + 1});
  return detail::assemble(attrs, n + 1);
}

/// Copy of `h` with a different output attribute set.
inline Hypergraph with_output(const Hypergraph& h, const AttrSet& output) {
  return Hypergraph(h.attribute_names(), h.relations(), output);
}

/// Multiplies every table entry by exp(eps) with eps ~ N(0, sigma^2), rounding
/// up and clamping at 1. Entries are visited in relation-set order so a seed
/// always yields the same table. sigma = 0 returns the input unchanged.
inline CardinalityProvider perturb_cards(const CardinalityProvider& cards, double sigma, std::uint64_t seed) {
  if (sigma < 0) fail(ErrorKind::kInvalidArgument, "sigma must be non-negative");
  if (sigma == 0) return cards;
  std::map<RelSet, double> ordered(cards.table().begin(), cards.table().end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  CardinalityProvider out = cards;
  for (auto [s, c] : ordered) out.set(s, std::max(1.0, std::ceil(c * std::exp(noise(rng)))));
  return out;
}

}  // namespace metadecomp
