#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metadecomp/caps.hpp"
#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/join_tree.hpp"
#include "metadecomp/meta_decomposition.hpp"
#include "metadecomp/plan.hpp"

namespace metadecomp {

enum class LocalMode { kExact, kGreedy };

struct OptimizerOptions {
  LocalMode local = LocalMode::kExact;
  /// Search every join tree (true) or only the trees reachable by picking one
  /// neighbour plan per meta-decomposition edge (false).
  bool rebranch = true;
  int exact_fanout_limit = 12;
  /// Restrict the search to join trees rooted at this relation.
  std::optional<RelId> root_relation;
};

struct OptimizerResult {
  QueryPlan plan;
  double cost = 0;
  std::optional<JoinTree> join_tree;
  std::vector<std::string> warnings;
  std::uint64_t dp_states = 0;
  std::uint64_t dp_transitions = 0;
};

/// A sub-plan together with its C_out.
struct CostedPlan {
  QueryPlan plan;
  double cost = 0;
};

namespace detail {

inline CostedPlan costed_scan(RelId r, const CardinalityProvider& cards) {
  return {QueryPlan::scan(r), cards.cardinality(RelSet::single(r))};
}

inline CostedPlan costed_join(const CostedPlan& a, const CostedPlan& b, const CardinalityProvider& cards) {
  QueryPlan p = QueryPlan::join(a.plan, b.plan);
  return {p, a.cost + b.cost + cards.cardinality(p.relations())};
}

/// A join step is allowed when the inputs share an attribute and the result
/// keeps width 1.
inline bool joinable(const Hypergraph& h, RelSet acc, RelSet next) {
  return h.shares_attribute(acc, next) && admissible(h, acc | next);
}

}  // namespace detail

/// Best left-deep order for joining `satellites` onto `hub`, or, without a
/// hub, best left-deep order over the satellites where every prefix stays
/// Cartesian-free and of width 1. Exact subset DP.
inline CostedPlan optimize_local_exact(const Hypergraph& h, const CardinalityProvider& cards,
                                       const std::optional<CostedPlan>& hub, const std::vector<CostedPlan>& satellites,
                                       std::uint64_t* cells = nullptr) {
  int k = static_cast<int>(satellites.size());
  if (k == 0) {
    if (!hub) fail(ErrorKind::kInvalidArgument, "local optimisation needs a hub or satellites");
    return *hub;
  }
  if (k > 24) fail(ErrorKind::kCapExceeded, "too many satellites for the exact local DP");
  std::size_t full = (std::size_t{1} << k) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(full + 1, inf);
  std::vector<int> last(full + 1, -1);
  std::vector<RelSet> rels(full + 1);
  RelSet base = hub ? hub->plan.relations() : RelSet{};
  for (std::size_t mask = 1; mask <= full; ++mask) {
    int low = std::countr_zero(mask);
    rels[mask] = rels[mask & (mask - 1)] | satellites[static_cast<std::size_t>(low)].plan.relations();
  }
  best[0] = hub ? hub->cost : 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    RelSet all = base | rels[mask];
    double card = -1;
    for (int u = 0; u < k; ++u) {
      if (!(mask >> u & 1)) continue;
      std::size_t prev = mask & ~(std::size_t{1} << u);
      if (best[prev] == inf) continue;
      if (cells) ++*cells;
      const auto& sat = satellites[static_cast<std::size_t>(u)];
      double step;
      if (!hub && prev == 0) {
        step = sat.cost;
      } else {
        if (!hub && !detail::joinable(h, rels[prev], sat.plan.relations())) continue;
        if (card < 0) card = cards.cardinality(all);
        step = best[prev] + sat.cost + card;
      }
      if (step < best[mask]) {
        best[mask] = step;
        last[mask] = u;
      }
    }
  }
  if (best[full] == inf) fail(ErrorKind::kInternal, "no width-1 order exists for the local problem");
  std::vector<int> order;
  for (std::size_t mask = full; mask != 0; mask &= ~(std::size_t{1} << last[mask])) order.push_back(last[mask]);
  std::reverse(order.begin(), order.end());
  CostedPlan acc = hub ? *hub : satellites[static_cast<std::size_t>(order.front())];
  for (std::size_t i = hub ? 0 : 1; i < order.size(); ++i)
    acc = detail::costed_join(acc, satellites[static_cast<std::size_t>(order[i])], cards);
  return acc;
}

/// Greedy local order: start from the hub (or the smallest satellite) and
/// repeatedly add the satellite giving the smallest intermediate result,
/// breaking ties by smallest relation id.
inline CostedPlan optimize_local_greedy(const Hypergraph& h, const CardinalityProvider& cards,
                                        const std::optional<CostedPlan>& hub, const std::vector<CostedPlan>& satellites,
                                        std::uint64_t* cells = nullptr) {
  std::vector<char> used(satellites.size(), 0);
  std::optional<CostedPlan> acc = hub;
  auto tie_less = [&](std::size_t a, std::size_t b) {
    return satellites[a].plan.relations().min() < satellites[b].plan.relations().min();
  };
  if (!acc) {
    if (satellites.empty()) fail(ErrorKind::kInvalidArgument, "local optimisation needs a hub or satellites");
    std::size_t seed = 0;
    for (std::size_t i = 1; i < satellites.size(); ++i) {
      double ci = cards.cardinality(satellites[i].plan.relations());
      double cs = cards.cardinality(satellites[seed].plan.relations());
      if (ci < cs || (ci == cs && tie_less(i, seed))) seed = i;
    }
    acc = satellites[seed];
    used[seed] = 1;
  }
  for (std::size_t round = 0; round < satellites.size(); ++round) {
    std::optional<std::size_t> pick;
    double pick_card = 0;
    for (std::size_t i = 0; i < satellites.size(); ++i) {
      if (used[i]) continue;
      if (cells) ++*cells;
      RelSet acc_rels = acc->plan.relations();
      if (!detail::joinable(h, acc_rels, satellites[i].plan.relations())) continue;
      double c = cards.cardinality(acc_rels | satellites[i].plan.relations());
      if (!pick || c < pick_card || (c == pick_card && tie_less(i, *pick))) {
        pick = i;
        pick_card = c;
      }
    }
    if (!pick) break;
    used[*pick] = 1;
    acc = detail::costed_join(*acc, satellites[*pick], cards);
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    fail(ErrorKind::kInternal, "greedy local order got stuck");
  return *acc;
}

namespace detail {

inline CostedPlan local(const Hypergraph& h, const CardinalityProvider& cards, LocalMode mode, int fanout_limit,
                        const std::optional<CostedPlan>& hub, const std::vector<CostedPlan>& sats,
                        std::uint64_t* cells, bool* fell_back) {
  if (mode == LocalMode::kExact && static_cast<int>(sats.size()) <= fanout_limit)
    return optimize_local_exact(h, cards, hub, sats, cells);
  if (mode == LocalMode::kExact && fell_back) *fell_back = true;
  return optimize_local_greedy(h, cards, hub, sats, cells);
}

}  // namespace detail

/// Best plan induced by a fixed join tree: at every node, the node's relation
/// is joined first and the children's sub-plans follow in the best order.
inline OptimizerResult optimize_tree(const JoinTree& t, const Hypergraph& h, const CardinalityProvider& cards,
                                     LocalMode mode = LocalMode::kExact, int fanout_limit = 12) {
  if (!validate(t, h)) fail(ErrorKind::kInvalidArgument, "optimize_tree needs a valid join tree");
  OptimizerResult res;
  bool fell_back = false;
  std::function<CostedPlan(int)> rec = [&](int v) {
    std::vector<CostedPlan> sats;
    for (int c : t.node(v).children) sats.push_back(rec(c));
    return detail::local(h, cards, mode, fanout_limit, detail::costed_scan(t.node(v).relation, cards), sats,
                         &res.dp_transitions, &fell_back);
  };
  CostedPlan best = rec(t.root());
  res.plan = best.plan;
  res.cost = best.cost;
  res.join_tree = t;
  if (fell_back) res.warnings.push_back("fan-out above the exact limit; used greedy local ordering");
  return res;
}

/// Optimises over the meta-decomposition by computing, for every directed
/// edge (p, q), a plan for the relations on p's side, and joining the two
/// sides of the best edge. Each side is assembled by one local problem at p.
inline OptimizerResult optimize_meta(const MetaDecomposition& m, const Hypergraph& h, const CardinalityProvider& cards,
                                     const OptimizerOptions& opt = {}) {
  OptimizerResult res;
  bool fell_back = false;
  if (m.size() == 1) {
    auto s = detail::costed_scan(*m.node(0).relation, cards);
    res.plan = s.plan;
    res.cost = s.cost;
    return res;
  }
  std::map<std::pair<int, int>, CostedPlan> side;  // (p, q) -> plan for p's side of edge {p, q}
  auto neighbours = [&](int v) {
    std::vector<int> out = m.node(v).children;
    if (m.node(v).parent >= 0) out.push_back(m.node(v).parent);
    return out;
  };
  std::function<const CostedPlan&(int, int)> plan_side = [&](int p, int q) -> const CostedPlan& {
    auto key = std::make_pair(p, q);
    auto it = side.find(key);
    if (it != side.end()) return it->second;
    std::vector<CostedPlan> sats;
    for (int x : neighbours(p))
      if (x != q) sats.push_back(plan_side(x, p));
    std::optional<CostedPlan> hub;
    if (m.node(p).relation) hub = detail::costed_scan(*m.node(p).relation, cards);
    ++res.dp_states;
    auto plan = detail::local(h, cards, opt.local, opt.exact_fanout_limit, hub, sats, &res.dp_transitions, &fell_back);
    return side.emplace(key, std::move(plan)).first->second;
  };
  std::optional<CostedPlan> best;
  for (int v = 0; v < m.size(); ++v) {
    int q = m.node(v).parent;
    if (q < 0) continue;
    const CostedPlan& a = plan_side(v, q);
    const CostedPlan& b = plan_side(q, v);
    CostedPlan joined = detail::costed_join(b, a, cards);
    if (!best || joined.cost < best->cost) best = joined;
  }
  res.plan = best->plan;
  res.cost = best->cost;
  res.join_tree = join_tree_from_plan(res.plan, h);
  if (fell_back) res.warnings.push_back("fan-out above the exact limit; used greedy local ordering");
  return res;
}

namespace detail {

/// Connected components of `rest` when only attributes outside `hub` link
/// relations. Every subtree hanging below a relation with attributes `hub`
/// in a join tree is a union of these components.
inline std::vector<RelSet> components_outside(const Hypergraph& h, RelSet rest, const AttrSet& hub) {
  std::vector<RelSet> out;
  RelSet left = rest;
  while (!left.empty()) {
    RelSet comp = RelSet::single(left.min());
    AttrSet reach = h.attrs(left.min()) - hub;
    bool grew = true;
    while (grew) {
      grew = false;
      (left - comp).for_each([&](RelId r) {
        if (h.attrs(r).intersects(reach)) {
          comp.insert(r);
          reach = reach | (h.attrs(r) - hub);
          grew = true;
        }
      });
    }
    out.push_back(comp);
    left = left - comp;
  }
  return out;
}

}  // namespace detail

/// Exact optimum over the plans induced by any join tree, with every
/// re-branching and re-rooting of the meta-decomposition taken into account.
///
/// F(a, S) is the cheapest plan for relation set S as a subtree rooted at a,
/// where a is joined first and the child subtrees follow in some order:
/// F(a, S) = |S| + min over the last child block B rooted at c of
/// F(a, S - B) + F(c, B). B ranges over unions of the components of S - a
/// that are linked by attributes outside a, and c over the relations of B
/// that hold I(B). Falls back to optimize_meta with greedy local ordering
/// (and a warning) when some node has more components than
/// `exact_fanout_limit` or the number of states exceeds its cap.
inline OptimizerResult optimize_meta_rebranch(const MetaDecomposition& m, const Hypergraph& h,
                                              const CardinalityProvider& cards, const OptimizerOptions& opt = {}) {
  auto fallback = [&](const std::string& why) {
    OptimizerOptions g = opt;
    g.local = LocalMode::kGreedy;
    OptimizerResult r = optimize_meta(m, h, cards, g);
    r.warnings.push_back(why);
    return r;
  };
  if (opt.local == LocalMode::kGreedy) return optimize_meta(m, h, cards, opt);
  int n = h.num_relations();
  if (opt.root_relation && (*opt.root_relation < 0 || *opt.root_relation >= n))
    fail(ErrorKind::kInvalidArgument, "root relation out of range");
  OptimizerResult res;
  if (n == 1) {
    auto s = detail::costed_scan(0, cards);
    res.plan = s.plan;
    res.cost = s.cost;
    res.join_tree = JoinTree::from_parents(h, {-1});
    return res;
  }

  struct Entry {
    double cost = std::numeric_limits<double>::infinity();
    RelSet block;
    RelId child = -1;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::unordered_map<std::uint64_t, Entry>> memo(static_cast<std::size_t>(n));
  const auto cap = global_caps().rebranch_states;
  bool capped = false, too_wide = false;

  std::function<double(RelId, RelSet)> solve = [&](RelId a, RelSet s) -> double {
    auto& table = memo[static_cast<std::size_t>(a)];
    auto it = table.find(s.bits());
    if (it != table.end()) return it->second.cost;
    if (capped || too_wide) return kInf;
    if (static_cast<std::int64_t>(res.dp_states) >= cap) {
      capped = true;
      return kInf;
    }
    ++res.dp_states;
    Entry e;
    if (s == RelSet::single(a)) {
      e.cost = cards.cardinality(s);
    } else {
      const AttrSet& hub = h.attrs(a);
      auto comps = detail::components_outside(h, s - RelSet::single(a), hub);
      if (static_cast<int>(comps.size()) > opt.exact_fanout_limit) {
        too_wide = true;
        return kInf;
      }
      double here = cards.cardinality(s);
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << comps.size()); ++mask) {
        RelSet b;
        for (std::size_t i = 0; i < comps.size(); ++i)
          if (mask >> i & 1) b = b | comps[i];
        AttrSet iface = h.interface(b);
        if (!iface.subset_of(hub)) continue;
        double left = solve(a, s - b);
        if (left == kInf) continue;
        b.for_each([&](RelId c) {
          if (!iface.subset_of(h.attrs(c))) return;
          ++res.dp_transitions;
          double total = here + left + solve(c, b);
          if (total < e.cost) e = {total, b, c};
        });
      }
    }
    table[s.bits()] = e;
    return e.cost;
  };

  RelSet all = h.all();
  double best = kInf;
  RelId best_root = -1;
  for (RelId a = 0; a < n; ++a) {
    if (opt.root_relation && a != *opt.root_relation) continue;
    double c = solve(a, all);
    if (c < best) {
      best = c;
      best_root = a;
    }
  }
  if (too_wide) return fallback("a relation has more independent subtrees than the exact limit; used greedy optimisation");
  if (capped) return fallback("re-branching DP exceeded its state cap; used greedy optimisation");
  if (best_root < 0) fail(ErrorKind::kInternal, "no join tree found by the re-branching DP");

  std::vector<std::pair<int, int>> edges;
  std::function<CostedPlan(RelId, RelSet)> build = [&](RelId a, RelSet s) -> CostedPlan {
    const Entry& e = memo[static_cast<std::size_t>(a)].at(s.bits());
    if (e.child < 0) return detail::costed_scan(a, cards);
    edges.emplace_back(a, e.child);
    return detail::costed_join(build(a, s - e.block), build(e.child, e.block), cards);
  };
  CostedPlan plan = build(best_root, all);
  res.plan = plan.plan;
  res.cost = plan.cost;
  res.join_tree = JoinTree::from_edges(h, edges, best_root);
  return res;
}

/// Dispatches on `opt.rebranch`.
inline OptimizerResult optimize(const MetaDecomposition& m, const Hypergraph& h, const CardinalityProvider& cards,
                                const OptimizerOptions& opt = {}) {
  return opt.rebranch ? optimize_meta_rebranch(m, h, cards, opt) : optimize_meta(m, h, cards, opt);
}

}  // namespace metadecomp
