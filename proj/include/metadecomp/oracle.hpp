#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "metadecomp/caps.hpp"
#include "metadecomp/database.hpp"
#include "metadecomp/enumerate.hpp"
#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/join_tree.hpp"
#include "metadecomp/optimizer.hpp"
#include "metadecomp/plan.hpp"

namespace metadecomp {

/// Every rooted join tree, found by testing all labelled trees; each tree is
/// identified by its parent-relation vector. Independent of the
/// meta-decomposition and meant as a reference for small queries.
inline std::set<std::vector<int>> oracle_join_trees(const Hypergraph& h, int cap = global_caps().oracle_join_trees) {
  int n = h.num_relations();
  require_cap("relations for the join-tree oracle", n, cap);
  std::vector<RelSet> holders(static_cast<std::size_t>(h.num_attributes()));
  for (RelId r = 0; r < n; ++r) h.attrs(r).for_each([&](AttrId a) { holders[static_cast<std::size_t>(a)].insert(r); });
  std::set<std::vector<int>> out;
  PrueferTrees trees(n);
  std::vector<int> inside(holders.size());
  do {
    // A spanning tree satisfies the connectedness condition iff every
    // attribute's holders induce exactly |holders| - 1 tree edges.
    std::fill(inside.begin(), inside.end(), 0);
    for (auto [a, b] : trees.edges()) {
      (h.attrs(a) & h.attrs(b)).for_each([&](AttrId x) { ++inside[static_cast<std::size_t>(x)]; });
    }
    bool ok = true;
    for (std::size_t a = 0; a < holders.size() && ok; ++a)
      ok = inside[a] == holders[a].size() - 1;
    if (!ok) continue;
    for (RelId root = 0; root < n; ++root)
      out.insert(JoinTree::from_edges(h, trees.edges(), root).parent_relations(n));
  } while (trees.advance());
  return out;
}

/// Every Cartesian-free bushy plan, up to commuting join inputs.
inline std::vector<QueryPlan> oracle_plans(const Hypergraph& h, int cap = global_caps().oracle_plans) {
  require_cap("relations for plan enumeration", h.num_relations(), cap);
  std::unordered_map<RelSet, std::vector<QueryPlan>> memo;
  std::function<const std::vector<QueryPlan>&(RelSet)> plans = [&](RelSet s) -> const std::vector<QueryPlan>& {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    std::vector<QueryPlan> out;
    if (s.size() == 1) {
      out.push_back(QueryPlan::scan(s.min()));
    } else {
      RelSet first = RelSet::single(s.min());
      RelSet rest = s - first;
      for_each_subset(rest, [&](RelSet sub) {
        RelSet a = first | (rest - sub), b = sub;
        if (!h.connected(a) || !h.connected(b) || !h.shares_attribute(a, b)) return;
        for (const auto& pa : plans(a))
          for (const auto& pb : plans(b)) out.push_back(QueryPlan::join(pa, pb));
      });
    }
    return memo.emplace(s, std::move(out)).first->second;
  };
  return plans(h.all());
}

namespace detail {

/// Connected-subset DP over binary splits; `allowed` filters the relation
/// sets a plan node may cover.
template <class Allowed>
CostedPlan subset_dp(const Hypergraph& h, const CardinalityProvider& cards, Allowed allowed) {
  std::unordered_map<RelSet, std::pair<double, RelSet>> best;  // set -> (cost, left part)
  std::function<double(RelSet)> solve = [&](RelSet s) -> double {
    auto it = best.find(s);
    if (it != best.end()) return it->second.first;
    double value = std::numeric_limits<double>::infinity();
    RelSet split;
    if (s.size() == 1) {
      value = cards.cardinality(s);
    } else {
      RelSet first = RelSet::single(s.min());
      RelSet rest = s - first;
      double here = -1;
      for_each_subset(rest, [&](RelSet b) {
        RelSet a = s - b;
        if (!h.connected(a) || !h.connected(b) || !h.shares_attribute(a, b) || !allowed(a) || !allowed(b)) return;
        double ca = solve(a);
        double cb = solve(b);
        if (here < 0) here = cards.cardinality(s);
        if (ca + cb + here < value) {
          value = ca + cb + here;
          split = a;
        }
      });
    }
    best[s] = {value, split};
    return value;
  };
  if (!allowed(h.all()) || solve(h.all()) == std::numeric_limits<double>::infinity())
    fail(ErrorKind::kInternal, "no plan satisfies the constraints");
  std::function<QueryPlan(RelSet)> build = [&](RelSet s) {
    if (s.size() == 1) return QueryPlan::scan(s.min());
    RelSet a = best.at(s).second;
    return QueryPlan::join(build(a), build(s - a));
  };
  return {build(h.all()), best.at(h.all()).first};
}

}  // namespace detail

/// Cheapest Cartesian-free bushy plan of any width.
inline CostedPlan oracle_global_dp(const Hypergraph& h, const CardinalityProvider& cards,
                                   int cap = global_caps().global_dp) {
  require_cap("relations for the global DP", h.num_relations(), cap);
  return detail::subset_dp(h, cards, [](RelSet) { return true; });
}

/// Cheapest Cartesian-free plan whose every node has width 1, found without
/// looking at join trees at all.
inline CostedPlan oracle_width1_dp(const Hypergraph& h, const CardinalityProvider& cards,
                                   int cap = global_caps().global_dp) {
  require_cap("relations for the width-1 DP", h.num_relations(), cap);
  return detail::subset_dp(h, cards, [&](RelSet s) { return admissible(h, s); });
}

struct NodeExecution {
  RelSet relations;
  std::int64_t rows = 0;            ///< rows after projecting onto the kept attributes
  std::int64_t interface_rows = 0;  ///< rows after projecting onto the interface
};

struct ExecutionResult {
  std::vector<AttrId> schema;  ///< output attributes in column order
  std::vector<Row> rows;       ///< distinct output tuples, sorted
  std::vector<NodeExecution> nodes;
  std::int64_t max_intermediate = 0;  ///< largest kept projection at a join node
  std::int64_t max_interface = 0;     ///< largest interface projection at a join node
};

namespace detail {

struct RowHash {
  std::size_t operator()(const Row& r) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Value v : r) h = (h ^ std::hash<Value>{}(v)) * 1099511628211ull;
    return h;
  }
};

inline std::vector<int> positions(const std::vector<AttrId>& schema, const std::vector<AttrId>& attrs) {
  std::vector<int> pos;
  for (AttrId a : attrs) {
    auto it = std::find(schema.begin(), schema.end(), a);
    if (it == schema.end()) fail(ErrorKind::kInternal, "projection onto a missing attribute");
    pos.push_back(static_cast<int>(it - schema.begin()));
  }
  return pos;
}

inline Table project(const Table& t, const AttrSet& keep) {
  Table out;
  out.schema = keep.to_vector();
  auto pos = positions(t.schema, out.schema);
  std::unordered_set<Row, RowHash> seen;
  for (const auto& row : t.rows) {
    Row r;
    r.reserve(pos.size());
    for (int p : pos) r.push_back(row[static_cast<std::size_t>(p)]);
    if (seen.insert(r).second) out.rows.push_back(std::move(r));
  }
  return out;
}

/// Hash join of `l` and `r` on their shared attributes, projected onto
/// `keep` with duplicates removed.
inline Table join_project(const Table& l, const Table& r, const AttrSet& keep) {
  AttrSet ls = AttrSet::from_vector(l.schema), rs = AttrSet::from_vector(r.schema);
  auto shared = (ls & rs).to_vector();
  auto lkey = positions(l.schema, shared), rkey = positions(r.schema, shared);
  const Table& build = l.rows.size() <= r.rows.size() ? l : r;
  const Table& probe = &build == &l ? r : l;
  const auto& bkey = &build == &l ? lkey : rkey;
  const auto& pkey = &build == &l ? rkey : lkey;
  std::unordered_map<Row, std::vector<std::size_t>, RowHash> index;
  for (std::size_t i = 0; i < build.rows.size(); ++i) {
    Row k;
    for (int p : bkey) k.push_back(build.rows[i][static_cast<std::size_t>(p)]);
    index[k].push_back(i);
  }
  Table out;
  out.schema = keep.to_vector();
  // Each output column comes from the probe row if present there, else from the build row.
  std::vector<std::pair<bool, int>> source;
  for (AttrId a : out.schema) {
    auto pit = std::find(probe.schema.begin(), probe.schema.end(), a);
    if (pit != probe.schema.end()) {
      source.emplace_back(true, static_cast<int>(pit - probe.schema.begin()));
    } else {
      auto bit = std::find(build.schema.begin(), build.schema.end(), a);
      if (bit == build.schema.end()) fail(ErrorKind::kInternal, "kept attribute missing from both join inputs");
      source.emplace_back(false, static_cast<int>(bit - build.schema.begin()));
    }
  }
  std::unordered_set<Row, RowHash> seen;
  Row k;
  for (const auto& prow : probe.rows) {
    k.clear();
    for (int p : pkey) k.push_back(prow[static_cast<std::size_t>(p)]);
    auto it = index.find(k);
    if (it == index.end()) continue;
    for (std::size_t bi : it->second) {
      const Row& brow = build.rows[bi];
      Row o;
      o.reserve(source.size());
      for (auto [from_probe, p] : source) o.push_back(from_probe ? prow[static_cast<std::size_t>(p)] : brow[static_cast<std::size_t>(p)]);
      if (seen.insert(o).second) out.rows.push_back(std::move(o));
    }
  }
  return out;
}

inline std::int64_t distinct_count(const Table& t, const AttrSet& attrs) {
  return static_cast<std::int64_t>(project(t, attrs).rows.size());
}

}  // namespace detail

/// Runs a plan bottom-up with hash joins. Every node's result is projected
/// onto the attributes it must keep, under set semantics.
inline ExecutionResult execute(const QueryPlan& p, const Hypergraph& h, const MicroDatabase& db) {
  check_database(db, h);
  auto valid = check_plan(p, h);
  if (!valid) fail(ErrorKind::kInvalidArgument, "cannot execute plan: " + valid.detail);
  ExecutionResult res;
  std::vector<Table> results(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    AttrSet keep = h.kept_attrs(n.relations);
    if (n.leaf()) {
      results[static_cast<std::size_t>(i)] = detail::project(db.tables[static_cast<std::size_t>(n.relation)], keep);
    } else {
      results[static_cast<std::size_t>(i)] = detail::join_project(results[static_cast<std::size_t>(n.left)],
                                                                  results[static_cast<std::size_t>(n.right)], keep);
      results[static_cast<std::size_t>(n.left)] = Table{};
      results[static_cast<std::size_t>(n.right)] = Table{};
    }
    const Table& t = results[static_cast<std::size_t>(i)];
    NodeExecution ne{n.relations, static_cast<std::int64_t>(t.rows.size()),
                     detail::distinct_count(t, h.interface(n.relations))};
    if (!n.leaf()) {
      res.max_intermediate = std::max(res.max_intermediate, ne.rows);
      res.max_interface = std::max(res.max_interface, ne.interface_rows);
    }
    res.nodes.push_back(ne);
  }
  Table out = std::move(results[static_cast<std::size_t>(p.root())]);
  res.schema = out.schema;
  res.rows = std::move(out.rows);
  std::sort(res.rows.begin(), res.rows.end());
  return res;
}

/// Evaluates the join of relation set `s` and returns the number of distinct
/// tuples over its kept attributes. Joins follow a connected order with
/// early projection, so intermediate sizes stay bounded by what is needed.
inline std::int64_t evaluate_set(const Hypergraph& h, const MicroDatabase& db, RelSet s) {
  AttrSet keep = h.kept_attrs(s);
  RelSet done = RelSet::single(s.min());
  auto needed = [&](RelSet joined) { return (keep | h.attrs_of(s - joined)) & h.attrs_of(joined); };
  Table acc = detail::project(db.tables[static_cast<std::size_t>(s.min())], needed(done));
  while (done != s) {
    RelId next = -1;
    (s - done).for_each([&](RelId r) {
      if (next < 0 && h.attrs(r).intersects(h.attrs_of(done))) next = r;
    });
    if (next < 0) fail(ErrorKind::kInvalidArgument, "relation set is not connected");
    done.insert(next);
    acc = detail::join_project(acc, db.tables[static_cast<std::size_t>(next)], needed(done));
  }
  return static_cast<std::int64_t>(detail::project(acc, keep).rows.size());
}

/// Exact cardinality of every connected relation set, by execution.
inline CardinalityProvider true_cardinalities(const Hypergraph& h, const MicroDatabase& db,
                                              int cap = global_caps().true_cardinalities) {
  require_cap("relations for true cardinalities", h.num_relations(), cap);
  check_database(db, h);
  CardinalityProvider cards;
  for_each_subset(h.all(), [&](RelSet s) {
    if (h.connected(s)) cards.set(s, static_cast<double>(evaluate_set(h, db, s)));
  });
  return cards;
}

}  // namespace metadecomp
