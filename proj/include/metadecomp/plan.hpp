#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
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

namespace metadecomp {

/// Binary join plan stored in post-order, so the root is the last node.
class QueryPlan {
 public:
  struct Node {
    RelSet relations;
    RelId relation = -1;  ///< scanned relation, or -1 for a join
    int left = -1;
    int right = -1;
    bool leaf() const { return relation >= 0; }
  };

  QueryPlan() = default;

  static QueryPlan scan(RelId r) {
    QueryPlan p;
    p.nodes_.push_back({RelSet::single(r), r, -1, -1});
    return p;
  }

  static QueryPlan join(const QueryPlan& l, const QueryPlan& r) {
    if (l.empty() || r.empty()) fail(ErrorKind::kInvalidArgument, "cannot join an empty plan");
    if (l.relations().intersects(r.relations()))
      fail(ErrorKind::kInvalidArgument, "join inputs must cover disjoint relations");
    QueryPlan p;
    p.nodes_.reserve(l.nodes_.size() + r.nodes_.size() + 1);
    p.nodes_ = l.nodes_;
    int offset = static_cast<int>(l.nodes_.size());
    for (auto n : r.nodes_) {
      if (!n.leaf()) {
        n.left += offset;
        n.right += offset;
      }
      p.nodes_.push_back(n);
    }
    p.nodes_.push_back({l.relations() | r.relations(), -1, l.root(), static_cast<int>(p.nodes_.size()) - 1});
    return p;
  }

  bool empty() const { return nodes_.empty(); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  const Node& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<Node>& nodes() const { return nodes_; }
  RelSet relations() const { return nodes_.empty() ? RelSet{} : nodes_.back().relations; }

  /// Sub-plan rooted at node i.
  QueryPlan subplan(int i) const {
    const Node& n = node(i);
    if (n.leaf()) return scan(n.relation);
    return join(subplan(n.left), subplan(n.right));
  }

  /// "((R1,R4),(R2,R3))", preserving child order.
  std::string to_string(const Hypergraph& h) const { return empty() ? std::string() : render(h, root(), false); }

  /// Text form with join inputs ordered by smallest relation id, so plans
  /// that differ only by commuting inputs compare equal.
  std::string canonical(const Hypergraph& h) const { return empty() ? std::string() : render(h, root(), true); }

 private:
  std::string render(const Hypergraph& h, int i, bool sorted) const {
    const Node& n = node(i);
    if (n.leaf()) return h.relation_name(n.relation);
    int a = n.left, b = n.right;
    if (sorted && node(b).relations.min() < node(a).relations.min()) std::swap(a, b);
    return "(" + render(h, a, sorted) + "," + render(h, b, sorted) + ")";
  }

  std::vector<Node> nodes_;
};

/// Parses the text form produced by QueryPlan::to_string, e.g. "((R1,R4),(R2,R3))".
inline QueryPlan parse_plan_expr(const std::string& text, const Hypergraph& h) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto error = [&](const std::string& what) {
    fail(ErrorKind::kParse, "plan expression, column " + std::to_string(pos + 1) + ": " + what);
  };
  std::function<QueryPlan()> expr = [&]() -> QueryPlan {
    skip();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      QueryPlan l = expr();
      skip();
      if (pos >= text.size() || text[pos] != ',') error("expected ','");
      ++pos;
      QueryPlan r = expr();
      skip();
      if (pos >= text.size() || text[pos] != ')') error("expected ')'");
      ++pos;
      if (l.relations().intersects(r.relations())) error("a relation occurs twice");
      return QueryPlan::join(l, r);
    }
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' || text[pos] == '.'))
      ++pos;
    if (start == pos) error("expected a relation name");
    std::string name = text.substr(start, pos - start);
    auto r = h.find_relation(name);
    if (!r) error("unknown relation " + name);
    return QueryPlan::scan(*r);
  };
  QueryPlan p = expr();
  skip();
  if (pos != text.size()) error("trailing input");
  return p;
}

/// Checks that a plan covers every relation once and never joins inputs that
/// share no attribute.
inline ValidationResult check_plan(const QueryPlan& p, const Hypergraph& h) {
  if (p.empty()) return ValidationResult::violation("plan", "empty plan");
  if (p.relations() != h.all()) return ValidationResult::violation("plan", "plan does not cover every relation exactly once");
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    if (n.leaf()) continue;
    if (!h.shares_attribute(p.node(n.left).relations, p.node(n.right).relations))
      return ValidationResult::violation("cartesian", "join inputs share no attribute", {i});
  }
  return ValidationResult::pass();
}

/// I(p): attributes shared between a plan node's relations and the rest.
inline AttrSet interface(const Hypergraph& h, const QueryPlan& p, int node) { return h.interface(p.node(node).relations); }

/// Smallest number of relations from `s` whose attributes cover `target`;
/// throws width-overflow when more than `cap` are needed.
inline int min_cover(const Hypergraph& h, RelSet s, const AttrSet& target, int cap) {
  if (target.empty()) return 0;
  auto rels = s.to_vector();
  int n = static_cast<int>(rels.size());
  std::function<bool(int, int, const AttrSet&)> search = [&](int from, int left, const AttrSet& covered) {
    if (left == 0) return target.subset_of(covered);
    for (int i = from; i <= n - left; ++i)
      if (search(i + 1, left - 1, covered | h.attrs(rels[static_cast<std::size_t>(i)]))) return true;
    return false;
  };
  for (int k = 1; k <= std::min(cap, n); ++k)
    if (search(0, k, AttrSet{})) return k;
  if (!target.subset_of(h.attrs_of(s))) fail(ErrorKind::kInternal, "interface not covered by its own relations");
  fail(ErrorKind::kWidthOverflow, "interface " + h.attr_string(target) + " of " + h.names(s) + " needs more than " +
                                      std::to_string(cap) + " relations");
}

/// w(S): cover number of the interface of relation set S within S.
inline int node_width(const Hypergraph& h, RelSet s, int cap = global_caps().width_cover) {
  return min_cover(h, s, h.interface(s), cap);
}

/// True when some single relation of S covers I(S).
inline bool admissible(const Hypergraph& h, RelSet s) {
  AttrSet i = h.interface(s);
  bool ok = false;
  s.for_each([&](RelId r) { ok = ok || i.subset_of(h.attrs(r)); });
  return ok;
}

struct NodeWidth {
  int node;
  RelSet relations;
  AttrSet interface;
  int width;
};

inline std::vector<NodeWidth> width_report(const QueryPlan& p, const Hypergraph& h, int cap = global_caps().width_cover) {
  std::vector<NodeWidth> out;
  for (int i = 0; i < p.size(); ++i) {
    RelSet s = p.node(i).relations;
    out.push_back({i, s, h.interface(s), node_width(h, s, cap)});
  }
  return out;
}

/// Width of a plan: the largest node width. A single scan has width 0, so
/// "width-1 plan" means width at most 1.
inline int width(const QueryPlan& p, const Hypergraph& h, int cap = global_caps().width_cover) {
  int w = 0;
  for (int i = 0; i < p.size(); ++i) w = std::max(w, node_width(h, p.node(i).relations, cap));
  return w;
}

/// Decides whether join tree `t` induces plan `p`: every subtree's relations
/// form a plan node, and for every join u x v some tree edge (s, t) has
/// I(u) within s and I(v) within t. On success `witness` maps each tree node
/// to the plan node with the same relations.
inline bool is_induced_by(const QueryPlan& p, const JoinTree& t, const Hypergraph& h,
                          std::vector<int>* witness = nullptr) {
  std::unordered_map<RelSet, int> by_set;
  for (int i = 0; i < p.size(); ++i) by_set.emplace(p.node(i).relations, i);
  std::vector<int> map(static_cast<std::size_t>(t.size()), -1);
  for (int v = 0; v < t.size(); ++v) {
    auto it = by_set.find(t.subtree_relations(v));
    if (it == by_set.end()) return false;
    map[static_cast<std::size_t>(v)] = it->second;
  }
  auto edges = t.edges();
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    if (n.leaf()) continue;
    RelSet u = p.node(n.left).relations, v = p.node(n.right).relations;
    AttrSet iu = h.interface(u), iv = h.interface(v);
    bool found = false;
    for (auto [a, b] : edges) {
      for (int flip = 0; flip < 2 && !found; ++flip) {
        const auto& x = t.node(flip ? b : a);
        const auto& y = t.node(flip ? a : b);
        if (u.contains(x.relation) && v.contains(y.relation) && iu.subset_of(x.chi) && iv.subset_of(y.chi)) found = true;
      }
      if (found) break;
    }
    if (!found) return false;
  }
  if (witness) *witness = std::move(map);
  return true;
}

/// Builds a join tree that induces `p`, or returns nullopt when none exists
/// (exactly when the plan is invalid or has width above 1).
///
/// In an inducing tree every join u x v links the top relation of one side's
/// tree to the top relation of the other, and that pair must cover I(u) and
/// I(v). So for each plan node we track which relations can be the top of
/// its tree, and link through a recorded choice when rebuilding.
inline std::optional<JoinTree> join_tree_from_plan(const QueryPlan& p, const Hypergraph& h) {
  if (p.empty() || !check_plan(p, h).ok) return std::nullopt;
  struct Choice {
    bool from_left = true;  // the top comes from the left input
    RelId partner = -1;     // top of the other input, linked below the top
  };
  std::vector<std::map<RelId, Choice>> tops(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) {
    const auto& n = p.node(i);
    auto& here = tops[static_cast<std::size_t>(i)];
    if (n.leaf()) {
      here[n.relation] = {};
      continue;
    }
    AttrSet il = h.interface(p.node(n.left).relations), ir = h.interface(p.node(n.right).relations);
    auto covering = [&](int child, const AttrSet& iface) {
      RelId out = -1;
      for (const auto& [r, c] : tops[static_cast<std::size_t>(child)])
        if (out < 0 && iface.subset_of(h.attrs(r))) out = r;
      return out;
    };
    RelId cl = covering(n.left, il), cr = covering(n.right, ir);
    if (cl < 0 || cr < 0) continue;
    for (const auto& [r, c] : tops[static_cast<std::size_t>(n.left)])
      if (il.subset_of(h.attrs(r))) here.emplace(r, Choice{true, cr});
    for (const auto& [r, c] : tops[static_cast<std::size_t>(n.right)])
      if (ir.subset_of(h.attrs(r))) here.emplace(r, Choice{false, cl});
  }
  const auto& root_tops = tops[static_cast<std::size_t>(p.root())];
  if (root_tops.empty()) return std::nullopt;
  std::vector<int> parent(static_cast<std::size_t>(h.num_relations()), -1);
  std::function<void(int, RelId)> link = [&](int i, RelId top) {
    const auto& n = p.node(i);
    if (n.leaf()) return;
    const Choice& c = tops[static_cast<std::size_t>(i)].at(top);
    int own = c.from_left ? n.left : n.right, other = c.from_left ? n.right : n.left;
    parent[static_cast<std::size_t>(c.partner)] = top;
    link(own, top);
    link(other, c.partner);
  };
  RelId root = root_tops.begin()->first;
  link(p.root(), root);
  JoinTree t = JoinTree::from_parents(h, parent);
  if (!validate(t, h) || !is_induced_by(p, t, h)) fail(ErrorKind::kInternal, "rebuilt join tree does not induce the plan");
  return t;
}

/// Cardinalities of relation sets, after projecting each set onto the
/// attributes its plan node keeps.
///
/// Lookups for sets missing from the table raise unknown-cardinality unless an
/// estimator was enabled, in which case the textbook independence estimate
/// prod |R| / prod_a dom(a)^(occurrences(a) - 1) is used and counted.
class CardinalityProvider {
 public:
  void set(RelSet s, double rows) { table_[s] = rows; }
  bool has(RelSet s) const { return table_.count(s) != 0; }
  const std::unordered_map<RelSet, double>& table() const { return table_; }
  std::size_t estimated_lookups() const { return estimated_; }
  bool estimator_enabled() const { return !domains_.empty(); }

  void enable_estimator(const Hypergraph& h, std::vector<double> domain_sizes) {
    if (static_cast<int>(domain_sizes.size()) != h.num_attributes())
      fail(ErrorKind::kInvalidArgument, "one domain size per attribute is required");
    domains_ = std::move(domain_sizes);
    rel_attrs_.clear();
    for (RelId r = 0; r < h.num_relations(); ++r) rel_attrs_.push_back(h.attrs(r));
    names_ = h;
  }

  const std::vector<double>& domains() const { return domains_; }

  double cardinality(RelSet s) const {
    auto it = table_.find(s);
    if (it != table_.end()) return it->second;
    if (domains_.empty()) fail(ErrorKind::kUnknownCardinality, "no cardinality for relation set " + describe(s));
    ++estimated_;
    return estimate(s);
  }

  double operator()(RelSet s) const { return cardinality(s); }

 private:
  double estimate(RelSet s) const {
    double rows = 1.0;
    std::unordered_map<AttrId, int> occurrences;
    bool missing = false;
    s.for_each([&](RelId r) {
      auto base = table_.find(RelSet::single(r));
      if (base == table_.end()) {
        missing = true;
        return;
      }
      rows *= base->second;
      rel_attrs_[static_cast<std::size_t>(r)].for_each([&](AttrId a) { ++occurrences[a]; });
    });
    if (missing) fail(ErrorKind::kUnknownCardinality, "estimator needs base cardinalities for " + describe(s));
    for (auto [a, k] : occurrences)
      if (k > 1) rows /= std::pow(std::max(1.0, domains_[static_cast<std::size_t>(a)]), k - 1);
    return std::max(1.0, std::round(rows));
  }

  std::string describe(RelSet s) const {
    if (names_) return names_->names(s);
    std::string out = "{";
    bool first = true;
    s.for_each([&](RelId r) {
      out += (first ? "#" : ",#") + std::to_string(r);
      first = false;
    });
    return out + "}";
  }

  std::unordered_map<RelSet, double> table_;
  std::vector<double> domains_;
  std::vector<AttrSet> rel_attrs_;
  std::optional<Hypergraph> names_;
  mutable std::size_t estimated_ = 0;
};

/// C_out: the sum of the cardinalities of every plan node, scans included.
inline double cost(const QueryPlan& p, const CardinalityProvider& cards) {
  double total = 0;
  for (const auto& n : p.nodes()) total += cards.cardinality(n.relations);
  return total;
}

}  // namespace metadecomp
