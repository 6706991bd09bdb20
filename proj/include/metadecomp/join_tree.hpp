#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"

namespace metadecomp {

/// Outcome of a structural check. `condition` names the first violated
/// property ("tree", "C1", "C2", ...), `nodes` the offending nodes and
/// `attribute` the offending attribute when one applies.
struct ValidationResult {
  bool ok = true;
  std::string condition;
  std::string detail;
  std::vector<int> nodes;
  AttrId attribute = -1;

  static ValidationResult pass() { return {}; }
  static ValidationResult violation(std::string cond, std::string detail, std::vector<int> nodes = {},
                                    AttrId attribute = -1) {
    return {false, std::move(cond), std::move(detail), std::move(nodes), attribute};
  }
  explicit operator bool() const { return ok; }
};

/// Rooted tree whose nodes are labelled by single relations.
///
/// Nodes carry their own bag of attributes so that hand-built trees with wrong
/// bags can be represented and rejected by validate().
class JoinTree {
 public:
  struct Node {
    RelId relation = -1;
    AttrSet chi;
    int parent = -1;
    std::vector<int> children;
  };

  JoinTree() = default;

  /// `parent[i]` is the parent of node i, or -1 for the root. Children are
  /// stored in increasing node order.
  JoinTree(std::vector<RelId> relations, std::vector<AttrSet> bags, const std::vector<int>& parent) {
    if (relations.size() != bags.size() || relations.size() != parent.size())
      fail(ErrorKind::kInvalidArgument, "join tree arrays differ in length");
    nodes_.resize(relations.size());
    for (std::size_t i = 0; i < relations.size(); ++i) {
      nodes_[i].relation = relations[i];
      nodes_[i].chi = std::move(bags[i]);
      nodes_[i].parent = parent[i];
    }
    link();
  }

  /// Node i is labelled by relation i and carries its attributes.
  static JoinTree from_parents(const Hypergraph& h, const std::vector<int>& parent) {
    std::vector<RelId> rels;
    std::vector<AttrSet> bags;
    for (RelId r = 0; r < h.num_relations(); ++r) {
      rels.push_back(r);
      bags.push_back(h.attrs(r));
    }
    return JoinTree(std::move(rels), std::move(bags), parent);
  }

  /// Orients an undirected tree over relation ids away from `root`.
  static JoinTree from_edges(const Hypergraph& h, const std::vector<std::pair<int, int>>& edges, RelId root) {
    int n = h.num_relations();
    if (static_cast<int>(edges.size()) != n - 1) fail(ErrorKind::kInvalidArgument, "edge list is not a spanning tree");
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) {
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<int> parent(static_cast<std::size_t>(n), -2);
    parent[static_cast<std::size_t>(root)] = -1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (parent[static_cast<std::size_t>(w)] != -2) continue;
        parent[static_cast<std::size_t>(w)] = v;
        stack.push_back(w);
      }
    }
    if (std::count(parent.begin(), parent.end(), -2) != 0)
      fail(ErrorKind::kInvalidArgument, "edge list is not a spanning tree");
    return from_parents(h, parent);
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return root_; }
  const Node& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// False when the parent pointers do not form a single rooted tree.
  bool well_formed() const { return well_formed_; }

  int fanout() const {
    int f = 0;
    for (const auto& n : nodes_) f = std::max(f, static_cast<int>(n.children.size()));
    return f;
  }

  /// Undirected edges as (parent, child) pairs.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i)
      if (nodes_[static_cast<std::size_t>(i)].parent >= 0) out.emplace_back(nodes_[static_cast<std::size_t>(i)].parent, i);
    return out;
  }

  bool adjacent(int a, int b) const {
    return node(a).parent == b || node(b).parent == a;
  }

  int node_of(RelId r) const {
    for (int i = 0; i < size(); ++i)
      if (nodes_[static_cast<std::size_t>(i)].relation == r) return i;
    return -1;
  }

  /// Relations labelling the subtree rooted at `p` (the induced query Q(p)).
  RelSet subtree_relations(int p) const {
    RelSet s;
    std::vector<int> stack{p};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      s.insert(node(v).relation);
      for (int c : node(v).children) stack.push_back(c);
    }
    return s;
  }

  /// Relations on p's side after removing the tree edge {p, q}.
  RelSet side_relations(int p, int q) const {
    if (!adjacent(p, q)) fail(ErrorKind::kInvalidArgument, "nodes are not adjacent");
    RelSet s;
    std::vector<std::pair<int, int>> stack{{p, q}};
    while (!stack.empty()) {
      auto [v, from] = stack.back();
      stack.pop_back();
      s.insert(node(v).relation);
      for (int w : neighbours(v))
        if (w != from) stack.emplace_back(w, v);
    }
    return s;
  }

  std::vector<int> neighbours(int v) const {
    std::vector<int> out = node(v).children;
    if (node(v).parent >= 0) out.push_back(node(v).parent);
    return out;
  }

  /// Same undirected tree rooted at `new_root`.
  JoinTree reroot(int new_root) const {
    if (new_root < 0 || new_root >= size()) fail(ErrorKind::kInvalidArgument, "reroot target is not a node");
    JoinTree t = *this;
    int prev = -1;
    int v = new_root;
    while (v >= 0) {
      int next = nodes_[static_cast<std::size_t>(v)].parent;
      t.nodes_[static_cast<std::size_t>(v)].parent = prev;
      prev = v;
      v = next;
    }
    t.link();
    return t;
  }

  /// parent relation of each relation (-1 at the root); two trees over the
  /// same query are equal exactly when these vectors are equal.
  std::vector<int> parent_relations(int num_relations) const {
    std::vector<int> out(static_cast<std::size_t>(num_relations), -2);
    for (const auto& n : nodes_) {
      if (n.relation < 0 || n.relation >= num_relations) continue;
      out[static_cast<std::size_t>(n.relation)] = n.parent < 0 ? -1 : node(n.parent).relation;
    }
    return out;
  }

  /// Canonical text form, children ordered by the smallest relation id in
  /// their subtree: "R1(R2(R3),R4)".
  std::string canonical(const Hypergraph& h) const {
    std::function<std::string(int)> rec = [&](int v) {
      std::string s = h.relation_name(node(v).relation);
      auto kids = node(v).children;
      std::sort(kids.begin(), kids.end(), [&](int a, int b) {
        return subtree_relations(a).min() < subtree_relations(b).min();
      });
      if (!kids.empty()) {
        s += "(";
        for (std::size_t i = 0; i < kids.size(); ++i) {
          if (i) s += ",";
          s += rec(kids[i]);
        }
        s += ")";
      }
      return s;
    };
    return root_ < 0 ? std::string() : rec(root_);
  }

 private:
  void link() {
    root_ = -1;
    well_formed_ = true;
    for (auto& n : nodes_) n.children.clear();
    for (int i = 0; i < size(); ++i) {
      int p = nodes_[static_cast<std::size_t>(i)].parent;
      if (p == -1) {
        if (root_ >= 0) well_formed_ = false;
        else root_ = i;
      } else if (p < 0 || p >= size() || p == i) {
        well_formed_ = false;
      } else {
        nodes_[static_cast<std::size_t>(p)].children.push_back(i);
      }
    }
    if (root_ < 0) {
      well_formed_ = false;
      return;
    }
    // Every node must reach the root without revisiting a node.
    std::vector<int> seen(nodes_.size(), 0);
    std::vector<int> stack{root_};
    int count = 0;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(v)]++) {
        well_formed_ = false;
        return;
      }
      ++count;
      for (int c : nodes_[static_cast<std::size_t>(v)].children) stack.push_back(c);
    }
    if (count != size()) well_formed_ = false;
  }

  std::vector<Node> nodes_;
  int root_ = -1;
  bool well_formed_ = false;
};

/// Checks C1 (each relation labels exactly one node), C2 (the nodes holding an
/// attribute are connected) and C3 (bags equal the labelling relation's
/// attributes), in that order.
inline ValidationResult validate(const JoinTree& t, const Hypergraph& h) {
  if (!t.well_formed() || t.size() == 0) return ValidationResult::violation("tree", "parent pointers do not form a rooted tree");
  std::vector<std::vector<int>> holders(static_cast<std::size_t>(h.num_relations()));
  for (int i = 0; i < t.size(); ++i) {
    RelId r = t.node(i).relation;
    if (r < 0 || r >= h.num_relations())
      return ValidationResult::violation("C1", "node is labelled by an unknown relation", {i});
    holders[static_cast<std::size_t>(r)].push_back(i);
  }
  for (RelId r = 0; r < h.num_relations(); ++r) {
    const auto& hs = holders[static_cast<std::size_t>(r)];
    if (hs.size() != 1)
      return ValidationResult::violation(
          "C1", "relation " + h.relation_name(r) + " labels " + std::to_string(hs.size()) + " nodes", hs);
  }
  // An attribute's node set is connected iff exactly one holder has a parent
  // that does not hold it.
  AttrSet all_attrs;
  for (const auto& n : t.nodes()) all_attrs |= n.chi;
  ValidationResult c2 = ValidationResult::pass();
  all_attrs.for_each([&](AttrId a) {
    if (!c2.ok) return;
    std::vector<int> tops;
    for (int i = 0; i < t.size(); ++i) {
      const auto& n = t.node(i);
      if (n.chi.contains(a) && (n.parent < 0 || !t.node(n.parent).chi.contains(a))) tops.push_back(i);
    }
    if (tops.size() > 1) {
      std::string name = a < h.num_attributes() ? h.attribute_name(a) : std::to_string(a);
      c2 = ValidationResult::violation("C2", "nodes holding " + name + " are disconnected", tops, a);
    }
  });
  if (!c2.ok) return c2;
  for (int i = 0; i < t.size(); ++i)
    if (t.node(i).chi != h.attrs(t.node(i).relation))
      return ValidationResult::violation("C3", "bag differs from the attributes of " + h.relation_name(t.node(i).relation), {i});
  return ValidationResult::pass();
}

inline JoinTree reroot(const JoinTree& t, int new_root) { return t.reroot(new_root); }

/// Q(p): the relations in the subtree rooted at node p.
inline RelSet induced_query(const JoinTree& t, int p) { return t.subtree_relations(p); }

inline int fanout(const JoinTree& t) { return t.fanout(); }

}  // namespace metadecomp
