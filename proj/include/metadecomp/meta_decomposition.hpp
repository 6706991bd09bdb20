#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/join_tree.hpp"

namespace metadecomp {

/// Node of a meta-decomposition. Physical nodes carry one relation; minor
/// nodes carry none and stand for an attribute set shared by several subtrees.
struct MetaNode {
  std::optional<RelId> relation;
  AttrSet chi;
  AttrSet kappa;  ///< attributes shared with the rest of the decomposition
  int parent = -1;
  std::vector<int> children;
  int step = 0;  ///< reduction step at which the node was created

  bool minor() const { return !relation.has_value(); }
};

/// Rooted tree that encodes every join tree of an acyclic query at once.
class MetaDecomposition {
 public:
  MetaDecomposition() = default;
  MetaDecomposition(std::vector<MetaNode> nodes, int root) : nodes_(std::move(nodes)), root_(root) { link(); }

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return root_; }
  const MetaNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<MetaNode>& nodes() const { return nodes_; }

  int num_minor() const {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](const MetaNode& n) { return n.minor(); }));
  }

  int fanout() const {
    int f = 0;
    for (const auto& n : nodes_) f = std::max(f, static_cast<int>(n.children.size()));
    return f;
  }

  int physical_node(RelId r) const {
    for (int i = 0; i < size(); ++i)
      if (nodes_[static_cast<std::size_t>(i)].relation == r) return i;
    return -1;
  }

  /// Relations of the physical nodes in the subtree rooted at v.
  RelSet unit(int v) const {
    RelSet s;
    std::vector<int> stack{v};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (node(x).relation) s.insert(*node(x).relation);
      for (int c : node(x).children) stack.push_back(c);
    }
    return s;
  }

  std::vector<int> subtree_nodes(int v) const {
    std::vector<int> out;
    std::vector<int> stack{v};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      out.push_back(x);
      for (int c : node(x).children) stack.push_back(c);
    }
    return out;
  }

  /// Children whose kappa equals the bag of minor node v.
  std::vector<int> origin_children(int v) const {
    std::vector<int> out;
    for (int c : node(v).children)
      if (node(v).minor() && node(c).kappa == node(v).chi) out.push_back(c);
    return out;
  }

  std::vector<int> proper_children(int v) const {
    std::vector<int> out;
    for (int c : node(v).children)
      if (!(node(v).minor() && node(c).kappa == node(v).chi)) out.push_back(c);
    return out;
  }

  bool well_formed() const { return well_formed_; }

 private:
  void link() {
    well_formed_ = root_ >= 0 && root_ < size();
    for (auto& n : nodes_) n.children.clear();
    for (int i = 0; i < size(); ++i) {
      int p = nodes_[static_cast<std::size_t>(i)].parent;
      if (i == root_) {
        if (p != -1) well_formed_ = false;
        continue;
      }
      if (p < 0 || p >= size() || p == i) {
        well_formed_ = false;
        continue;
      }
      nodes_[static_cast<std::size_t>(p)].children.push_back(i);
    }
    if (!well_formed_) return;
    std::vector<char> seen(nodes_.size(), 0);
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

  std::vector<MetaNode> nodes_;
  int root_ = -1;
  bool well_formed_ = false;
};

/// What one reduction round removed and introduced.
struct RoundReport {
  struct Group {
    std::vector<EdgeId> members;
    AttrSet overlap;
    EdgeId special;
  };
  struct Ear {
    EdgeId edge;
    AttrSet kappa;
    EdgeId witness;
  };
  std::vector<Group> groups;
  std::vector<Ear> ears;
  std::vector<int> new_nodes;
};

/// Incremental construction of a meta-decomposition by ear removal.
///
/// Each round first removes groups of two or more ears with equal overlap,
/// replacing every group by one special edge equal to the shared overlap, and
/// repeats that step until no group is left. It then removes all remaining
/// ears at once. Grouping has to reach a fixpoint before ears are removed:
/// a special edge can form a new group with an untouched edge, and removing
/// such a pair as two ears would leave no node with an empty kappa.
class MetaBuilder {
 public:
  explicit MetaBuilder(const Hypergraph& h) : h_(&h), w_(h) {}

  bool done() const { return w_.empty(); }
  const WorkingHypergraph& working() const { return w_; }
  const std::vector<MetaNode>& nodes() const { return nodes_; }

  RoundReport round() {
    RoundReport report;
    if (w_.empty()) return report;
    ++step_;
    for (;;) {
      auto groups = find_groups();
      if (groups.empty()) break;
      for (auto& [overlap, members] : groups) {
        RoundReport::Group g;
        g.members = members;
        g.overlap = overlap;
        for (EdgeId e : members) {
          // A special edge equal to the group overlap lives on in the new
          // special edge, so its minor node is created only once that one goes.
          if (!(e.special && w_.attrs(e) == overlap)) report.new_nodes.push_back(node_for_edge(e, overlap));
          w_.remove(e);
        }
        g.special = w_.add_special(overlap);
        report.groups.push_back(std::move(g));
      }
      ++step_;
    }

    std::vector<RoundReport::Ear> ears;
    for (const auto& e : w_.edges())
      if (auto wit = w_.ear_witness(e.id)) ears.push_back({e.id, w_.overlap(e.id), *wit});
    if (ears.empty()) fail(ErrorKind::kNotAcyclic, "query hypergraph is cyclic");
    if (ears.size() == w_.size() && ears.size() > 1)
      fail(ErrorKind::kInternal, "ear removal would leave no root");

    std::vector<int> created;
    for (const auto& ear : ears) created.push_back(node_for_edge(ear.edge, ear.kappa));
    for (const auto& ear : ears) w_.remove(ear.edge);
    const std::size_t ear_nodes = created.size();
    for (std::size_t i = 0; i < ear_nodes; ++i) {
      AttrSet k = nodes_[static_cast<std::size_t>(created[i])].kappa;
      if (k.empty() || minor_by_chi_.count(k)) continue;
      auto same = std::count_if(nodes_.begin(), nodes_.end(), [&](const MetaNode& n) { return n.kappa == k; });
      if (same >= 2) {
        MetaNode m;
        m.chi = k;
        m.kappa = k;
        m.step = step_;
        minor_by_chi_[k] = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(m));
        created.push_back(static_cast<int>(nodes_.size()) - 1);
      }
    }
    report.new_nodes.insert(report.new_nodes.end(), created.begin(), created.end());
    report.ears = std::move(ears);
    return report;
  }

  /// Links the created nodes into a tree; call once done() holds.
  MetaDecomposition finish() {
    int root = -1;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (!nodes_[static_cast<std::size_t>(i)].kappa.empty()) continue;
      if (root >= 0) fail(ErrorKind::kInternal, "several nodes have an empty kappa");
      root = i;
    }
    if (root < 0) fail(ErrorKind::kInternal, "no node has an empty kappa");
    for (int p = 0; p < static_cast<int>(nodes_.size()); ++p) {
      if (p == root) continue;
      nodes_[static_cast<std::size_t>(p)].parent = choose_parent(p);
    }
    root = collapse_binary_root(root);
    MetaDecomposition m(nodes_, root);
    if (!m.well_formed()) fail(ErrorKind::kInternal, "parent assignment does not form a tree");
    return m;
  }

 private:
  // A minor root over exactly two subtrees admits a single connecting edge, so
  // the physical child with the lower relation id takes its place. The other
  // child keeps its kappa, which no third node shares.
  int collapse_binary_root(int root) {
    std::vector<int> kids;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
      if (nodes_[static_cast<std::size_t>(i)].parent == root && i != root) kids.push_back(i);
    if (!nodes_[static_cast<std::size_t>(root)].minor() || kids.size() != 2) return root;
    int keep = -1;
    for (int k : kids) {
      const auto& n = nodes_[static_cast<std::size_t>(k)];
      if (n.minor()) continue;
      if (keep < 0 || *n.relation < *nodes_[static_cast<std::size_t>(keep)].relation) keep = k;
    }
    if (keep < 0) return root;
    int other = kids[0] == keep ? kids[1] : kids[0];
    nodes_[static_cast<std::size_t>(keep)].kappa = AttrSet{};
    nodes_[static_cast<std::size_t>(keep)].parent = -1;
    nodes_[static_cast<std::size_t>(other)].parent = keep;
    nodes_.erase(nodes_.begin() + root);
    for (auto& n : nodes_)
      if (n.parent > root) --n.parent;
    minor_by_chi_.clear();
    return keep > root ? keep - 1 : keep;
  }

  std::vector<std::pair<AttrSet, std::vector<EdgeId>>> find_groups() const {
    std::map<AttrSet, std::vector<EdgeId>> by_overlap;
    for (const auto& e : w_.edges())
      if (w_.is_ear(e.id)) by_overlap[w_.overlap(e.id)].push_back(e.id);
    std::vector<std::pair<AttrSet, std::vector<EdgeId>>> out;
    for (auto& [o, members] : by_overlap) {
      if (members.size() < 2) continue;
      if (o.empty()) fail(ErrorKind::kInternal, "edges with empty overlap in a connected hypergraph");
      out.emplace_back(o, members);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second.front() < b.second.front(); });
    return out;
  }

  int node_for_edge(EdgeId e, const AttrSet& kappa) {
    const AttrSet& attrs = w_.attrs(e);
    if (e.special) {
      auto it = minor_by_chi_.find(attrs);
      if (it != minor_by_chi_.end()) {
        // The minor node already stands for this bag; a later removal of an
        // equal edge can only shrink what it shares with the rest.
        MetaNode& m = nodes_[static_cast<std::size_t>(it->second)];
        if (!kappa.subset_of(m.kappa)) fail(ErrorKind::kInternal, "special edge disagrees with an existing minor node");
        m.kappa = kappa;
        m.step = step_;
        return it->second;
      }
    }
    MetaNode n;
    if (!e.special) n.relation = e.index;
    n.chi = attrs;
    n.kappa = kappa;
    n.step = step_;
    nodes_.push_back(std::move(n));
    int id = static_cast<int>(nodes_.size()) - 1;
    if (e.special) minor_by_chi_[attrs] = id;
    return id;
  }

  int choose_parent(int p) const {
    const MetaNode& np = nodes_[static_cast<std::size_t>(p)];
    auto it = minor_by_chi_.find(np.kappa);
    if (it != minor_by_chi_.end() && it->second != p) return it->second;
    int best = -1;
    for (int q = 0; q < static_cast<int>(nodes_.size()); ++q) {
      if (q == p) continue;
      const MetaNode& nq = nodes_[static_cast<std::size_t>(q)];
      if (!np.kappa.subset_of(nq.chi) || np.kappa.subset_of(nq.kappa)) continue;
      if (best < 0 || nq.step > nodes_[static_cast<std::size_t>(best)].step) best = q;
    }
    if (best < 0) fail(ErrorKind::kInternal, "no parent candidate for a meta node");
    return best;
  }

  const Hypergraph* h_;
  WorkingHypergraph w_;
  std::vector<MetaNode> nodes_;
  std::map<AttrSet, int> minor_by_chi_;
  int step_ = 0;
};

/// Runs one reduction round on a fresh builder; mainly useful for inspection.
inline RoundReport reduce_round(MetaBuilder& b) { return b.round(); }

/// Builds the meta-decomposition of an acyclic query; throws not-acyclic for
/// cyclic input.
inline MetaDecomposition build_meta(const Hypergraph& h) {
  MetaBuilder b(h);
  while (!b.done()) b.round();
  return b.finish();
}

/// Checks C1, C2, C3 (physical bags match, minor nodes unlabelled), C4(a),
/// C4(b) and C5, reporting the first violation in that order. Kappa values are
/// recomputed from the bags and compared against the stored ones.
inline ValidationResult validate_meta(const MetaDecomposition& m, const Hypergraph& h) {
  if (!m.well_formed() || m.size() == 0) return ValidationResult::violation("tree", "parent pointers do not form a rooted tree");
  int n = m.size();
  std::vector<int> holders(static_cast<std::size_t>(h.num_relations()), 0);
  for (int i = 0; i < n; ++i) {
    const auto& r = m.node(i).relation;
    if (!r) continue;
    if (*r < 0 || *r >= h.num_relations()) return ValidationResult::violation("C1", "unknown relation label", {i});
    ++holders[static_cast<std::size_t>(*r)];
  }
  for (RelId r = 0; r < h.num_relations(); ++r)
    if (holders[static_cast<std::size_t>(r)] != 1)
      return ValidationResult::violation("C1", "relation " + h.relation_name(r) + " labels " +
                                                   std::to_string(holders[static_cast<std::size_t>(r)]) + " physical nodes");

  AttrSet all_attrs;
  for (const auto& x : m.nodes()) all_attrs |= x.chi;
  ValidationResult c2 = ValidationResult::pass();
  all_attrs.for_each([&](AttrId a) {
    if (!c2.ok) return;
    std::vector<int> tops;
    for (int i = 0; i < n; ++i) {
      const auto& x = m.node(i);
      if (x.chi.contains(a) && (x.parent < 0 || !m.node(x.parent).chi.contains(a))) tops.push_back(i);
    }
    if (tops.size() > 1) c2 = ValidationResult::violation("C2", "nodes holding " + h.attribute_name(a) + " are disconnected", tops, a);
  });
  if (!c2.ok) return c2;

  for (int i = 0; i < n; ++i) {
    const auto& x = m.node(i);
    if (x.relation && x.chi != h.attrs(*x.relation))
      return ValidationResult::violation("C3", "physical bag differs from its relation", {i});
    if (!x.relation && x.chi.empty()) return ValidationResult::violation("C3", "minor node with an empty bag", {i});
  }

  // Recompute kappa(p) = chi(p) & chi(outside the subtree of p).
  std::vector<AttrSet> kappa(static_cast<std::size_t>(n));
  std::vector<std::vector<char>> inside(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int p = 0; p < n; ++p) {
    for (int x : m.subtree_nodes(p)) inside[static_cast<std::size_t>(p)][static_cast<std::size_t>(x)] = 1;
    AttrSet outside;
    for (int x = 0; x < n; ++x)
      if (!inside[static_cast<std::size_t>(p)][static_cast<std::size_t>(x)]) outside |= m.node(x).chi;
    kappa[static_cast<std::size_t>(p)] = m.node(p).chi & outside;
  }
  for (int p = 0; p < n; ++p) {
    if (kappa[static_cast<std::size_t>(p)] != m.node(p).kappa)
      return ValidationResult::violation("C4(a)", "stored kappa differs from the recomputed one", {p});
    int q = m.node(p).parent;
    if (q < 0) continue;
    if (!kappa[static_cast<std::size_t>(p)].subset_of(m.node(q).chi))
      return ValidationResult::violation("C4(a)", "kappa is not contained in the parent bag", {p, q});
  }
  for (int p = 0; p < n; ++p) {
    int q = m.node(p).parent;
    if (q < 0) continue;
    const AttrSet& k = kappa[static_cast<std::size_t>(p)];
    if (k == m.node(q).chi) continue;
    for (int s = 0; s < n; ++s) {
      if (inside[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)]) continue;
      if (k.subset_of(m.node(s).chi))
        return ValidationResult::violation("C4(b)", "kappa is covered by a node outside the parent's subtree", {p, q, s});
    }
  }

  std::map<AttrSet, std::vector<int>> by_kappa;
  for (int p = 0; p < n; ++p) by_kappa[kappa[static_cast<std::size_t>(p)]].push_back(p);
  for (const auto& [k, members] : by_kappa) {
    if (members.size() < 2) continue;
    int minors = 0;
    for (int x = 0; x < n; ++x)
      if (m.node(x).minor() && m.node(x).chi == k) ++minors;
    if (minors != 1)
      return ValidationResult::violation("C5", "nodes sharing a kappa need exactly one minor node with that bag", members);
  }
  return ValidationResult::pass();
}

}  // namespace metadecomp
