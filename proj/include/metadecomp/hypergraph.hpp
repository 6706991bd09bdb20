#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metadecomp/error.hpp"
#include "metadecomp/sets.hpp"

namespace metadecomp {

/// Acyclic conjunctive query viewed as a hypergraph: relations are edges over
/// attribute vertices, plus the set of output attributes.
///
/// Instances are immutable once built. Construction rejects empty relations,
/// duplicate names, output attributes that no relation mentions, and
/// disconnected inputs (which would need a Cartesian product).
class Hypergraph {
 public:
  struct Relation {
    std::string name;
    AttrSet attrs;
  };

  Hypergraph() = default;

  Hypergraph(std::vector<std::string> attribute_names, std::vector<Relation> relations, AttrSet output)
      : attr_names_(std::move(attribute_names)), rels_(std::move(relations)), output_(std::move(output)) {
    validate();
  }

  /// Builds a query from relation names and attribute-name lists. When
  /// `output` is empty the query is Boolean; pass every attribute for a full join.
  static Hypergraph from_lists(
      const std::vector<std::pair<std::string, std::vector<std::string>>>& relations,
      const std::vector<std::string>& output = {}) {
    std::vector<std::string> names;
    std::map<std::string, AttrId> ids;
    auto intern = [&](const std::string& a) {
      auto [it, fresh] = ids.emplace(a, static_cast<AttrId>(names.size()));
      if (fresh) names.push_back(a);
      return it->second;
    };
    std::vector<Relation> rels;
    for (const auto& [name, attrs] : relations) {
      Relation r{name, {}};
      for (const auto& a : attrs) {
        auto id = intern(a);
        if (r.attrs.contains(id))
          fail(ErrorKind::kInvalidArgument, "relation " + name + " lists attribute " + a + " twice");
        r.attrs.insert(id);
      }
      rels.push_back(std::move(r));
    }
    AttrSet out;
    for (const auto& a : output) {
      auto it = ids.find(a);
      if (it == ids.end())
        fail(ErrorKind::kInvalidArgument, "output attribute " + a + " does not occur in any relation");
      out.insert(it->second);
    }
    return Hypergraph(std::move(names), std::move(rels), std::move(out));
  }

  int num_relations() const { return static_cast<int>(rels_.size()); }
  int num_attributes() const { return static_cast<int>(attr_names_.size()); }
  const std::vector<Relation>& relations() const { return rels_; }
  const AttrSet& attrs(RelId r) const { return rels_.at(static_cast<std::size_t>(r)).attrs; }
  const std::string& relation_name(RelId r) const { return rels_.at(static_cast<std::size_t>(r)).name; }
  const std::string& attribute_name(AttrId a) const { return attr_names_.at(static_cast<std::size_t>(a)); }
  const std::vector<std::string>& attribute_names() const { return attr_names_; }
  const AttrSet& output() const { return output_; }
  bool is_boolean() const { return output_.empty(); }
  RelSet all() const { return RelSet::first_n(num_relations()); }

  std::optional<RelId> find_relation(const std::string& name) const {
    for (std::size_t i = 0; i < rels_.size(); ++i)
      if (rels_[i].name == name) return static_cast<RelId>(i);
    return std::nullopt;
  }

  std::optional<AttrId> find_attribute(const std::string& name) const {
    for (std::size_t i = 0; i < attr_names_.size(); ++i)
      if (attr_names_[i] == name) return static_cast<AttrId>(i);
    return std::nullopt;
  }

  AttrSet attrs_of(RelSet s) const {
    AttrSet out;
    s.for_each([&](RelId r) { out |= attrs(r); });
    return out;
  }

  /// Attributes shared between the relations in `s` and the remaining ones.
  AttrSet interface(RelSet s) const { return attrs_of(s) & attrs_of(all() - s); }

  /// Attributes a plan node over `s` must keep: its interface plus any output
  /// attribute it covers.
  AttrSet kept_attrs(RelSet s) const { return interface(s) | (output_ & attrs_of(s)); }

  bool shares_attribute(RelSet a, RelSet b) const { return attrs_of(a).intersects(attrs_of(b)); }

  /// True when `s` is non-empty and connected through shared attributes.
  bool connected(RelSet s) const {
    if (s.empty()) return false;
    RelSet seen = RelSet::single(s.min());
    AttrSet frontier = attrs(s.min());
    bool grew = true;
    while (grew) {
      grew = false;
      (s - seen).for_each([&](RelId r) {
        if (attrs(r).intersects(frontier)) {
          seen.insert(r);
          frontier |= attrs(r);
          grew = true;
        }
      });
    }
    return seen == s;
  }

  std::string names(RelSet s) const {
    std::string out = "{";
    bool first = true;
    s.for_each([&](RelId r) {
      if (!first) out += ",";
      out += relation_name(r);
      first = false;
    });
    return out + "}";
  }

  std::vector<std::string> attr_list(const AttrSet& a) const {
    std::vector<std::string> out;
    a.for_each([&](AttrId x) { out.push_back(attribute_name(x)); });
    return out;
  }

  std::string attr_string(const AttrSet& a) const {
    std::string out = "{";
    bool first = true;
    a.for_each([&](AttrId x) {
      if (!first) out += ",";
      out += attribute_name(x);
      first = false;
    });
    return out + "}";
  }

 private:
  void validate() const {
    if (rels_.empty()) fail(ErrorKind::kInvalidArgument, "query has no relations");
    if (rels_.size() > static_cast<std::size_t>(RelSet::kMaxRelations))
      fail(ErrorKind::kInvalidArgument, "at most 64 relations are supported");
    for (std::size_t i = 0; i < rels_.size(); ++i) {
      if (rels_[i].attrs.empty()) fail(ErrorKind::kInvalidArgument, "relation " + rels_[i].name + " has no attributes");
      for (std::size_t j = 0; j < i; ++j)
        if (rels_[i].name == rels_[j].name)
          fail(ErrorKind::kInvalidArgument, "duplicate relation name " + rels_[i].name);
      rels_[i].attrs.for_each([&](AttrId a) {
        if (a < 0 || a >= num_attributes())
          fail(ErrorKind::kInvalidArgument, "relation " + rels_[i].name + " uses an undeclared attribute");
      });
    }
    if (!output_.subset_of(attrs_of(all())))
      fail(ErrorKind::kInvalidArgument, "output attributes must occur in some relation");
    if (!connected(all()))
      fail(ErrorKind::kDisconnected, "query hypergraph is disconnected; Cartesian products are not supported");
  }

  std::vector<std::string> attr_names_;
  std::vector<Relation> rels_;
  AttrSet output_;
};

/// Identifies an edge of a working hypergraph. Special edges introduced while
/// building a meta-decomposition live in their own id space.
struct EdgeId {
  bool special = false;
  int index = 0;

  static EdgeId base(RelId r) { return {false, r}; }
  friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

/// Mutable copy of a hypergraph used by ear removal.
class WorkingHypergraph {
 public:
  struct Edge {
    EdgeId id;
    AttrSet attrs;
  };

  WorkingHypergraph() = default;
  explicit WorkingHypergraph(const Hypergraph& h) {
    for (RelId r = 0; r < h.num_relations(); ++r) edges_.push_back({EdgeId::base(r), h.attrs(r)});
  }

  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  bool contains(EdgeId e) const { return find(e) != nullptr; }

  const AttrSet& attrs(EdgeId e) const { return checked(e).attrs; }

  /// Attributes of `e` that also occur in some other edge.
  AttrSet overlap(EdgeId e) const {
    const Edge& self = checked(e);
    AttrSet others;
    for (const auto& x : edges_)
      if (x.id != e) others |= x.attrs;
    return self.attrs & others;
  }

  /// Returns the smallest witness edge when `e` is an ear. A lone edge is an
  /// ear witnessed by itself.
  std::optional<EdgeId> ear_witness(EdgeId e) const {
    const Edge& self = checked(e);
    if (edges_.size() == 1) return e;
    AttrSet o = overlap(e);
    for (const auto& x : edges_)
      if (x.id != self.id && o.subset_of(x.attrs)) return x.id;
    return std::nullopt;
  }

  bool is_ear(EdgeId e) const { return ear_witness(e).has_value(); }

  void remove(EdgeId e) {
    auto it = std::find_if(edges_.begin(), edges_.end(), [&](const Edge& x) { return x.id == e; });
    if (it == edges_.end()) fail(ErrorKind::kInvalidArgument, "edge is not part of the hypergraph");
    edges_.erase(it);
  }

  EdgeId add_special(AttrSet attrs) {
    EdgeId id{true, next_special_++};
    edges_.push_back({id, std::move(attrs)});
    return id;
  }

 private:
  const Edge* find(EdgeId e) const {
    for (const auto& x : edges_)
      if (x.id == e) return &x;
    return nullptr;
  }
  const Edge& checked(EdgeId e) const {
    const Edge* x = find(e);
    if (x == nullptr) fail(ErrorKind::kInvalidArgument, "edge is not part of the hypergraph");
    return *x;
  }

  std::vector<Edge> edges_;
  int next_special_ = 0;
};

/// o(e, H): the attributes of relation `r` shared with any other relation.
inline AttrSet overlap(const Hypergraph& h, RelId r) {
  if (r < 0 || r >= h.num_relations()) fail(ErrorKind::kInvalidArgument, "unknown relation id " + std::to_string(r));
  return h.attrs(r) & h.attrs_of(h.all() - RelSet::single(r));
}

inline std::optional<RelId> ear_witness(const Hypergraph& h, RelId r) {
  WorkingHypergraph w(h);
  if (r < 0 || r >= h.num_relations()) fail(ErrorKind::kInvalidArgument, "unknown relation id " + std::to_string(r));
  auto e = w.ear_witness(EdgeId::base(r));
  if (!e) return std::nullopt;
  return e->index;
}

inline bool is_ear(const Hypergraph& h, RelId r) { return ear_witness(h, r).has_value(); }

/// GYO reduction: repeatedly removes ears; acyclic iff the hypergraph empties.
inline bool gyo_is_acyclic(const Hypergraph& h) {
  WorkingHypergraph w(h);
  while (!w.empty()) {
    bool removed = false;
    for (const auto& e : w.edges()) {
      if (w.is_ear(e.id)) {
        w.remove(e.id);
        removed = true;
        break;
      }
    }
    if (!removed) return false;
  }
  return true;
}

}  // namespace metadecomp
