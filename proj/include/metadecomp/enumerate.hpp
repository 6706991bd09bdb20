#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/join_tree.hpp"
#include "metadecomp/meta_decomposition.hpp"

namespace metadecomp {

/// Decodes a Pruefer sequence over vertices 0..k-1 into k-1 edges in linear time.
inline void decode_pruefer(const std::vector<int>& seq, int k, std::vector<int>& degree,
                           std::vector<std::pair<int, int>>& edges) {
  edges.clear();
  if (k < 2) return;
  if (k == 2) {
    edges.emplace_back(0, 1);
    return;
  }
  degree.assign(static_cast<std::size_t>(k), 1);
  for (int v : seq) ++degree[static_cast<std::size_t>(v)];
  int ptr = 0;
  while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
  int leaf = ptr;
  for (int v : seq) {
    edges.emplace_back(leaf, v);
    if (--degree[static_cast<std::size_t>(v)] == 1 && v < ptr) {
      leaf = v;
    } else {
      ++ptr;
      while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
      leaf = ptr;
    }
  }
  edges.emplace_back(leaf, k - 1);
}

/// Streams every labelled tree over k vertices exactly once (k^(k-2) trees).
class PrueferTrees {
 public:
  explicit PrueferTrees(int k) : k_(k), seq_(static_cast<std::size_t>(k > 2 ? k - 2 : 0), 0) { decode(); }

  int vertices() const { return k_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Moves to the next sequence; returns false (and wraps around) at the end.
  bool advance() {
    for (std::size_t i = seq_.size(); i-- > 0;) {
      if (++seq_[i] < k_) {
        decode();
        return true;
      }
      seq_[i] = 0;
    }
    decode();
    return false;
  }

  void reset() {
    std::fill(seq_.begin(), seq_.end(), 0);
    decode();
  }

 private:
  void decode() { decode_pruefer(seq_, k_, degree_, edges_); }

  int k_;
  std::vector<int> seq_;
  std::vector<int> degree_;
  std::vector<std::pair<int, int>> edges_;
};

/// All unrooted trees over the given vertex labels, as edge lists.
inline std::vector<std::vector<std::pair<int, int>>> enumerate_trees(const std::vector<int>& vertices) {
  std::vector<std::vector<std::pair<int, int>>> out;
  int k = static_cast<int>(vertices.size());
  if (k == 0) return out;
  PrueferTrees trees(k);
  do {
    std::vector<std::pair<int, int>> e;
    for (auto [a, b] : trees.edges())
      e.emplace_back(vertices[static_cast<std::size_t>(a)], vertices[static_cast<std::size_t>(b)]);
    out.push_back(std::move(e));
  } while (trees.advance());
  return out;
}

/// Rerootings of `t` whose new root holds every attribute of `key`, found by
/// walking away from the current root through such nodes. The input rooting
/// itself is not included.
inline std::vector<JoinTree> rerootings(const JoinTree& t, int prev_parent, const AttrSet& key) {
  std::vector<JoinTree> out;
  int r = t.root();
  for (int c : t.node(r).children) {
    if (c == prev_parent || !key.subset_of(t.node(c).chi)) continue;
    JoinTree moved = t.reroot(c);
    auto deeper = rerootings(moved, r, key);
    out.push_back(std::move(moved));
    for (auto& d : deeper) out.push_back(std::move(d));
  }
  return out;
}

/// Operation counter used to measure enumeration delay.
struct Counters {
  std::uint64_t ops = 0;
};

namespace detail {

/// Streams the partial join trees of one meta node. A partial tree is a set of
/// edges over the relations below the node, plus (for a minor node whose kappa
/// equals its bag) the endpoints that still have to be joined to a node
/// outside, called ports.
///
/// Every choice made by the algorithm becomes one digit of a mixed-radix
/// counter: the skeleton tree over the origin children, each child's own
/// partial tree, the endpoints realising each skeleton edge, and where each
/// remaining child hangs. Digits further right change faster; moving a digit
/// resets all digits to its right.
class NodeCursor {
 public:
  NodeCursor(const Hypergraph& h, const MetaDecomposition& m, int v, Counters* counters)
      : counters_(counters) {
    const MetaNode& node = m.node(v);
    physical_ = !node.minor();
    if (physical_) self_ = *node.relation;
    clique_ = node.minor() && node.kappa == node.chi;

    auto origins = m.origin_children(v);
    auto proper = m.proper_children(v);
    // Larger kappa first, so that a child can only hang below siblings
    // placed before it.
    std::stable_sort(proper.begin(), proper.end(), [&](int a, int b) {
      auto sa = m.node(a).kappa.size(), sb = m.node(b).kappa.size();
      return sa != sb ? sa > sb : a < b;
    });

    RelSet placed;
    if (physical_) placed.insert(self_);
    for (int c : origins) {
      Child ch = make_child(h, m, c, counters);
      placed |= m.unit(c);
      origins_.push_back(std::move(ch));
    }
    for (int c : proper) {
      Child ch = make_child(h, m, c, counters);
      const AttrSet& k = m.node(c).kappa;
      placed.for_each([&](RelId r) {
        if (k.subset_of(h.attrs(r))) ch.pool.push_back(r);
      });
      if (ch.pool.empty()) fail(ErrorKind::kInternal, "child has no attachment point");
      placed |= m.unit(c);
      proper_.push_back(std::move(ch));
    }
    skeleton_size_ = static_cast<int>(origins_.size()) + (clique_ ? 1 : 0);
    if (!physical_ && skeleton_size_ > 0) skeleton_ = std::make_unique<PrueferTrees>(skeleton_size_);
    reset();
  }

  bool clique() const { return clique_; }

  void reset() {
    tick();
    if (skeleton_) skeleton_->reset();
    for (auto& o : origins_) o.cursor->reset();
    reset_endpoints();
    for (std::size_t i = 0; i < proper_.size(); ++i) reset_proper(i, true);
  }

  /// Moves to the next partial tree; on exhaustion returns false and leaves
  /// the cursor reset to the first one.
  bool advance() {
    tick();
    for (std::size_t i = proper_.size(); i-- > 0;) {
      Child& c = proper_[i];
      if (bump(c.digits, c.radix)) {
        return true;
      }
      if (c.cursor->advance()) {
        reset_proper(i, false);
        for (std::size_t j = i + 1; j < proper_.size(); ++j) reset_proper(j, true);
        return true;
      }
      reset_proper(i, false);
    }
    if (bump(endpoint_digits_, endpoint_radix_)) {
      for (std::size_t j = 0; j < proper_.size(); ++j) reset_proper(j, true);
      return true;
    }
    for (std::size_t i = origins_.size(); i-- > 0;) {
      if (origins_[i].cursor->advance()) {
        reset_endpoints();
        for (std::size_t j = 0; j < proper_.size(); ++j) reset_proper(j, true);
        return true;
      }
    }
    if (skeleton_ && skeleton_->advance()) {
      tick(static_cast<std::uint64_t>(skeleton_size_));
      reset_endpoints();
      for (std::size_t j = 0; j < proper_.size(); ++j) reset_proper(j, true);
      return true;
    }
    reset();
    return false;
  }

  /// Appends the current partial tree's edges and ports.
  void collect(std::vector<std::pair<int, int>>& edges, std::vector<int>& ports) const {
    for (const auto& o : origins_) {
      std::vector<int> none;
      o.cursor->collect(edges, none);
    }
    if (skeleton_) {
      std::size_t d = 0;
      for (auto [a, b] : skeleton_->edges()) {
        int placeholder = static_cast<int>(origins_.size());
        if (a == placeholder || b == placeholder) {
          int o = a == placeholder ? b : a;
          ports.push_back(origins_[static_cast<std::size_t>(o)].own[static_cast<std::size_t>(endpoint_digits_[d++])]);
        } else {
          int x = origins_[static_cast<std::size_t>(a)].own[static_cast<std::size_t>(endpoint_digits_[d++])];
          int y = origins_[static_cast<std::size_t>(b)].own[static_cast<std::size_t>(endpoint_digits_[d++])];
          edges.emplace_back(x, y);
        }
      }
    }
    for (const auto& c : proper_) {
      std::vector<int> child_ports;
      c.cursor->collect(edges, child_ports);
      if (c.cursor->clique()) {
        for (std::size_t i = 0; i < child_ports.size(); ++i)
          edges.emplace_back(c.pool[static_cast<std::size_t>(c.digits[i])], child_ports[i]);
      } else {
        edges.emplace_back(c.pool[static_cast<std::size_t>(c.digits[1])], c.own[static_cast<std::size_t>(c.digits[0])]);
      }
    }
    if (counters_) counters_->ops += edges.size();
  }

  std::size_t ports() const {
    if (!clique_ || !skeleton_) return 0;
    std::size_t n = 0;
    int placeholder = static_cast<int>(origins_.size());
    for (auto [a, b] : skeleton_->edges())
      if (a == placeholder || b == placeholder) ++n;
    return n;
  }

 private:
  struct Child {
    std::unique_ptr<NodeCursor> cursor;
    std::vector<RelId> own;   // relations below the child that hold its kappa
    std::vector<RelId> pool;  // attachment points placed before the child
    std::vector<int> digits;
    std::vector<int> radix;
  };

  static Child make_child(const Hypergraph& h, const MetaDecomposition& m, int c, Counters* counters) {
    Child ch;
    ch.cursor = std::make_unique<NodeCursor>(h, m, c, counters);
    const AttrSet& k = m.node(c).kappa;
    m.unit(c).for_each([&](RelId r) {
      if (k.subset_of(h.attrs(r))) ch.own.push_back(r);
    });
    if (ch.own.empty()) fail(ErrorKind::kInternal, "no relation below a meta node holds its kappa");
    return ch;
  }

  void tick(std::uint64_t n = 1) {
    if (counters_) counters_->ops += n;
  }

  /// Increments a mixed-radix counter; returns false and zeroes it on overflow.
  bool bump(std::vector<int>& digits, const std::vector<int>& radix) {
    for (std::size_t i = digits.size(); i-- > 0;) {
      tick();
      if (++digits[i] < radix[i]) return true;
      digits[i] = 0;
    }
    return false;
  }

  void reset_endpoints() {
    endpoint_digits_.clear();
    endpoint_radix_.clear();
    if (!skeleton_) return;
    int placeholder = static_cast<int>(origins_.size());
    for (auto [a, b] : skeleton_->edges()) {
      for (int side : {a, b}) {
        if (side == placeholder) continue;
        endpoint_radix_.push_back(static_cast<int>(origins_[static_cast<std::size_t>(side)].own.size()));
        endpoint_digits_.push_back(0);
      }
    }
    tick(endpoint_digits_.size());
  }

  /// Zeroes the placement digits of proper child i, optionally also resetting
  /// its cursor. The number of digits depends on the child's current ports.
  void reset_proper(std::size_t i, bool with_cursor) {
    Child& c = proper_[i];
    if (with_cursor) c.cursor->reset();
    c.digits.clear();
    c.radix.clear();
    if (c.cursor->clique()) {
      for (std::size_t p = 0; p < c.cursor->ports(); ++p) {
        c.digits.push_back(0);
        c.radix.push_back(static_cast<int>(c.pool.size()));
      }
    } else {
      c.digits = {0, 0};
      c.radix = {static_cast<int>(c.own.size()), static_cast<int>(c.pool.size())};
    }
    tick(c.digits.size());
  }

  Counters* counters_;
  bool physical_ = false;
  bool clique_ = false;
  RelId self_ = -1;
  std::vector<Child> origins_;
  std::vector<Child> proper_;
  int skeleton_size_ = 0;
  std::unique_ptr<PrueferTrees> skeleton_;
  std::vector<int> endpoint_digits_;
  std::vector<int> endpoint_radix_;
};

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap;
  return std::min(a * b, cap);
}

inline std::uint64_t sat_pow(std::uint64_t a, int e, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r = sat_mul(r, a, cap);
  return r;
}

/// Number of partial trees of node v; `pool` is the number of attachment
/// points offered by the parent when v is a minor node with kappa == bag.
inline std::uint64_t count_partial(const Hypergraph& h, const MetaDecomposition& m, int v, std::uint64_t pool,
                                   std::uint64_t cap) {
  const MetaNode& node = m.node(v);
  auto holders = [&](int c) {
    std::uint64_t n = 0;
    m.unit(c).for_each([&](RelId r) {
      if (m.node(c).kappa.subset_of(h.attrs(r))) ++n;
    });
    return n;
  };
  std::uint64_t total = 1;
  auto origins = m.origin_children(v);
  if (node.minor()) {
    std::uint64_t weight_product = 1, weight_sum = 0;
    for (int c : origins) {
      std::uint64_t w = holders(c);
      total = sat_mul(total, count_partial(h, m, c, 0, cap), cap);
      weight_product = sat_mul(weight_product, w, cap);
      weight_sum += w;
    }
    int k = static_cast<int>(origins.size());
    if (node.kappa == node.chi) {
      // Weighted Cayley formula with the outside world as one extra vertex.
      total = sat_mul(total, sat_mul(sat_mul(weight_product, pool, cap), sat_pow(weight_sum + pool, k - 1, cap), cap), cap);
    } else if (k >= 2) {
      total = sat_mul(total, sat_mul(weight_product, sat_pow(weight_sum, k - 2, cap), cap), cap);
    }
  }
  auto proper = m.proper_children(v);
  std::stable_sort(proper.begin(), proper.end(), [&](int a, int b) {
    auto sa = m.node(a).kappa.size(), sb = m.node(b).kappa.size();
    return sa != sb ? sa > sb : a < b;
  });
  RelSet placed;
  if (node.relation) placed.insert(*node.relation);
  for (int c : origins) placed |= m.unit(c);
  for (int c : proper) {
    std::uint64_t p = 0;
    placed.for_each([&](RelId r) {
      if (m.node(c).kappa.subset_of(h.attrs(r))) ++p;
    });
    if (m.node(c).minor() && m.node(c).kappa == m.node(c).chi)
      total = sat_mul(total, count_partial(h, m, c, p, cap), cap);
    else
      total = sat_mul(total, sat_mul(count_partial(h, m, c, 0, cap), sat_mul(holders(c), p, cap), cap), cap);
    placed |= m.unit(c);
  }
  return total;
}

}  // namespace detail

/// Streams every rooted join tree encoded by a meta-decomposition exactly once.
///
/// Trees are produced lazily; the work between two consecutive trees is
/// linear in the number of relations, which `counters` can be used to measure.
class JoinTreeEnumerator {
 public:
  JoinTreeEnumerator(const Hypergraph& h, const MetaDecomposition& m, Counters* counters = nullptr)
      : h_(&h), counters_(counters), root_cursor_(h, m, m.root(), counters) {}

  /// Writes the next tree into `out`; returns false once all were produced.
  bool next(JoinTree& out) {
    if (done_) return false;
    if (started_) {
      if (counters_) ++counters_->ops;
      if (++root_ >= h_->num_relations()) {
        root_ = 0;
        if (!root_cursor_.advance()) {
          done_ = true;
          return false;
        }
      }
    }
    started_ = true;
    edges_.clear();
    ports_.clear();
    root_cursor_.collect(edges_, ports_);
    out = JoinTree::from_edges(*h_, edges_, root_);
    if (counters_) counters_->ops += static_cast<std::uint64_t>(h_->num_relations());
    return true;
  }

 private:
  const Hypergraph* h_;
  Counters* counters_;
  detail::NodeCursor root_cursor_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> ports_;
  int root_ = 0;
  bool started_ = false;
  bool done_ = false;
};

/// Collects every join tree; intended for small inputs.
inline std::vector<JoinTree> enumerate_join_trees(const Hypergraph& h, const MetaDecomposition& m,
                                                  std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  std::vector<JoinTree> out;
  JoinTreeEnumerator e(h, m);
  JoinTree t;
  while (out.size() < limit && e.next(t)) out.push_back(t);
  return out;
}

/// Number of rooted join trees, computed in closed form from the
/// meta-decomposition. Returns nullopt when the count exceeds `limit`.
inline std::optional<std::uint64_t> count_join_trees(const Hypergraph& h, const MetaDecomposition& m,
                                                     std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - 1) {
  std::uint64_t cap = limit + 1;
  std::uint64_t c = detail::sat_mul(detail::count_partial(h, m, m.root(), 0, cap),
                                    static_cast<std::uint64_t>(h.num_relations()), cap);
  if (c > limit) return std::nullopt;
  return c;
}

}  // namespace metadecomp
