#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

namespace metadecomp {

using AttrId = int;
using RelId = int;

/// Dynamic bitset over attribute ids.
///
/// Words are kept trimmed (no trailing zero word), so equality and ordering
/// can be defined on the word vector directly.
class AttrSet {
 public:
  AttrSet() = default;
  AttrSet(std::initializer_list<AttrId> ids) {
    for (AttrId a : ids) insert(a);
  }

  static AttrSet from_vector(const std::vector<AttrId>& ids) {
    AttrSet s;
    for (AttrId a : ids) s.insert(a);
    return s;
  }

  void insert(AttrId a) {
    auto w = static_cast<std::size_t>(a) / 64;
    if (w >= words_.size()) words_.resize(w + 1, 0);
    words_[w] |= bit(a);
  }

  void erase(AttrId a) {
    auto w = static_cast<std::size_t>(a) / 64;
    if (w < words_.size()) {
      words_[w] &= ~bit(a);
      trim();
    }
  }

  bool contains(AttrId a) const {
    auto w = static_cast<std::size_t>(a) / 64;
    return w < words_.size() && (words_[w] & bit(a)) != 0;
  }

  bool empty() const { return words_.empty(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool subset_of(const AttrSet& o) const {
    if (words_.size() > o.words_.size()) return false;
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((words_[i] & ~o.words_[i]) != 0) return false;
    return true;
  }

  bool intersects(const AttrSet& o) const {
    auto n = std::min(words_.size(), o.words_.size());
    for (std::size_t i = 0; i < n; ++i)
      if ((words_[i] & o.words_[i]) != 0) return true;
    return false;
  }

  AttrSet& operator|=(const AttrSet& o) {
    if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  AttrSet& operator&=(const AttrSet& o) {
    if (words_.size() > o.words_.size()) words_.resize(o.words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    trim();
    return *this;
  }

  AttrSet& operator-=(const AttrSet& o) {
    auto n = std::min(words_.size(), o.words_.size());
    for (std::size_t i = 0; i < n; ++i) words_[i] &= ~o.words_[i];
    trim();
    return *this;
  }

  friend AttrSet operator|(AttrSet a, const AttrSet& b) { return a |= b; }
  friend AttrSet operator&(AttrSet a, const AttrSet& b) { return a &= b; }
  friend AttrSet operator-(AttrSet a, const AttrSet& b) { return a -= b; }

  friend bool operator==(const AttrSet&, const AttrSet&) = default;

  /// Total order used for map keys: shorter word vectors first, then by the
  /// most significant differing word.
  friend std::strong_ordering operator<=>(const AttrSet& a, const AttrSet& b) {
    if (a.words_.size() != b.words_.size()) return a.words_.size() <=> b.words_.size();
    for (std::size_t i = a.words_.size(); i-- > 0;)
      if (a.words_[i] != b.words_[i]) return a.words_[i] <=> b.words_[i];
    return std::strong_ordering::equal;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      auto w = words_[i];
      while (w != 0) {
        int b = std::countr_zero(w);
        f(static_cast<AttrId>(i * 64 + static_cast<std::size_t>(b)));
        w &= w - 1;
      }
    }
  }

  std::vector<AttrId> to_vector() const {
    std::vector<AttrId> out;
    for_each([&](AttrId a) { out.push_back(a); });
    return out;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : words_) h = (h ^ std::hash<std::uint64_t>{}(w)) * 1099511628211ull;
    return h;
  }

 private:
  static std::uint64_t bit(AttrId a) { return std::uint64_t{1} << (static_cast<unsigned>(a) % 64); }
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
  }

  std::vector<std::uint64_t> words_;
};

/// Set of relation ids, limited to 64 relations per query.
class RelSet {
 public:
  static constexpr int kMaxRelations = 64;

  constexpr RelSet() = default;
  constexpr explicit RelSet(std::uint64_t bits) : bits_(bits) {}
  RelSet(std::initializer_list<RelId> ids) {
    for (RelId r : ids) insert(r);
  }

  static constexpr RelSet single(RelId r) { return RelSet(std::uint64_t{1} << r); }
  static constexpr RelSet first_n(int n) {
    return RelSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  void insert(RelId r) { bits_ |= std::uint64_t{1} << r; }
  void erase(RelId r) { bits_ &= ~(std::uint64_t{1} << r); }
  constexpr bool contains(RelId r) const { return ((bits_ >> r) & 1u) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  RelId min() const { return std::countr_zero(bits_); }
  constexpr bool subset_of(RelSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(RelSet o) const { return (bits_ & o.bits_) != 0; }

  constexpr RelSet operator|(RelSet o) const { return RelSet(bits_ | o.bits_); }
  constexpr RelSet operator&(RelSet o) const { return RelSet(bits_ & o.bits_); }
  constexpr RelSet operator-(RelSet o) const { return RelSet(bits_ & ~o.bits_); }
  RelSet& operator|=(RelSet o) { bits_ |= o.bits_; return *this; }
  RelSet& operator&=(RelSet o) { bits_ &= o.bits_; return *this; }
  RelSet& operator-=(RelSet o) { bits_ &= ~o.bits_; return *this; }
  friend constexpr auto operator<=>(RelSet, RelSet) = default;

  template <class F>
  void for_each(F&& f) const {
    auto w = bits_;
    while (w != 0) {
      f(static_cast<RelId>(std::countr_zero(w)));
      w &= w - 1;
    }
  }

  std::vector<RelId> to_vector() const {
    std::vector<RelId> out;
    for_each([&](RelId r) { out.push_back(r); });
    return out;
  }

 private:
  std::uint64_t bits_ = 0;
};

/// Calls f(sub) for every non-empty proper-or-full subset of `s`.
template <class F>
void for_each_subset(RelSet s, F&& f) {
  auto full = s.bits();
  for (auto sub = full; sub != 0; sub = (sub - 1) & full) f(RelSet(sub));
}

}  // namespace metadecomp

template <>
struct std::hash<metadecomp::AttrSet> {
  std::size_t operator()(const metadecomp::AttrSet& s) const noexcept { return s.hash(); }
};

template <>
struct std::hash<metadecomp::RelSet> {
  std::size_t operator()(metadecomp::RelSet s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits());
  }
};
