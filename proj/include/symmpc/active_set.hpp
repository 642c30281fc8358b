#ifndef SYMMPC_ACTIVE_SET_HPP_
#define SYMMPC_ACTIVE_SET_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "types.hpp"

namespace symmpc {

/**
 * A set of constraint indices, stored strictly increasing. Indices are
 * 1-based constraint numbers as in the constraint order of the condensed QP:
 * row i of G and E belongs to constraint i + 1.
 */
class ActiveSet {
 public:
  ActiveSet() = default;

  ActiveSet(std::initializer_list<int> indices) : ActiveSet(std::vector<int>(indices)) {}

  explicit ActiveSet(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
      throw Error(ErrorCode::DimensionMismatch, "active set has repeated indices");
    if (!idx_.empty() && idx_.front() < 1)
      throw Error(ErrorCode::DimensionMismatch, "active set indices start at 1");
  }

  const std::vector<int>& indices() const { return idx_; }
  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  int max() const { return idx_.empty() ? 0 : idx_.back(); }
  int min() const { return idx_.empty() ? 0 : idx_.front(); }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }

  bool contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

  bool is_subset_of(const ActiveSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
  }

  /// True iff the set lies in {1, ..., bound}.
  bool within(int bound) const { return idx_.empty() || idx_.back() <= bound; }

  /// Child in the enumeration tree; requires j > max().
  ActiveSet with_appended(int j) const {
    ActiveSet out;
    out.idx_.reserve(idx_.size() + 1);
    out.idx_ = idx_;
    out.idx_.push_back(j);
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < idx_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(idx_[k]);
    }
    return s + "}";
  }

  friend auto operator<=>(const ActiveSet&, const ActiveSet&) = default;
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

  /// Builds from indices already strictly increasing.
  static ActiveSet from_sorted(std::vector<int> sorted) {
    ActiveSet a;
    a.idx_ = std::move(sorted);
    return a;
  }

 private:
  std::vector<int> idx_;
};

/// Enumeration order: increasing cardinality, lexicographic within a cardinality.
struct TraversalLess {
  bool operator()(const ActiveSet& a, const ActiveSet& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

struct ActiveSetHash {
  std::size_t operator()(const ActiveSet& a) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int i : a) {
      h ^= static_cast<std::size_t>(i) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/**
 * Membership in the enumeration subtree rooted at root: a = root u extra
 * with every element of extra above max(root). Equivalently root is a
 * prefix of a.
 */
inline bool subtree_contains(const ActiveSet& root, const ActiveSet& a) {
  if (root.size() > a.size()) return false;
  return std::equal(root.begin(), root.end(), a.begin());
}

/// Adds offset to every index; throws IndexOverflow if the result exceeds limit.
inline ActiveSet shift(const ActiveSet& a, int offset, int limit = -1) {
  std::vector<int> out(a.begin(), a.end());
  for (int& i : out) i += offset;
  if (limit >= 0 && !out.empty() && out.back() > limit)
    throw Error(ErrorCode::IndexOverflow, "shifted index " + std::to_string(out.back()) +
                                              " exceeds " + std::to_string(limit));
  return ActiveSet::from_sorted(std::move(out));
}

/// Union of a head set and a tail set whose indices all exceed the head's.
inline ActiveSet concat(const ActiveSet& head, const ActiveSet& tail) {
  std::vector<int> out;
  out.reserve(head.size() + tail.size());
  out.insert(out.end(), head.begin(), head.end());
  out.insert(out.end(), tail.begin(), tail.end());
  if (!head.empty() && !tail.empty() && tail.min() <= head.max()) return ActiveSet(std::move(out));
  return ActiveSet::from_sorted(std::move(out));
}

/// All subsets of {first, ..., last} in traversal order.
inline std::vector<ActiveSet> power_set(int first, int last) {
  std::vector<ActiveSet> level{ActiveSet{}};
  std::vector<ActiveSet> all{ActiveSet{}};
  while (!level.empty()) {
    std::vector<ActiveSet> next;
    for (const auto& a : level) {
      for (int j = std::max(a.max() + 1, first); j <= last; ++j) next.push_back(a.with_appended(j));
    }
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return all;
}

}  // namespace symmpc

template <>
struct std::hash<symmpc::ActiveSet> : symmpc::ActiveSetHash {};

#endif  // SYMMPC_ACTIVE_SET_HPP_
