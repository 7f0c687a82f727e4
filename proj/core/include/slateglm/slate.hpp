#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "slateglm/linalg.hpp"

namespace slateglm {

using linalg::Vector;

/// Candidate items of one slot; each item is a d-vector.
using ItemSet = std::vector<Vector>;
/// One ItemSet per slot.
using SlotItemSets = std::vector<ItemSet>;

/// N chosen items stored as their concatenation. Slot i occupies
/// flat[i*d, (i+1)*d), so the slate equals the sum of its lifted items.
class Slate {
 public:
  Slate() = default;
  /// Builds the slate picking item indices[i] from itemsets[i].
  Slate(const SlotItemSets& itemsets, std::vector<std::size_t> indices);

  std::size_t slots() const { return indices_.size(); }
  std::size_t slot_dim() const { return slot_dim_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const Vector& flat() const { return flat_; }
  std::span<const double> slot(std::size_t i) const { return {flat_.data() + i * slot_dim_, slot_dim_}; }
  /// Slot i's item embedded in R^{N d}, zeros elsewhere.
  Vector lifted(std::size_t i) const;

 private:
  std::vector<std::size_t> indices_;
  std::size_t slot_dim_ = 0;
  Vector flat_;
};

class EnumerationCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Validates shape: N >= 1 non-empty sets of equal-dimension items. Returns d.
std::size_t check_itemsets(const SlotItemSets& itemsets);

/// Number of slates in the product set (saturates at SIZE_MAX).
std::size_t slate_count(const SlotItemSets& itemsets);

/// All slates in lexicographic order of item indices (last slot fastest).
/// Throws EnumerationCapExceeded when the product of set sizes exceeds cap.
std::vector<Slate> enumerate_slates(const SlotItemSets& itemsets, std::size_t cap);

}  // namespace slateglm
