#include "slateglm/slate.hpp"

#include <limits>
#include <string>

namespace slateglm {

Slate::Slate(const SlotItemSets& itemsets, std::vector<std::size_t> indices)
    : indices_(std::move(indices)) {
  if (indices_.size() != itemsets.size()) throw std::invalid_argument("Slate: one index per slot required");
  slot_dim_ = itemsets.empty() || itemsets[0].empty() ? 0 : itemsets[0][0].size();
  flat_.reserve(indices_.size() * slot_dim_);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= itemsets[i].size()) throw std::out_of_range("Slate: item index out of range");
    const Vector& item = itemsets[i][indices_[i]];
    if (item.size() != slot_dim_) throw linalg::DimensionError("Slate: item dimension mismatch");
    flat_.insert(flat_.end(), item.begin(), item.end());
  }
}

Vector Slate::lifted(std::size_t i) const {
  Vector out(flat_.size(), 0.0);
  for (std::size_t k = 0; k < slot_dim_; ++k) out[i * slot_dim_ + k] = flat_[i * slot_dim_ + k];
  return out;
}

std::size_t check_itemsets(const SlotItemSets& itemsets) {
  if (itemsets.empty()) throw std::invalid_argument("itemsets: no slots");
  std::size_t d = 0;
  for (std::size_t i = 0; i < itemsets.size(); ++i) {
    if (itemsets[i].empty()) throw std::invalid_argument("itemsets: slot " + std::to_string(i) + " is empty");
    for (const auto& item : itemsets[i]) {
      if (d == 0) d = item.size();
      if (item.size() != d || d == 0) throw linalg::DimensionError("itemsets: inconsistent item dimension");
    }
  }
  return d;
}

std::size_t slate_count(const SlotItemSets& itemsets) {
  std::size_t count = 1;
  for (const auto& set : itemsets) {
    if (set.empty()) return 0;
    if (count > std::numeric_limits<std::size_t>::max() / set.size()) return std::numeric_limits<std::size_t>::max();
    count *= set.size();
  }
  return count;
}

std::vector<Slate> enumerate_slates(const SlotItemSets& itemsets, std::size_t cap) {
  check_itemsets(itemsets);
  const std::size_t count = slate_count(itemsets);
  if (count > cap) {
    throw EnumerationCapExceeded("enumerate_slates: " + std::to_string(count) +
                                 " slates exceed the enumeration cap of " + std::to_string(cap));
  }
  std::vector<Slate> out;
  out.reserve(count);
  std::vector<std::size_t> idx(itemsets.size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    out.emplace_back(itemsets, idx);
    for (std::size_t i = itemsets.size(); i-- > 0;) {
      if (++idx[i] < itemsets[i].size()) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace slateglm
