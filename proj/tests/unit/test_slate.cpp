#include <gtest/gtest.h>

#include "slateglm/slate.hpp"

using namespace slateglm;

namespace {

SlotItemSets small_sets() {
  return {{{1, 0}, {0, 1}, {1, 1}}, {{2, 0}, {0, 2}, {3, 3}}};
}

}  // namespace

TEST(Slate, FlatAndLift) {
  const auto sets = small_sets();
  const Slate s(sets, {2, 1});
  EXPECT_EQ(s.flat(), (Vector{1, 1, 0, 2}));
  Vector sum(4, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto l = s.lifted(i);
    for (std::size_t k = 0; k < 4; ++k) sum[k] += l[k];
  }
  EXPECT_EQ(sum, s.flat());
  EXPECT_EQ(s.slot(1)[1], 2.0);
}

TEST(Slate, BadIndexThrows) { EXPECT_THROW(Slate(small_sets(), {3, 0}), std::out_of_range); }

TEST(CheckItemsets, RejectsEmptyAndRagged) {
  EXPECT_THROW(check_itemsets({}), std::invalid_argument);
  EXPECT_THROW(check_itemsets({{}}), std::invalid_argument);
  EXPECT_THROW(check_itemsets({{{1, 0}}, {{1, 0, 0}}}), std::invalid_argument);
  EXPECT_EQ(check_itemsets(small_sets()), 2u);
}

TEST(Enumerate, SingleSlotIsTheItemset) {
  const SlotItemSets sets{{{1}, {2}, {3}}};
  const auto slates = enumerate_slates(sets, 100);
  ASSERT_EQ(slates.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(slates[k].flat(), sets[0][k]);
}

TEST(Enumerate, LexicographicOrder) {
  const auto slates = enumerate_slates(small_sets(), 100);
  ASSERT_EQ(slates.size(), 9u);
  std::size_t k = 0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(slates[k++].indices(), (std::vector<std::size_t>{a, b}));
}

TEST(Enumerate, CountIsProduct) {
  const SlotItemSets sets{{{1}, {2}}, {{1}, {2}, {3}}, {{1}, {2}, {3}, {4}}};
  EXPECT_EQ(slate_count(sets), 24u);
  EXPECT_EQ(enumerate_slates(sets, 24).size(), 24u);
}

TEST(Enumerate, CapErrorNamesCount) {
  const SlotItemSets sets{{{1}, {2}}, {{1}, {2}, {3}}, {{1}, {2}, {3}, {4}}};
  try {
    enumerate_slates(sets, 23);
    FAIL() << "expected EnumerationCapExceeded";
  } catch (const EnumerationCapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("24"), std::string::npos);
  }
}
