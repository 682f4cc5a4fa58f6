#include "capdetail/masks.h"

#include <gtest/gtest.h>

#include "capdetail/errors.h"
#include "capdetail/random.h"
#include "support/fixtures.h"

namespace capdetail {
namespace {

using ::capdetail::testing::BitmapOrArea;
using ::capdetail::testing::RandomBitmap;

RleMask Mask2x2(std::vector<std::uint32_t> counts) {
  return RleMask{2, 2, std::move(counts)};
}

// Column-major pixel indices 0..3 of a 2x2 grid.
RleMask Pixels2x2(std::initializer_list<int> pixels) {
  Bitmap b{2, 2, std::vector<std::uint8_t>(4)};
  for (int p : pixels) b.bits[p] = 1;
  return RleEncode(b);
}

TEST(RleDecodeTest, FullEmptyAndMixed) {
  EXPECT_EQ(RleDecode(Mask2x2({0, 4})).bits,
            (std::vector<std::uint8_t>{1, 1, 1, 1}));
  EXPECT_EQ(RleDecode(Mask2x2({4})).bits,
            (std::vector<std::uint8_t>{0, 0, 0, 0}));
  EXPECT_EQ(RleDecode(Mask2x2({1, 2, 1})).bits,
            (std::vector<std::uint8_t>{0, 1, 1, 0}));
}

TEST(RleDecodeTest, ColumnMajorLayout) {
  // 2 rows x 3 cols; the middle column is set.
  const Bitmap b = RleDecode(RleMask{2, 3, {2, 2, 2}});
  EXPECT_FALSE(b.at(0, 0));
  EXPECT_TRUE(b.at(0, 1));
  EXPECT_TRUE(b.at(1, 1));
  EXPECT_FALSE(b.at(1, 2));
}

TEST(RleDecodeTest, InvalidRuns) {
  for (const RleMask& bad :
       {Mask2x2({0, 3}), Mask2x2({1, 0, 3}), Mask2x2({5}), Mask2x2({})}) {
    EXPECT_THROW(RleDecode(bad), Error);
    try {
      MaskArea(bad);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidRle);
    }
  }
}

TEST(RleEncodeTest, FullAndEmpty) {
  EXPECT_EQ(RleEncode(Bitmap{2, 2, {1, 1, 1, 1}}).counts,
            (std::vector<std::uint32_t>{0, 4}));
  EXPECT_EQ(RleEncode(Bitmap{2, 2, {0, 0, 0, 0}}).counts,
            (std::vector<std::uint32_t>{4}));
}

TEST(RleEncodeTest, RandomRoundTrip) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Bitmap b = RandomBitmap(rng, 8, 8);
    const RleMask m = RleEncode(b);
    EXPECT_NO_THROW(ValidateRle(m));
    EXPECT_EQ(RleDecode(m), b);
  }
}

TEST(MaskAreaTest, Examples) {
  EXPECT_EQ(MaskArea(Mask2x2({0, 4})), 4u);
  EXPECT_EQ(MaskArea(Mask2x2({4})), 0u);
  EXPECT_EQ(MaskArea(Mask2x2({1, 2, 1})), 2u);
}

TEST(UnionAreaTest, Examples) {
  const RleMask m = Mask2x2({1, 2, 1});
  EXPECT_EQ(UnionArea(std::vector<RleMask>{m}), MaskArea(m));
  EXPECT_EQ(UnionArea(std::vector<RleMask>{Pixels2x2({0}), Pixels2x2({3})}),
            2u);
  EXPECT_EQ(
      UnionArea(std::vector<RleMask>{Pixels2x2({0, 1}), Pixels2x2({1, 2})}),
      3u);
}

TEST(UnionAreaTest, Errors) {
  try {
    UnionArea(std::vector<RleMask>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  try {
    UnionArea(std::vector<RleMask>{Mask2x2({4}), RleMask{1, 4, {4}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(UnionAreaPropertyTest, MatchesBitmapOrAndBounds) {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const auto h = static_cast<std::uint32_t>(1 + rng.UniformBelow(32));
    const auto w = static_cast<std::uint32_t>(1 + rng.UniformBelow(32));
    std::vector<RleMask> masks;
    std::uint64_t previous = 0;
    std::uint64_t area_sum = 0;
    const auto n = 1 + rng.UniformBelow(6);
    for (std::size_t i = 0; i < n; ++i) {
      masks.push_back(RleEncode(RandomBitmap(rng, h, w)));
      area_sum += MaskArea(masks.back());
      EXPECT_LE(MaskArea(masks.back()), std::uint64_t{h} * w);
      const std::uint64_t area = UnionArea(masks);
      EXPECT_EQ(area, BitmapOrArea(masks));
      EXPECT_GE(area, previous);
      previous = area;
    }
    EXPECT_LE(previous, area_sum);
  }
}

TEST(UnionAreaPropertyTest, SumEqualsUnionIffDisjoint) {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const RleMask a = RleEncode(RandomBitmap(rng, 6, 5));
    const RleMask b = RleEncode(RandomBitmap(rng, 6, 5));
    const Bitmap da = RleDecode(a);
    const Bitmap db = RleDecode(b);
    bool disjoint = true;
    for (std::size_t i = 0; i < da.bits.size(); ++i) {
      disjoint &= !(da.bits[i] && db.bits[i]);
    }
    EXPECT_EQ(UnionArea(std::vector<RleMask>{a, b}) ==
                  MaskArea(a) + MaskArea(b),
              disjoint);
  }
}

TEST(MaskDocumentTest, ParsesAndSerializes) {
  const std::string doc =
      R"({"o1":{"height":2,"width":2,"counts":[1,2,1]},"o2":{"height":2,"width":2,"counts":[4]}})";
  const MaskDocument masks = ParseMaskDocument(doc);
  ASSERT_EQ(masks.size(), 2u);
  EXPECT_EQ(masks.at("o1").counts, (std::vector<std::uint32_t>{1, 2, 1}));
  EXPECT_EQ(SerializeMaskDocument(masks), doc);
}

TEST(MaskDocumentTest, RejectsBadMasks) {
  for (const char* doc :
       {R"({"o1":{"height":2,"width":2,"counts":[1,2]}})",
        R"({"o1":{"height":-2,"width":2,"counts":[4]}})",
        R"({"o1":{"height":2,"width":2}})",
        R"({"o1":{"height":2,"width":2,"counts":[1,-1,4]}})"}) {
    EXPECT_THROW(ParseMaskDocument(doc), Error) << doc;
  }
  EXPECT_THROW(ParseMaskDocument("[]"), Error);
}

}  // namespace
}  // namespace capdetail
