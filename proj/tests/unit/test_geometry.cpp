#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "uhoi/error.hpp"
#include "uhoi/geometry.hpp"
#include "uhoi/rng.hpp"

using uhoi::BoundingBox;

namespace {

oracle::Box plain(const BoundingBox& b) { return {b.x_min(), b.y_min(), b.x_max(), b.y_max()}; }

BoundingBox random_int_box(uhoi::Xoshiro256& rng, int size) {
  const double x0 = static_cast<double>(rng.below(size - 1));
  const double y0 = static_cast<double>(rng.below(size - 1));
  const double x1 = x0 + 1 + static_cast<double>(rng.below(size - static_cast<int>(x0) - 1) );
  const double y1 = y0 + 1 + static_cast<double>(rng.below(size - static_cast<int>(y0) - 1));
  return {x0, y0, x1, y1};
}

}  // namespace

TEST(Iou, IdenticalBoxesGiveOne) {
  const BoundingBox a(0, 0, 10, 10);
  EXPECT_EQ(uhoi::iou(a, a), 1.0);
}

TEST(Iou, DisjointBoxesGiveZero) {
  EXPECT_EQ(uhoi::iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
}

TEST(Iou, EdgeContactGivesZero) {
  EXPECT_EQ(uhoi::iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
}

TEST(Iou, HalfOverlapIsOneThirdByCellCount) {
  const BoundingBox a(0, 0, 10, 10);
  const BoundingBox b(5, 0, 15, 10);
  EXPECT_NEAR(oracle::cell_count_iou(plain(a), plain(b)), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(uhoi::iou(a, b), 1.0 / 3.0, 1e-12);
}

TEST(Iou, MatchesCellCountingOnRandomIntegerBoxes) {
  uhoi::Xoshiro256 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_int_box(rng, 30);
    const auto b = random_int_box(rng, 30);
    EXPECT_NEAR(uhoi::iou(a, b), oracle::cell_count_iou(plain(a), plain(b)), 1e-12)
        << a.to_string() << " " << b.to_string();
  }
}

TEST(Iou, SymmetricAndBounded) {
  uhoi::Xoshiro256 rng(5);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a(rng.uniform() * 50, rng.uniform() * 50, 50 + rng.uniform() * 50,
                        50 + rng.uniform() * 50);
    const BoundingBox b(rng.uniform() * 80, rng.uniform() * 80, 80 + rng.uniform() * 20,
                        80 + rng.uniform() * 20);
    const double ab = uhoi::iou(a, b);
    EXPECT_EQ(ab, uhoi::iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(ab, oracle::iou(plain(a), plain(b)), 1e-12);
  }
}

TEST(BoundingBoxInvariants, RejectsZeroArea) {
  EXPECT_THROW(BoundingBox(5, 5, 5, 10), uhoi::ValidationError);
  EXPECT_THROW(BoundingBox(5, 5, 10, 5), uhoi::ValidationError);
}

TEST(BoundingBoxInvariants, RejectsInvertedAndNegativeAndNonFinite) {
  EXPECT_THROW(BoundingBox(10, 0, 5, 10), uhoi::ValidationError);
  EXPECT_THROW(BoundingBox(-1, 0, 5, 10), uhoi::ValidationError);
  EXPECT_THROW(BoundingBox(0, 0, std::numeric_limits<double>::infinity(), 10),
               uhoi::ValidationError);
  EXPECT_THROW(BoundingBox(0, 0, std::nan(""), 10), uhoi::ValidationError);
}

TEST(UnionBox, Examples) {
  EXPECT_EQ(uhoi::union_box({0, 0, 10, 10}, {5, 5, 20, 15}).box, BoundingBox(0, 0, 20, 15));
  const BoundingBox inner(2, 2, 4, 4);
  const BoundingBox outer(0, 0, 10, 10);
  EXPECT_EQ(uhoi::union_box(inner, outer).box, outer);
}

TEST(UnionBox, CommutativeAssociativeIdempotent) {
  uhoi::Xoshiro256 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_int_box(rng, 40);
    const auto b = random_int_box(rng, 40);
    const auto c = random_int_box(rng, 40);
    EXPECT_EQ(uhoi::union_box(a, b).box, uhoi::union_box(b, a).box);
    EXPECT_EQ(uhoi::union_box(uhoi::union_box(a, b).box, c).box,
              uhoi::union_box(a, uhoi::union_box(b, c).box).box);
    EXPECT_EQ(uhoi::union_box(a, a).box, a);
  }
}

TEST(SpatialMatch, BothGatesAtExactlyHalfPass) {
  // IoU of [0,0,10,10] and [0,0,10,5] is 50 / 100.
  const uhoi::BoxPair gt{{0, 0, 10, 10}, {20, 20, 30, 30}};
  const uhoi::BoxPair pred{{0, 0, 10, 5}, {20, 20, 30, 25}};
  EXPECT_EQ(uhoi::iou(pred.human, gt.human), 0.5);
  EXPECT_TRUE(uhoi::spatial_match(pred, gt, 0.5));
}

TEST(SpatialMatch, IdenticalHumanButObjectBelowGateFails) {
  const uhoi::BoxPair gt{{0, 0, 10, 10}, {20, 20, 30, 30}};
  const uhoi::BoxPair pred{{0, 0, 10, 10}, {20, 20, 30, 24}};
  EXPECT_LT(uhoi::iou(pred.object, gt.object), 0.5);
  EXPECT_FALSE(uhoi::spatial_match(pred, gt));
}

TEST(SpatialMatch, FlippingEitherGateFlipsTheResult) {
  const uhoi::BoxPair gt{{0, 0, 10, 10}, {20, 20, 30, 30}};
  const uhoi::BoxPair good{{1, 0, 11, 10}, {21, 20, 31, 30}};
  ASSERT_TRUE(uhoi::spatial_match(good, gt));
  const uhoi::BoxPair bad_human{{6, 0, 16, 10}, good.object};
  const uhoi::BoxPair bad_object{good.human, {26, 20, 36, 30}};
  EXPECT_FALSE(uhoi::spatial_match(bad_human, gt));
  EXPECT_FALSE(uhoi::spatial_match(bad_object, gt));
}

TEST(PairOverlap, IsMinimumOfTheTwoIous) {
  const uhoi::BoxPair gt{{0, 0, 10, 10}, {20, 20, 30, 30}};
  const uhoi::BoxPair pred{{0, 0, 10, 5}, {20, 20, 30, 30}};
  EXPECT_EQ(uhoi::pair_overlap(pred, gt), 0.5);
}
