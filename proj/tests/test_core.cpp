#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "brace/core.hpp"

using namespace brace;

TEST(ChunkPlan, ThreeByThree) {
  const ChunkPlan p(3, 3);
  EXPECT_EQ(std::vector<std::size_t>(p.boundaries().begin(), p.boundaries().end()),
            (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(ChunkPlan, SingleClient) {
  const ChunkPlan p(7, 1);
  EXPECT_EQ(p.clients(), 1u);
  EXPECT_EQ(p.begin(0), 0u);
  EXPECT_EQ(p.end(0), 7u);
}

TEST(ChunkPlan, TenOverFour) {
  const auto p = chunk_plan(10, 4);
  EXPECT_EQ(std::vector<std::size_t>(p.boundaries().begin(), p.boundaries().end()),
            (std::vector<std::size_t>{0, 3, 6, 8, 10}));
}

TEST(ChunkPlan, Rejects) {
  EXPECT_THROW(ChunkPlan(0, 1), ConfigError);
  EXPECT_THROW(ChunkPlan(3, 0), ConfigError);
  try {
    ChunkPlan(2, 3);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("more clients than dimensions"), std::string::npos);
  }
}

TEST(ChunkPlan, SizesCoverAndBalance) {
  for (std::size_t d = 1; d <= 40; ++d) {
    for (std::size_t n = 1; n <= d; ++n) {
      const ChunkPlan p(d, n);
      std::size_t total = 0, lo = d, hi = 0;
      for (std::size_t c = 0; c < n; ++c) {
        total += p.size(c);
        lo = std::min(lo, p.size(c));
        hi = std::max(hi, p.size(c));
        if (c + 1 < n) EXPECT_EQ(p.end(c), p.begin(c + 1));
      }
      EXPECT_EQ(total, d);
      EXPECT_LE(hi - lo, 1u);
      EXPECT_EQ(p.size(0), (d + n - 1) / n);
      EXPECT_EQ(p, ChunkPlan(d, n));
    }
  }
}

TEST(SignQuantize, Examples) {
  EXPECT_EQ(sign_quantize(GradVec{5, 2, -10}), (SignVec{1, 1, -1}));
  EXPECT_EQ(sign_quantize(GradVec{-0.001, 3.7, 0.0}), (SignVec{-1, 1, kSignOfZero}));
  EXPECT_EQ(sign_quantize(GradVec{0, 0}), (SignVec{kSignOfZero, kSignOfZero}));
}

#ifndef BRACE_SIGN_OF_ZERO_NEGATIVE
TEST(SignQuantize, ZeroIsPositive) { EXPECT_EQ(sign_quantize(GradVec{0.0, -0.0}), (SignVec{1, 1})); }
#endif

TEST(SignQuantize, RejectsNonFinite) {
  EXPECT_THROW(sign_quantize(GradVec{1.0, std::numeric_limits<double>::quiet_NaN()}), DimensionError);
  EXPECT_THROW(sign_quantize(GradVec{std::numeric_limits<double>::infinity()}), DimensionError);
}

TEST(ConsensusMap, Examples) {
  EXPECT_EQ(consensus_map(SumVec{3, 1, 1}, 2), (SignVec{1, -1, -1}));
  EXPECT_EQ(consensus_map(SumVec{6, 6, 6}, 5), (SignVec{1, 1, 1}));
  EXPECT_EQ(consensus_map(SumVec{2, 3}, 2), (SignVec{-1, 1}));
}

TEST(SumSigns, FigureInputs) {
  const std::vector<GradVec> g{{5, 2, -10}, {8, -4, 7}, {9, 3, 8}};
  EXPECT_EQ(sum_signs(g), (SumVec{3, 1, 1}));
}

TEST(SumSigns, DimensionMismatch) {
  const std::vector<GradVec> g{{1, 2}, {1}};
  EXPECT_THROW(sum_signs(g), DimensionError);
}

TEST(RingFoldSum, FigureInputs) {
  const std::vector<GradVec> g{{5, 2, -10}, {8, -4, 7}, {9, 3, 8}};
  EXPECT_EQ(ring_fold_sum(g, ChunkPlan(3, 3)), (GradVec{22, 1, 5}));
}

TEST(HyperParams, Validation) {
  HyperParams hp;
  hp.n = 10;
  hp.d = 10;
  EXPECT_NO_THROW(hp.validate());
  auto bad = [&](auto mutate) {
    HyperParams h = hp;
    mutate(h);
    EXPECT_THROW(h.validate(), ConfigError);
  };
  bad([](HyperParams& h) { h.n = 0; });
  bad([](HyperParams& h) { h.f = 5; });
  bad([](HyperParams& h) { h.m = 0; });
  bad([](HyperParams& h) { h.lambda = 11; });
  bad([](HyperParams& h) { h.lambda = -11; });
  bad([](HyperParams& h) { h.eta = 0.0; });
  bad([](HyperParams& h) { h.rounds = 0; });
  bad([](HyperParams& h) { h.q = 1.5; });
}
