#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "brace/aggregators.hpp"
#include "brace/core.hpp"
#include "brace/ring.hpp"
#include "brace/tasks.hpp"

using namespace brace;

namespace {

constexpr int kCases = 300;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t between(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }

  // Gaussian entries with exact zeros mixed in.
  GradVec vec(std::size_t d) {
    std::normal_distribution<double> g;
    std::bernoulli_distribution zero(0.05);
    GradVec v(d);
    for (auto& x : v) x = zero(rng) ? 0.0 : g(rng);
    return v;
  }

  std::vector<GradVec> batch(std::size_t n, std::size_t d) {
    std::vector<GradVec> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(vec(d));
    return out;
  }
};

std::vector<GradVec> permuted(std::vector<GradVec> g, std::mt19937_64& rng) {
  std::shuffle(g.begin(), g.end(), rng);
  return g;
}

}  // namespace

TEST(Property, SignIdempotent) {
  Gen gen(1);
  for (int c = 0; c < kCases; ++c) {
    const GradVec g = gen.vec(gen.between(1, 40));
    const SignVec s = sign_quantize(g);
    EXPECT_EQ(sign_quantize(to_grad(s)), s);
  }
}

TEST(Property, PositiveScaleInvariance) {
  Gen gen(2);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = gen.between(1, 9), d = gen.between(n, 30);
    auto g = gen.batch(n, d);
    const int lambda = static_cast<int>(gen.between(0, 2 * n)) - static_cast<int>(n);
    const ChunkPlan plan(d, n);
    const SignVec before = run_brace_round(g, plan, lambda, 32).aggregate;
    for (auto& v : g) {
      const double a = scale(gen.rng);
      for (auto& x : v) x *= a;
    }
    EXPECT_EQ(run_brace_round(g, plan, lambda, 32).aggregate, before);
    EXPECT_EQ(gar_brace_oracle(g, lambda), before);
  }
}

TEST(Property, ConsensusMonotone) {
  Gen gen(3);
  for (int c = 0; c < kCases; ++c) {
    const int n = static_cast<int>(gen.between(1, 20));
    const std::size_t d = gen.between(1, 20);
    SumVec s(d);
    for (auto& x : s) x = static_cast<std::int32_t>(gen.between(0, 2 * n)) - n;
    const int lambda = static_cast<int>(gen.between(0, 2 * n)) - n;
    const SignVec base = consensus_map(s, lambda);
    SumVec up = s;
    for (auto& x : up) x = std::min(n, x + static_cast<std::int32_t>(gen.between(0, 3)));
    const SignVec raised = consensus_map(up, lambda);
    const SignVec stricter = consensus_map(s, lambda + 1);
    for (std::size_t k = 0; k < d; ++k) {
      EXPECT_GE(raised[k], base[k]);
      EXPECT_LE(stricter[k], base[k]);
    }
  }
}

TEST(Property, AggregatorsPermutationInvariant) {
  Gen gen(4);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = gen.between(3, 11), d = gen.between(1, 12);
    const auto g = gen.batch(n, d);
    const auto p = permuted(g, gen.rng);
    EXPECT_EQ(gar_median(p), gar_median(g));
    EXPECT_EQ(gar_signsgd(p), gar_signsgd(g));
    EXPECT_EQ(gar_brace_oracle(p, 1), gar_brace_oracle(g, 1));
    const std::size_t k = gen.between(0, (n - 1) / 2);
    const GradVec a = gar_trimmed_mean(p, k), b = gar_trimmed_mean(g, k);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
    const GradVec ma = gar_mean(p), mb = gar_mean(g);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(ma[j], mb[j], 1e-12);
    const std::size_t f = gen.between(0, n - 3);
    const auto sp = krum_scores(p, f), sg = krum_scores(g, f);
    EXPECT_NEAR(*std::min_element(sp.begin(), sp.end()), *std::min_element(sg.begin(), sg.end()), 1e-9);
    // one neighbour: mutual nearest pairs tie exactly
    if (n - f - 2 >= 2) EXPECT_EQ(gar_krum(p, f), gar_krum(g, f));
  }
}

TEST(Property, LedgerConservation) {
  Gen gen(5);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = gen.between(1, 12), d = gen.between(n, 60);
    const auto g = gen.batch(n, d);
    const ChunkPlan plan(d, n);
    const unsigned m = static_cast<unsigned>(gen.between(min_sum_width(n), 32));
    for (const CommLedger& ledger : {run_rar_round(g, plan, m).ledger, run_brace_round(g, plan, 0, m).ledger,
                                     sc_upload_ledger(n, d, m)}) {
      const auto per = ledger.per_client_bits();
      const std::uint64_t sum = std::accumulate(per.begin(), per.end(), std::uint64_t{0});
      EXPECT_EQ(sum, ledger.total_bits());
      EXPECT_EQ(ledger.phase_bits(Phase::ShareReduce) + ledger.phase_bits(Phase::ShareOnly), ledger.total_bits());
      EXPECT_TRUE(ledger.consistent());
    }
    std::uint64_t traced = 0;
    const auto out = run_brace_round(g, plan, 0, m, [&](const Message& msg) { traced += msg.bits; });
    EXPECT_EQ(traced, out.ledger.total_bits());
  }
}

TEST(Property, ChunkPlanBalancedAndScheduleIsPermutation) {
  Gen gen(6);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = gen.between(1, 16), d = gen.between(n, 100);
    const ChunkPlan plan(d, n);
    std::size_t lo = d, hi = 0, total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      lo = std::min(lo, plan.size(k));
      hi = std::max(hi, plan.size(k));
      total += plan.size(k);
    }
    EXPECT_EQ(total, d);
    EXPECT_LE(hi - lo, 1u);
    for (Phase ph : {Phase::ShareReduce, Phase::ShareOnly}) {
      for (std::size_t s = 1; s < n; ++s) {
        std::vector<std::size_t> chunks;
        for (ClientId i = 0; i < n; ++i) chunks.push_back(schedule_chunk(n, i, s, ph));
        std::sort(chunks.begin(), chunks.end());
        for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(chunks[k], k);
      }
    }
  }
}

TEST(Property, RingAgreesWithCentralized) {
  Gen gen(7);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = gen.between(1, 12), d = gen.between(n, 50);
    const auto g = gen.batch(n, d);
    const ChunkPlan plan(d, n);
    const int lambda = static_cast<int>(gen.between(0, 2 * n)) - static_cast<int>(n);
    const auto brace = run_brace_round(g, plan, lambda, min_sum_width(n));
    EXPECT_EQ(brace.aggregate, gar_brace_oracle(g, lambda));
    for (const auto& out : brace.client_outputs) EXPECT_EQ(out, brace.aggregate);
    const auto rar = run_rar_round(g, plan, 32);
    EXPECT_EQ(rar.aggregate, ring_fold_sum(g, plan));
    for (const auto& buf : rar.client_buffers) EXPECT_EQ(buf, rar.aggregate);
  }
}

TEST(Property, QuadraticSuboptimalityNonNegative) {
  Gen gen(8);
  for (int c = 0; c < 50; ++c) {
    QuadraticParams p;
    p.d = gen.between(1, 10);
    p.n = gen.between(1, 8);
    p.curvature_min = 0.1;
    p.curvature_max = 5.0;
    p.radius = 3.0;
    p.seed = c;
    const QuadraticTask task(p);
    for (int t = 0; t < 20; ++t) {
      GradVec w = gen.vec(p.d);
      for (auto& x : w) x *= 10.0;
      EXPECT_GE(task.suboptimality(w), 0.0);
      EXPECT_GE(task.loss(w) - task.optimum(), -1e-9 * (1.0 + task.loss(w)));
    }
  }
}
