#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "brace/adversary.hpp"
#include "brace/aggregators.hpp"

using namespace brace;

namespace {

AttackSpec spec_for(AttackKind kind, std::vector<ClientId> mal) {
  AttackSpec s;
  s.kind = kind;
  s.malicious = std::move(mal);
  return s;
}

double norm(const GradVec& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

GradVec minus(const GradVec& a, const GradVec& b) {
  GradVec o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = a[k] - b[k];
  return o;
}

std::vector<GradVec> random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.5, 1.0);
  std::vector<GradVec> out(n, GradVec(d));
  for (auto& r : out)
    for (auto& x : r) x = g(rng);
  return out;
}

}  // namespace

TEST(Gaussian, SpreadAndDeterminism) {
  const std::vector<GradVec> benign(3, GradVec(1000, 0.0));
  auto s = spec_for(AttackKind::Gaussian, std::vector<ClientId>(100));
  std::iota(s.malicious.begin(), s.malicious.end(), 0);
  const AttackContext ctx{benign, {}, 42};
  const auto a = attack_gaussian(ctx, s);
  const auto b = attack_gaussian(ctx, s);
  EXPECT_EQ(a.malicious, b.malicious);
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& g : a.malicious)
    for (double x : g) {
      sq += x * x;
      ++count;
    }
  EXPECT_EQ(count, 100'000u);
  EXPECT_NEAR(std::sqrt(sq / count), 200.0, 0.02 * 200.0);
  s.sigma = 1e-9;
  for (const auto& g : attack_gaussian(ctx, s).malicious) EXPECT_LT(norm(g), 1e-6);
}

TEST(Trim, DirectionAndInterval) {
  const std::vector<GradVec> benign{{1, -1, -3}, {2, -2, 1}, {4, -5, 2}};
  const auto s = spec_for(AttackKind::TrimAttack, {0, 1});
  const auto res = attack_trim(AttackContext{benign, {}, 3}, s);
  for (const auto& m : res.malicious) {
    // mean > 0 -> push down from the benign min 1 into (0.5, 1).
    EXPECT_GE(m[0], 0.5);
    EXPECT_LE(m[0], 1.0);
    // mean < 0 -> push up from the benign max -1 into (-1, -0.5).
    EXPECT_GE(m[1], -1.0);
    EXPECT_LE(m[1], -0.5);
    // mean 0 -> s = -1, min is -3 -> (-6, -3).
    EXPECT_GE(m[2], -6.0);
    EXPECT_LE(m[2], -3.0);
  }
}

TEST(Trim, ZeroExtreme) {
  const std::vector<GradVec> benign{{0}, {1}, {2}};
  const auto res = attack_trim(AttackContext{benign, {}, 3}, spec_for(AttackKind::TrimAttack, {0}));
  EXPECT_GE(res.malicious[0][0], -1.0);
  EXPECT_LE(res.malicious[0][0], 0.0);
}

TEST(Trim, MovesTrimmedMeanAgainstTheMean) {
  const auto honest = random_set(10, 6, 9);
  const auto s = spec_for(AttackKind::TrimAttack, {2, 7});
  const auto sub = craft_submissions(s, honest, GradVec(6, 0.0), 0, 5);
  std::vector<GradVec> benign;
  for (ClientId i = 0; i < 10; ++i)
    if (i != 2 && i != 7) benign.push_back(honest[i]);
  const GradVec clean = gar_trimmed_mean(std::vector<GradVec>(honest), 2);
  const GradVec attacked = gar_trimmed_mean(sub.gradients, 2);
  const GradVec mu = gar_mean(benign);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_LE(sign_of(mu[k]) * (attacked[k] - clean[k]), 1e-12);
}

TEST(KrumAttack, NoMaliciousNoVectors) {
  const auto benign = random_set(5, 3, 1);
  EXPECT_TRUE(attack_krum(AttackContext{benign, {}, 0}, spec_for(AttackKind::KrumAttack, {})).malicious.empty());
}

TEST(KrumAttack, TightClusterSelectsMalicious) {
  std::vector<GradVec> benign{{1.0, 1.0}, {1.01, 0.99}, {0.99, 1.02}, {1.0, 0.98}};
  const auto s = spec_for(AttackKind::KrumAttack, {4, 5});
  const auto res = attack_krum(AttackContext{benign, {}, 0}, s);
  ASSERT_EQ(res.malicious.size(), 2u);
  EXPECT_FALSE(res.report.degenerate);
  EXPECT_TRUE(res.report.monotone);
  EXPECT_GT(res.report.scale, 0.0);
  std::vector<GradVec> pool = benign;
  pool.insert(pool.end(), res.malicious.begin(), res.malicious.end());
  EXPECT_GE(krum_select(pool, 2), 4u);
  EXPECT_EQ(gar_krum(pool, 2), res.malicious[0]);
}

TEST(MinMax, IdenticalBenign) {
  const std::vector<GradVec> benign(4, GradVec{1, -2});
  const auto res = attack_minmax(AttackContext{benign, {}, 0}, spec_for(AttackKind::MinMax, {4}));
  EXPECT_EQ(res.malicious[0], (GradVec{1, -2}));
}

TEST(MinMax, TwoPointClosedForm) {
  const std::vector<GradVec> benign{{1.0, 2.0, 0.5}, {3.0, -1.0, 1.5}};
  const auto res = attack_minmax(AttackContext{benign, {}, 0}, spec_for(AttackKind::MinMax, {2}));
  const GradVec mu = gar_mean(benign);
  const double inv = 1.0 / std::sqrt(3.0);
  const GradVec p{-sign_of(mu[0]) * inv, -sign_of(mu[1]) * inv, -sign_of(mu[2]) * inv};
  const GradVec diff = minus(benign[1], benign[0]);
  const double a = std::abs(p[0] * diff[0] + p[1] * diff[1] + p[2] * diff[2]);
  const double D = norm(diff);
  const double gamma = (-a + std::sqrt(a * a + 3 * D * D)) / 2;
  EXPECT_NEAR(res.report.scale, gamma, 1e-4 * gamma);
  EXPECT_TRUE(minmax_feasible(benign, res.malicious[0]));
}

TEST(MinSum, ClosedForm) {
  const auto benign = random_set(5, 4, 3);
  const auto res = attack_minsum(AttackContext{benign, {}, 0}, spec_for(AttackKind::MinSum, {5}));
  const GradVec mu = gar_mean(benign);
  double bound = 0.0, base = 0.0;
  for (const auto& gl : benign) {
    double s = 0.0;
    for (const auto& gj : benign) s += std::pow(norm(minus(gl, gj)), 2);
    bound = std::max(bound, s);
    base += std::pow(norm(minus(mu, gl)), 2);
  }
  const double gamma = std::sqrt((bound - base) / 5.0);
  EXPECT_NEAR(res.report.scale, gamma, 1e-4 * gamma);
  EXPECT_TRUE(minsum_feasible(benign, res.malicious[0]));
}

TEST(InverseSign, ConstraintTightness) {
  const auto benign = random_set(6, 5, 11);
  for (auto kind : {AttackKind::MinMax, AttackKind::MinSum}) {
    AttackSpec s = spec_for(kind, {6});
    const auto res = kind == AttackKind::MinMax ? attack_minmax(AttackContext{benign, {}, 0}, s)
                                                : attack_minsum(AttackContext{benign, {}, 0}, s);
    const GradVec mu = gar_mean(benign);
    GradVec p(5);
    for (std::size_t k = 0; k < 5; ++k) p[k] = -sign_of(mu[k]) / std::sqrt(5.0);
    auto at = [&](double gamma) {
      GradVec m(5);
      for (std::size_t k = 0; k < 5; ++k) m[k] = mu[k] + gamma * p[k];
      return m;
    };
    const double g = res.report.scale;
    const bool ok = kind == AttackKind::MinMax ? minmax_feasible(benign, at(g)) : minsum_feasible(benign, at(g));
    const bool beyond = kind == AttackKind::MinMax ? minmax_feasible(benign, at(g * (1 + 10 * s.search_tol)))
                                                   : minsum_feasible(benign, at(g * (1 + 10 * s.search_tol)));
    EXPECT_TRUE(ok);
    EXPECT_FALSE(beyond);
    EXPECT_TRUE(res.report.monotone);
  }
}

TEST(InverseSign, SingleBenignDegenerates) {
  const std::vector<GradVec> benign{{1, 2}};
  const auto res = attack_minmax(AttackContext{benign, {}, 0}, spec_for(AttackKind::MinMax, {1}));
  EXPECT_EQ(res.report.scale, 0.0);
  EXPECT_EQ(res.malicious[0], (GradVec{1, 2}));
}

TEST(Adaptive, FlipsExactlyAtThreshold) {
  // n=5, f=2, S_b=3 (three benign +1), lambda=2.
  const std::vector<GradVec> honest{{1}, {1}, {1}, {1}, {1}};
  const auto s = spec_for(AttackKind::AdaptiveBrace, {3, 4});
  const auto sub = craft_submissions(s, honest, GradVec{0}, 2, 0);
  EXPECT_EQ(sub.gradients[3], (GradVec{-1}));
  EXPECT_EQ(sum_signs(sub.gradients), (SumVec{1}));
  EXPECT_EQ(gar_brace_oracle(sub.gradients, 2), (SignVec{-1}));
}

TEST(Adaptive, SaturatedThresholdHasNoEffect) {
  const auto honest = random_set(7, 4, 2);
  const auto s = spec_for(AttackKind::AdaptiveBrace, {1, 4, 6});
  const auto sub = craft_submissions(s, honest, GradVec(4, 0.0), -7, 0);
  EXPECT_EQ(gar_brace_oracle(sub.gradients, -7), (SignVec{1, 1, 1, 1}));
}

TEST(LabelFlip, Formula) {
  EXPECT_EQ(attack_label_flip(std::vector<int>{0, 1, 1}, 2), (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(attack_label_flip(std::vector<int>{3}, 10), (std::vector<int>{6}));
  EXPECT_THROW(attack_label_flip(std::vector<int>{0}, 1), ConfigError);
}

TEST(Craft, BenignUntouchedAndDeterministic) {
  const auto honest = random_set(9, 5, 4);
  for (auto kind : {AttackKind::Gaussian, AttackKind::TrimAttack, AttackKind::KrumAttack, AttackKind::MinMax,
                    AttackKind::MinSum, AttackKind::AdaptiveBrace, AttackKind::LabelFlip, AttackKind::None}) {
    for (auto knowledge : {Knowledge::Full, Knowledge::BenignOnly}) {
      auto s = spec_for(kind, spread_malicious(9, 3));
      s.knowledge = knowledge;
      const auto a = craft_submissions(s, honest, GradVec(5, 0.0), 1, 77);
      const auto b = craft_submissions(s, honest, GradVec(5, 0.0), 1, 77);
      EXPECT_EQ(a.gradients, b.gradients);
      for (ClientId i = 0; i < 9; ++i) {
        if (std::find(s.malicious.begin(), s.malicious.end(), i) == s.malicious.end()) {
          EXPECT_EQ(a.gradients[i], honest[i]);
        }
      }
    }
  }
}

TEST(Spec, Validation) {
  auto s = spec_for(AttackKind::Gaussian, {0, 1});
  EXPECT_THROW(s.validate(4), ConfigError);
  EXPECT_NO_THROW(s.validate(5));
  s.malicious = {1, 1};
  EXPECT_THROW(s.validate(5), ConfigError);
  s.malicious = {7};
  EXPECT_THROW(s.validate(5), ConfigError);
  s.malicious = {0};
  s.sigma = 0;
  EXPECT_THROW(s.validate(5), ConfigError);
  s.sigma = 1;
  s.trim_b = 1.0;
  EXPECT_THROW(s.validate(5), ConfigError);
  EXPECT_EQ(spread_malicious(30, 6), (std::vector<ClientId>{0, 5, 10, 15, 20, 25}));
}
