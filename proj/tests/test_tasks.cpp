#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "brace/tasks.hpp"
#include "brace/verify/oracles.hpp"

using namespace brace;

namespace {

QuadraticTask small_quadratic(double noise = 0.5) {
  QuadraticParams p;
  p.d = 6;
  p.n = 4;
  p.radius = 2.0;
  p.center = 1.0;
  p.curvature_min = 0.5;
  p.curvature_max = 3.0;
  p.noise_std = noise;
  p.seed = 3;
  return QuadraticTask(p);
}

ClassificationParams small_classification() {
  ClassificationParams p;
  p.classes = 4;
  p.features = 5;
  p.n = 8;
  p.train_samples = 800;
  p.test_samples = 400;
  p.seed = 2;
  return p;
}

}  // namespace

TEST(Quadratic, ZeroGradientAtOwnTarget) {
  const auto task = small_quadratic();
  Rng rng = make_rng(1, 1);
  for (ClientId i = 0; i < task.clients(); ++i) {
    const GradVec g = task.stochastic_gradient(i, task.targets()[i], 0, rng);
    for (double x : g) EXPECT_EQ(x, 0.0);
  }
}

TEST(Quadratic, KnownConstants) {
  const auto task = small_quadratic();
  EXPECT_EQ(task.smoothness(), *std::max_element(task.curvature().begin(), task.curvature().end()));
  EXPECT_EQ(task.suboptimality(task.minimizer()), 0.0);
  EXPECT_EQ(task.evaluate(task.minimizer()).kind, MetricKind::Suboptimality);
  EXPECT_EQ(task.evaluate(task.minimizer()).value, 0.0);
  for (double v : task.full_gradient(task.minimizer())) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_NEAR(task.loss(task.minimizer()), task.optimum(), 1e-12);
}

TEST(Quadratic, SuboptimalityNonNegative) {
  const auto task = small_quadratic();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    GradVec w(task.dim());
    for (auto& x : w) x = g(rng);
    EXPECT_GE(task.suboptimality(w), 0.0);
    EXPECT_NEAR(task.loss(w) - task.optimum(), task.suboptimality(w), 1e-9 * (1 + task.loss(w)));
  }
}

TEST(Quadratic, SmoothnessIsTheLipschitzConstant) {
  // grad f is linear with Jacobian A: the ratio reaches max A along that axis.
  const auto task = small_quadratic();
  const auto& a = task.curvature();
  const std::size_t k = std::max_element(a.begin(), a.end()) - a.begin();
  GradVec w = task.minimizer();
  GradVec v = w;
  v[k] += 1.0;
  const GradVec gw = task.full_gradient(w), gv = task.full_gradient(v);
  double diff = 0.0;
  for (std::size_t j = 0; j < gw.size(); ++j) diff += (gv[j] - gw[j]) * (gv[j] - gw[j]);
  EXPECT_NEAR(std::sqrt(diff), task.smoothness(), 1e-12);
}

TEST(Quadratic, StochasticUnbiased) {
  const auto task = small_quadratic(2.0);
  Rng rng = make_rng(9, 0);
  const GradVec w(task.dim(), 0.3);
  const std::size_t draws = 10'000;
  const std::size_t batch = 4;
  GradVec mean(task.dim(), 0.0);
  for (std::size_t t = 0; t < draws; ++t) {
    const GradVec g = task.stochastic_gradient(1, w, batch, rng);
    for (std::size_t k = 0; k < g.size(); ++k) mean[k] += g[k] / draws;
  }
  const GradVec exact = task.local_gradient(1, w);
  const double stderr_ = 2.0 / std::sqrt(static_cast<double>(batch)) / std::sqrt(static_cast<double>(draws));
  for (std::size_t k = 0; k < mean.size(); ++k) EXPECT_LE(std::abs(mean[k] - exact[k]), 3 * stderr_);
}

TEST(Quadratic, ExplicitConstruction) {
  const QuadraticTask task(GradVec{2.0}, {GradVec{1.0}, GradVec{3.0}}, 0.0, GradVec{0.0});
  EXPECT_EQ(task.minimizer(), (GradVec{2.0}));
  EXPECT_DOUBLE_EQ(task.optimum(), 1.0);  // 1/2 * 2 * 1 averaged over both clients
  EXPECT_DOUBLE_EQ(task.suboptimality(GradVec{0.0}), 4.0);
  EXPECT_THROW(QuadraticTask(GradVec{0.0}, {GradVec{1.0}}, 0.0, GradVec{0.0}), ConfigError);
}

TEST(Partition, GroupFractionMatchesQ) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> label(0, 9);
  std::vector<int> labels(100'000);
  for (auto& l : labels) l = label(rng);
  const std::size_t n = 30;
  const auto parts = partition_noniid(labels, n, 0.5, 10, 7);
  const auto groups = client_groups(n, 10);
  std::size_t home = 0;
  for (ClientId c = 0; c < n; ++c)
    for (auto idx : parts[c]) home += static_cast<std::size_t>(labels[idx]) == groups[c] ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(home) / labels.size(), 0.5, 0.02);
}

TEST(Partition, ConservesAndIsDeterministic) {
  std::vector<int> labels(5000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto a = partition_noniid(labels, 23, 0.7, 10, 3);
  const auto b = partition_noniid(labels, 23, 0.7, 10, 3);
  EXPECT_EQ(a, b);
  std::vector<std::size_t> all;
  for (const auto& p : a) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(labels.size());
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  EXPECT_NE(partition_noniid(labels, 23, 0.7, 10, 4), a);
}

TEST(Partition, DegenerateCases) {
  std::vector<int> labels(2000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 5);
  const auto single = partition_noniid(labels, 5, 1.0, 5, 1);
  for (ClientId c = 0; c < 5; ++c) {
    std::set<int> seen;
    for (auto idx : single[c]) seen.insert(labels[idx]);
    EXPECT_EQ(seen, (std::set<int>{static_cast<int>(c)}));
  }
  // q = 1/C: each group receives every label at the same rate.
  const auto iid = partition_noniid(labels, 5, 0.2, 5, 1);
  for (ClientId c = 0; c < 5; ++c) {
    std::vector<double> count(5, 0.0);
    for (auto idx : iid[c]) count[labels[idx]] += 1.0;
    for (double v : count) EXPECT_NEAR(v / iid[c].size(), 0.2, 0.06);
  }
  EXPECT_THROW(partition_noniid(labels, 5, 1.5, 5, 1), ConfigError);
  EXPECT_THROW(partition_noniid(labels, 5, -0.1, 5, 1), ConfigError);
  EXPECT_THROW(client_groups(4, 5), ConfigError);
  EXPECT_EQ(client_groups(7, 3), (std::vector<std::size_t>{0, 0, 0, 1, 1, 2, 2}));
}

TEST(Classification, Shapes) {
  const ClassificationTask task(small_classification());
  EXPECT_EQ(task.dim(), 20u);
  EXPECT_EQ(task.clients(), 8u);
  std::size_t total = 0;
  for (ClientId c = 0; c < task.clients(); ++c) total += task.shard(c).size();
  EXPECT_EQ(total, task.train().size());
  EXPECT_EQ(task.test().size(), 400u);
}

TEST(Classification, ChanceLevelAtRandomModel) {
  auto p = small_classification();
  p.classes = 10;
  p.n = 10;
  p.test_samples = 5000;
  const ClassificationTask task(p);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  double mean = 0.0;
  const int draws = 20;
  GradVec w(task.dim());
  for (int t = 0; t < draws; ++t) {
    for (auto& x : w) x = g(rng);
    mean += task.evaluate(w).value / draws;
  }
  EXPECT_NEAR(mean, 0.9, 0.05);
  EXPECT_EQ(task.evaluate(w).kind, MetricKind::TestError);
}

TEST(Classification, SeparableTaskTrains) {
  ClassificationParams p;
  p.classes = 2;
  p.features = 4;
  p.n = 2;
  p.separation = 4.0;
  p.noise = 0.5;
  p.seed = 5;
  const ClassificationTask task(p);
  GradVec w = task.initial_model();
  for (int t = 0; t < 300; ++t) {
    const GradVec g = task.full_gradient(w);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= 0.5 * g[k];
  }
  EXPECT_LE(task.evaluate(w).value, 0.05);
}

TEST(Classification, GradientMatchesFiniteDifference) {
  const ClassificationTask task(small_classification());
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int t = 0; t < 10; ++t) {
    GradVec w(task.dim());
    for (auto& x : w) x = g(rng);
    const auto fd = oracle::finite_difference([&](std::span<const double> v) { return task.local_loss(3, v); }, w);
    EXPECT_LE(oracle::relative_error(task.local_gradient(3, w), fd), 1e-5);
  }
}

TEST(Classification, StochasticUnbiased) {
  const ClassificationTask task(small_classification());
  Rng rng = make_rng(4, 4);
  const GradVec w(task.dim(), 0.1);
  const GradVec exact = task.local_gradient(2, w);
  GradVec mean(task.dim(), 0.0);
  const int draws = 20'000;
  for (int t = 0; t < draws; ++t) {
    const GradVec s = task.stochastic_gradient(2, w, 8, rng);
    for (std::size_t k = 0; k < s.size(); ++k) mean[k] += s[k] / draws;
  }
  EXPECT_LE(oracle::relative_error(mean, exact), 0.05);
  EXPECT_EQ(task.stochastic_gradient(2, w, 0, rng), exact);
}

TEST(Classification, LabelFlipOnlyTouchesListed) {
  const ClassificationTask task(small_classification());
  const std::vector<ClientId> bad{1, 5};
  const auto flipped = task.with_flipped_labels(bad);
  for (ClientId c = 0; c < task.clients(); ++c) {
    const bool is_bad = c == 1 || c == 5;
    EXPECT_EQ(flipped.shard(c).x, task.shard(c).x);
    for (std::size_t i = 0; i < task.shard(c).size(); ++i) {
      const int l = task.shard(c).y[i];
      EXPECT_EQ(flipped.shard(c).y[i], is_bad ? 3 - l : l);
    }
  }
  EXPECT_EQ(flipped.test().y, task.test().y);
}

TEST(ApplyUpdate, Examples) {
  const GradVec w{1.0, -2.0, 0.5};
  EXPECT_EQ(apply_update(w, {UpdateKind::Value, GradVec(3, 0.0)}, 0.1), w);
  const GradVec down = apply_update(w, {UpdateKind::Sign, GradVec(3, 1.0)}, 0.1);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(down[k], w[k] - 0.1);
  const GradVec s{1, -1, 1};
  const GradVec back = apply_update(apply_update(w, {UpdateKind::Sign, s}, 0.25),
                                    {UpdateKind::Sign, GradVec{-1, 1, -1}}, 0.25);
  EXPECT_EQ(back, w);
  EXPECT_EQ(apply_update(w, {UpdateKind::Step, GradVec{1, 1, 1}}, 0.1), (GradVec{0.0, -3.0, -0.5}));
  EXPECT_THROW(apply_update(w, {UpdateKind::Value, GradVec(2, 0.0)}, 0.1), DimensionError);
}

TEST(Shard, ExportFormat) {
  Dataset d;
  d.features = 2;
  d.x = {0.5, -1.0, 2.0, 3.25};
  d.y = {1, 0};
  std::ostringstream os;
  write_shard(os, d);
  EXPECT_EQ(os.str(), "1,0.5,-1\n0,2,3.25\n");
}
