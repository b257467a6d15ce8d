#include "brace/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "brace/adversary.hpp"

namespace brace {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::string_view to_string(MetricKind kind) {
  return kind == MetricKind::TestError ? "test_error" : "suboptimality";
}

namespace {

void check_model(std::span<const double> w, std::size_t d) {
  if (w.size() != d) throw DimensionError(fmt::format("model has {} entries, task expects {}", w.size(), d));
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticTask

QuadraticTask::QuadraticTask(const QuadraticParams& p) {
  if (p.d == 0 || p.n == 0) throw ConfigError("task: quadratic needs positive d and n");
  if (!(p.curvature_min > 0.0) || p.curvature_max < p.curvature_min) {
    throw ConfigError("task: curvature range must satisfy 0 < min <= max");
  }
  if (p.radius < 0.0) throw ConfigError("task.radius: must be non-negative");
  if (p.noise_std < 0.0) throw ConfigError("task.noise: must be non-negative");
  Rng rng = make_rng(p.seed, 101);
  std::uniform_real_distribution<double> curv(p.curvature_min, p.curvature_max);
  std::normal_distribution<double> gauss;
  curvature_.resize(p.d);
  for (auto& a : curvature_) a = curv(rng);
  targets_.assign(p.n, GradVec(p.d));
  for (auto& b : targets_) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : b) {
        v = gauss(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& v : b) v = p.center + p.radius * v / norm;
  }
  noise_std_ = p.noise_std;
  init_.assign(p.d, p.init);
  finish();
}

QuadraticTask::QuadraticTask(GradVec curvature, std::vector<GradVec> targets, double noise_std, GradVec init)
    : curvature_(std::move(curvature)), targets_(std::move(targets)), noise_std_(noise_std), init_(std::move(init)) {
  if (curvature_.empty() || targets_.empty()) throw ConfigError("task: quadratic needs positive d and n");
  for (double a : curvature_)
    if (!(a > 0.0)) throw ConfigError("task: curvature must be positive");
  common_dimension(targets_);
  if (targets_.front().size() != curvature_.size() || init_.size() != curvature_.size()) {
    throw DimensionError("task: quadratic component dimensions disagree");
  }
  finish();
}

void QuadraticTask::finish() {
  minimizer_ = gar_mean(targets_);
  optimum_ = 0.0;
  for (std::size_t i = 0; i < targets_.size(); ++i) optimum_ += local_loss(i, minimizer_);
  optimum_ /= static_cast<double>(targets_.size());
  smoothness_ = *std::max_element(curvature_.begin(), curvature_.end());
}

GradVec QuadraticTask::local_gradient(ClientId client, std::span<const double> w) const {
  check_model(w, dim());
  const auto& b = targets_.at(client);
  GradVec g(dim());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = curvature_[k] * (w[k] - b[k]);
  return g;
}

GradVec QuadraticTask::stochastic_gradient(ClientId client, std::span<const double> w, std::size_t batch_size,
                                           Rng& rng) const {
  GradVec g = local_gradient(client, w);
  if (batch_size == 0 || noise_std_ == 0.0) return g;
  std::normal_distribution<double> noise(0.0, noise_std_ / std::sqrt(static_cast<double>(batch_size)));
  for (auto& v : g) v += noise(rng);
  return g;
}

double QuadraticTask::local_loss(ClientId client, std::span<const double> w) const {
  check_model(w, dim());
  const auto& b = targets_.at(client);
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double r = w[k] - b[k];
    s += curvature_[k] * r * r;
  }
  return 0.5 * s;
}

double QuadraticTask::suboptimality(std::span<const double> w) const {
  check_model(w, dim());
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double r = w[k] - minimizer_[k];
    s += curvature_[k] * r * r;
  }
  return 0.5 * s;
}

double QuadraticTask::loss(std::span<const double> w) const { return optimum_ + suboptimality(w); }

GradVec QuadraticTask::full_gradient(std::span<const double> w) const {
  check_model(w, dim());
  GradVec g(dim());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = curvature_[k] * (w[k] - minimizer_[k]);
  return g;
}

Evaluation QuadraticTask::evaluate(std::span<const double> w) const {
  return {MetricKind::Suboptimality, suboptimality(w)};
}

// ---------------------------------------------------------------------------
// Partitioning

std::vector<std::size_t> client_groups(std::size_t n, int classes) {
  if (classes < 1) throw ConfigError("partition: at least one class required");
  const auto c = static_cast<std::size_t>(classes);
  if (n < c) throw ConfigError(fmt::format("partition: {} clients cannot fill {} groups", n, classes));
  const std::size_t base = n / c;
  const std::size_t extra = n % c;
  std::vector<std::size_t> group(n);
  std::size_t client = 0;
  for (std::size_t g = 0; g < c; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) group[client++] = g;
  }
  return group;
}

std::vector<std::vector<std::size_t>> partition_noniid(std::span<const int> labels, std::size_t n, double q,
                                                       int classes, std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("partition: q must lie in [0, 1]");
  const auto groups = client_groups(n, classes);
  const auto c = static_cast<std::size_t>(classes);
  std::vector<std::vector<ClientId>> members(c);
  for (ClientId i = 0; i < n; ++i) members[groups[i]].push_back(i);

  Rng rng = make_rng(seed, 202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<std::size_t>> shards(n);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const int l = labels[s];
    if (l < 0 || l >= classes) throw ConfigError("partition: label out of range");
    auto home = static_cast<std::size_t>(l);
    std::size_t group = home;
    if (c > 1 && unit(rng) >= q) {
      std::uniform_int_distribution<std::size_t> other(0, c - 2);
      group = other(rng);
      if (group >= home) ++group;
    }
    const auto& m = members[group];
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    shards[m[pick(rng)]].push_back(s);
  }
  return shards;
}

// ---------------------------------------------------------------------------
// ClassificationTask

namespace {

Dataset sample_clusters(const std::vector<GradVec>& means, std::size_t count, double noise, Rng& rng) {
  const auto classes = means.size();
  Dataset data;
  data.features = means.front().size();
  data.x.resize(count * data.features);
  data.y.resize(count);
  std::normal_distribution<double> gauss;
  for (std::size_t i = 0; i < count; ++i) {
    const auto label = static_cast<int>(i % classes);
    data.y[i] = label;
    for (std::size_t j = 0; j < data.features; ++j) {
      data.x[i * data.features + j] = means[static_cast<std::size_t>(label)][j] + noise * gauss(rng);
    }
  }
  return data;
}

Dataset subset(const Dataset& src, std::span<const std::size_t> idx) {
  Dataset out;
  out.features = src.features;
  out.x.reserve(idx.size() * src.features);
  out.y.reserve(idx.size());
  for (auto i : idx) {
    const auto r = src.row(i);
    out.x.insert(out.x.end(), r.begin(), r.end());
    out.y.push_back(src.y[i]);
  }
  return out;
}

}  // namespace

ClassificationTask::ClassificationTask(const ClassificationParams& p) {
  if (p.classes < 2) throw ConfigError("task.classes: need at least two classes");
  if (p.features == 0) throw ConfigError("task.features: must be positive");
  if (p.train_samples == 0 || p.test_samples == 0) throw ConfigError("task: sample pools must be non-empty");
  if (!(p.noise >= 0.0) || !(p.separation > 0.0)) throw ConfigError("task: separation must be positive, noise >= 0");
  classes_ = p.classes;
  features_ = p.features;

  Rng rng = make_rng(p.seed, 303);
  std::normal_distribution<double> gauss;
  std::vector<GradVec> means(static_cast<std::size_t>(classes_), GradVec(features_));
  for (auto& mu : means)
    for (auto& v : mu) v = p.separation * gauss(rng);

  // Separate draws, so the pools never share a sample.
  train_ = sample_clusters(means, p.train_samples, p.noise, rng);
  test_ = sample_clusters(means, p.test_samples, p.noise, rng);

  const auto shards = partition_noniid(train_.y, p.n, p.q, classes_, p.seed);
  shards_.reserve(shards.size());
  for (const auto& idx : shards) shards_.push_back(subset(train_, idx));
}

ClassificationTask ClassificationTask::with_flipped_labels(std::span<const ClientId> clients) const {
  ClassificationTask out = *this;
  for (auto c : clients) {
    auto& shard = out.shards_.at(c);
    shard.y = attack_label_flip(shard.y, classes_);
  }
  return out;
}

void ClassificationTask::accumulate_gradient(std::span<const double> w, const Dataset& data, std::size_t i,
                                             std::span<double> out, std::vector<double>& scores) const {
  const auto x = data.row(i);
  const auto c = static_cast<std::size_t>(classes_);
  scores.resize(c);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c; ++k) {
    double z = 0.0;
    for (std::size_t j = 0; j < features_; ++j) z += w[k * features_ + j] * x[j];
    scores[k] = z;
    top = std::max(top, z);
  }
  double total = 0.0;
  for (auto& z : scores) {
    z = std::exp(z - top);
    total += z;
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double residual = scores[k] / total - (data.y[i] == static_cast<int>(k) ? 1.0 : 0.0);
    for (std::size_t j = 0; j < features_; ++j) out[k * features_ + j] += residual * x[j];
  }
}

GradVec ClassificationTask::local_gradient(ClientId client, std::span<const double> w) const {
  check_model(w, dim());
  const auto& shard = shards_.at(client);
  if (shard.size() == 0) throw ConfigError(fmt::format("client {} holds an empty shard", client));
  GradVec g(dim(), 0.0);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < shard.size(); ++i) accumulate_gradient(w, shard, i, g, scratch);
  for (auto& v : g) v /= static_cast<double>(shard.size());
  return g;
}

GradVec ClassificationTask::stochastic_gradient(ClientId client, std::span<const double> w, std::size_t batch_size,
                                                Rng& rng) const {
  if (batch_size == 0) return local_gradient(client, w);
  check_model(w, dim());
  const auto& shard = shards_.at(client);
  if (shard.size() == 0) throw ConfigError(fmt::format("client {} holds an empty shard", client));
  std::uniform_int_distribution<std::size_t> pick(0, shard.size() - 1);
  GradVec g(dim(), 0.0);
  std::vector<double> scratch;
  for (std::size_t b = 0; b < batch_size; ++b) accumulate_gradient(w, shard, pick(rng), g, scratch);
  for (auto& v : g) v /= static_cast<double>(batch_size);
  return g;
}

double ClassificationTask::local_loss(ClientId client, std::span<const double> w) const {
  check_model(w, dim());
  const auto& shard = shards_.at(client);
  if (shard.size() == 0) throw ConfigError(fmt::format("client {} holds an empty shard", client));
  const auto c = static_cast<std::size_t>(classes_);
  std::vector<double> scores(c);
  double total = 0.0;
  for (std::size_t i = 0; i < shard.size(); ++i) {
    const auto x = shard.row(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) {
      double z = 0.0;
      for (std::size_t j = 0; j < features_; ++j) z += w[k * features_ + j] * x[j];
      scores[k] = z;
      top = std::max(top, z);
    }
    double sum = 0.0;
    for (double z : scores) sum += std::exp(z - top);
    total += top + std::log(sum) - scores[static_cast<std::size_t>(shard.y[i])];
  }
  return total / static_cast<double>(shard.size());
}

double ClassificationTask::loss(std::span<const double> w) const {
  double s = 0.0;
  for (ClientId i = 0; i < clients(); ++i) s += local_loss(i, w);
  return s / static_cast<double>(clients());
}

GradVec ClassificationTask::full_gradient(std::span<const double> w) const {
  GradVec g(dim(), 0.0);
  for (ClientId i = 0; i < clients(); ++i) {
    const GradVec gi = local_gradient(i, w);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k];
  }
  for (auto& v : g) v /= static_cast<double>(clients());
  return g;
}

int ClassificationTask::predict(std::span<const double> w, std::span<const double> x) const {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < classes_; ++k) {
    double z = 0.0;
    for (std::size_t j = 0; j < features_; ++j) z += w[static_cast<std::size_t>(k) * features_ + j] * x[j];
    if (z > best_score) {
      best_score = z;
      best = k;
    }
  }
  return best;
}

Evaluation ClassificationTask::evaluate(std::span<const double> w) const {
  check_model(w, dim());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test_.size(); ++i)
    if (predict(w, test_.row(i)) != test_.y[i]) ++wrong;
  return {MetricKind::TestError, static_cast<double>(wrong) / static_cast<double>(test_.size())};
}

// ---------------------------------------------------------------------------

GradVec apply_update(std::span<const double> w, const Aggregate& aggregate, double eta) {
  if (aggregate.values.size() != w.size()) {
    throw DimensionError(fmt::format("update has {} entries, model has {}", aggregate.values.size(), w.size()));
  }
  GradVec out(w.size());
  if (aggregate.kind == UpdateKind::Step) {
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] - aggregate.values[k];
  } else {
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] - eta * aggregate.values[k];
  }
  return out;
}

void write_shard(std::ostream& os, const Dataset& shard) {
  for (std::size_t i = 0; i < shard.size(); ++i) {
    os << shard.y[i];
    for (double v : shard.row(i)) os << ',' << fmt::format("{}", v);
    os << '\n';
  }
}

}  // namespace brace
