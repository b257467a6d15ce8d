#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "brace/aggregators.hpp"
#include "brace/core.hpp"

namespace brace {

using Rng = std::mt19937_64;

// Independent stream `stream` derived from `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

enum class MetricKind : std::uint8_t { TestError, Suboptimality };
std::string_view to_string(MetricKind kind);

struct Evaluation {
  MetricKind kind = MetricKind::TestError;
  double value = 0.0;
};

// A federated objective f(w) = (1/n) sum_i f_i(w) with per-client
// stochastic gradient oracles. Immutable after construction.
class Task {
 public:
  virtual ~Task() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t clients() const = 0;

  // Unbiased estimate of grad f_i(w). batch_size 0 means full batch (exact).
  virtual GradVec stochastic_gradient(ClientId client, std::span<const double> w, std::size_t batch_size,
                                      Rng& rng) const = 0;
  virtual double local_loss(ClientId client, std::span<const double> w) const = 0;
  virtual GradVec local_gradient(ClientId client, std::span<const double> w) const = 0;

  virtual double loss(std::span<const double> w) const = 0;
  virtual GradVec full_gradient(std::span<const double> w) const = 0;
  virtual Evaluation evaluate(std::span<const double> w) const = 0;
  virtual GradVec initial_model() const = 0;
};

struct QuadraticParams {
  std::size_t d = 10;
  std::size_t n = 10;
  double center = 0.0;         // every coordinate of the common target center
  double radius = 1.0;         // client targets lie on a sphere of this radius
  double curvature_min = 1.0;
  double curvature_max = 1.0;
  double noise_std = 0.0;      // per-sample gradient noise; scaled by 1/sqrt(batch)
  double init = 0.0;           // every coordinate of w^1
  std::uint64_t seed = 1;
};

// f_i(w) = 1/2 (w - b_i)^T A (w - b_i) with diagonal A > 0.
class QuadraticTask final : public Task {
 public:
  explicit QuadraticTask(const QuadraticParams& params);
  QuadraticTask(GradVec curvature, std::vector<GradVec> targets, double noise_std, GradVec init);

  std::size_t dim() const override { return curvature_.size(); }
  std::size_t clients() const override { return targets_.size(); }

  GradVec stochastic_gradient(ClientId client, std::span<const double> w, std::size_t batch_size,
                              Rng& rng) const override;
  double local_loss(ClientId client, std::span<const double> w) const override;
  GradVec local_gradient(ClientId client, std::span<const double> w) const override;

  double loss(std::span<const double> w) const override;
  GradVec full_gradient(std::span<const double> w) const override;
  Evaluation evaluate(std::span<const double> w) const override;
  GradVec initial_model() const override { return init_; }

  // f(w) - f*, evaluated as 1/2 (w - w*)^T A (w - w*) so it is never negative.
  double suboptimality(std::span<const double> w) const;

  const GradVec& curvature() const noexcept { return curvature_; }
  const std::vector<GradVec>& targets() const noexcept { return targets_; }
  const GradVec& minimizer() const noexcept { return minimizer_; }
  double optimum() const noexcept { return optimum_; }
  double smoothness() const noexcept { return smoothness_; }

 private:
  void finish();

  GradVec curvature_;
  std::vector<GradVec> targets_;
  double noise_std_ = 0.0;
  GradVec init_;
  GradVec minimizer_;
  double optimum_ = 0.0;
  double smoothness_ = 0.0;
};

struct Dataset {
  std::size_t features = 0;
  std::vector<double> x;  // row-major, size() * features
  std::vector<int> y;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * features, features}; }
};

// Label l lands in group l with probability q and in each other group with
// probability (1-q)/(C-1); within a group the client is uniform. Clients are
// split into C contiguous groups whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> partition_noniid(std::span<const int> labels, std::size_t n, double q,
                                                       int classes, std::uint64_t seed);

// Group index of each client under the split used by partition_noniid.
std::vector<std::size_t> client_groups(std::size_t n, int classes);

struct ClassificationParams {
  int classes = 10;
  std::size_t features = 20;
  std::size_t n = 10;
  std::size_t train_samples = 3000;
  std::size_t test_samples = 1000;
  double separation = 1.0;  // class means ~ N(0, separation^2 I)
  double noise = 1.0;       // within-class standard deviation
  double q = 0.5;           // non-IID degree
  std::uint64_t seed = 1;
};

// Multinomial logistic regression on Gaussian class clusters. The model is
// a row-major (classes x features) weight matrix, d = classes * features.
class ClassificationTask final : public Task {
 public:
  explicit ClassificationTask(const ClassificationParams& params);

  std::size_t dim() const override { return static_cast<std::size_t>(classes_) * features_; }
  std::size_t clients() const override { return shards_.size(); }

  GradVec stochastic_gradient(ClientId client, std::span<const double> w, std::size_t batch_size,
                              Rng& rng) const override;
  double local_loss(ClientId client, std::span<const double> w) const override;
  GradVec local_gradient(ClientId client, std::span<const double> w) const override;

  double loss(std::span<const double> w) const override;
  GradVec full_gradient(std::span<const double> w) const override;
  Evaluation evaluate(std::span<const double> w) const override;
  GradVec initial_model() const override { return GradVec(dim(), 0.0); }

  // Copy in which the listed clients' shards carry flipped labels.
  ClassificationTask with_flipped_labels(std::span<const ClientId> clients) const;

  int classes() const noexcept { return classes_; }
  std::size_t features() const noexcept { return features_; }
  const Dataset& shard(ClientId client) const { return shards_.at(client); }
  const Dataset& train() const noexcept { return train_; }
  const Dataset& test() const noexcept { return test_; }

  int predict(std::span<const double> w, std::span<const double> x) const;

 private:
  ClassificationTask() = default;
  void accumulate_gradient(std::span<const double> w, const Dataset& data, std::size_t i, std::span<double> out,
                           std::vector<double>& scratch) const;

  int classes_ = 0;
  std::size_t features_ = 0;
  Dataset train_;
  Dataset test_;
  std::vector<Dataset> shards_;
};

// w - eta * values (Value, Sign) or w - values (Step).
GradVec apply_update(std::span<const double> w, const Aggregate& aggregate, double eta);

// One line per sample: label, then the feature values.
void write_shard(std::ostream& os, const Dataset& shard);

}  // namespace brace
