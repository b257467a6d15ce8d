#include "brace/core.hpp"

#include <cmath>
#include <string>

namespace brace {

ChunkPlan::ChunkPlan(std::size_t d, std::size_t n) {
  if (d == 0) throw ConfigError("chunk_plan: dimension must be positive");
  if (n == 0) throw ConfigError("chunk_plan: client count must be positive");
  if (n > d) throw ConfigError("chunk_plan: more clients than dimensions");
  const std::size_t base = d / n;
  const std::size_t extra = d % n;
  boundaries_.resize(n + 1);
  boundaries_[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    boundaries_[i + 1] = boundaries_[i] + base + (i < extra ? 1 : 0);
  }
}

ChunkPlan chunk_plan(std::size_t d, std::size_t n) { return ChunkPlan(d, n); }

void HyperParams::validate() const {
  if (n < 1) throw ConfigError("n: at least one client required");
  if (2 * f >= n) throw ConfigError("f: Byzantine count must satisfy f < n/2");
  if (d < 1) throw ConfigError("d: dimension must be positive");
  if (m < 1) throw ConfigError("m: bits per entry must be >= 1");
  const auto ni = static_cast<long long>(n);
  if (lambda < -ni || lambda > ni) throw ConfigError("lambda: must lie in [-n, n]");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta: learning rate must be positive");
  if (rounds < 1) throw ConfigError("rounds: T must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q: non-IID degree must lie in [0, 1]");
}

void require_finite(std::span<const double> g, const char* what) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) {
      throw DimensionError(std::string(what) + ": non-finite entry at index " + std::to_string(k));
    }
  }
}

SignVec sign_quantize(std::span<const double> g) {
  require_finite(g);
  SignVec out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = sign_of(g[k]);
  return out;
}

SumVec sum_signs(std::span<const GradVec> gradients) {
  const std::size_t d = common_dimension(gradients);
  SumVec s(d, 0);
  for (const auto& g : gradients) {
    require_finite(g);
    for (std::size_t k = 0; k < d; ++k) s[k] += sign_of(g[k]);
  }
  return s;
}

SignVec consensus_map(std::span<const std::int32_t> s, int lambda) {
  SignVec out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] > lambda ? 1 : -1;
  return out;
}

GradVec to_grad(std::span<const std::int8_t> s) { return GradVec(s.begin(), s.end()); }

std::size_t common_dimension(std::span<const GradVec> gradients) {
  if (gradients.empty()) throw DimensionError("no gradients supplied");
  const std::size_t d = gradients.front().size();
  if (d == 0) throw DimensionError("gradients must be non-empty");
  for (std::size_t i = 1; i < gradients.size(); ++i) {
    if (gradients[i].size() != d) {
      throw DimensionError("dimension mismatch: client " + std::to_string(i) + " has " +
                           std::to_string(gradients[i].size()) + " entries, expected " +
                           std::to_string(d));
    }
  }
  return d;
}

GradVec ring_fold_sum(std::span<const GradVec> gradients, const ChunkPlan& plan) {
  const std::size_t d = common_dimension(gradients);
  const std::size_t n = gradients.size();
  if (plan.dim() != d || plan.clients() != n) throw DimensionError("ring_fold_sum: plan does not match gradients");
  GradVec sum(d);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = plan.begin(c); k < plan.end(c); ++k) {
      double acc = gradients[c][k];
      for (std::size_t hop = 1; hop < n; ++hop) acc = acc + gradients[(c + hop) % n][k];
      sum[k] = acc;
    }
  }
  return sum;
}

}  // namespace brace
