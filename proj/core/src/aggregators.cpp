#include "brace/aggregators.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include <fmt/format.h>

namespace brace {

std::string_view to_string(GarKind kind) {
  switch (kind) {
    case GarKind::Mean: return "mean";
    case GarKind::Krum: return "krum";
    case GarKind::Median: return "median";
    case GarKind::TrimmedMean: return "trimmed_mean";
    case GarKind::SignSGD: return "signsgd";
    case GarKind::RLR: return "rlr";
    case GarKind::BraceOracle: return "brace_oracle";
  }
  return "?";
}

GarKind parse_gar_kind(std::string_view name) {
  for (auto k : {GarKind::Mean, GarKind::Krum, GarKind::Median, GarKind::TrimmedMean, GarKind::SignSGD,
                 GarKind::RLR, GarKind::BraceOracle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown aggregation rule '{}'", name));
}

void GarSpec::validate(std::size_t n) const {
  const auto ni = static_cast<long long>(n);
  switch (kind) {
    case GarKind::Krum:
      if (n < krum_f + 3) throw ConfigError(fmt::format("gar.krum_f: Krum needs n >= f + 3 (n={}, f={})", n, krum_f));
      break;
    case GarKind::TrimmedMean:
      if (n <= 2 * trim_k) throw ConfigError(fmt::format("gar.trim_k: trimmed mean needs n > 2k (n={}, k={})", n, trim_k));
      break;
    case GarKind::RLR:
      if (rlr_theta < 0 || rlr_theta > ni) throw ConfigError("gar.rlr_theta: must lie in [0, n]");
      break;
    case GarKind::BraceOracle:
      if (lambda < -ni || lambda > ni) throw ConfigError("gar.lambda: must lie in [-n, n]");
      break;
    default: break;
  }
}

GradVec gar_mean(std::span<const GradVec> gradients) {
  const std::size_t d = common_dimension(gradients);
  GradVec out(d, 0.0);
  for (const auto& g : gradients)
    for (std::size_t k = 0; k < d; ++k) out[k] += g[k];
  const auto n = static_cast<double>(gradients.size());
  for (auto& v : out) v /= n;
  return out;
}

GradVec gar_mean(std::span<const GradVec> gradients, const ChunkPlan& fold_plan) {
  GradVec out = ring_fold_sum(gradients, fold_plan);
  const auto n = static_cast<double>(gradients.size());
  for (auto& v : out) v /= n;
  return out;
}

namespace {

double squared_distance(const GradVec& a, const GradVec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// Per-coordinate sorted column.
void column(std::span<const GradVec> gradients, std::size_t k, std::vector<double>& out) {
  out.resize(gradients.size());
  for (std::size_t i = 0; i < gradients.size(); ++i) out[i] = gradients[i][k];
  std::sort(out.begin(), out.end());
}

}  // namespace

std::vector<double> krum_scores(std::span<const GradVec> gradients, std::size_t f) {
  common_dimension(gradients);
  const std::size_t n = gradients.size();
  if (n < f + 3) throw ConfigError(fmt::format("Krum needs n >= f + 3 (n={}, f={})", n, f));
  const std::size_t neighbours = n - f - 2;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = squared_distance(gradients[i], gradients[j]);

  std::vector<double> scores(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(dist[i * n + j]);
    std::sort(row.begin(), row.end());
    scores[i] = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
  }
  return scores;
}

std::size_t krum_select(std::span<const GradVec> gradients, std::size_t f) {
  const auto scores = krum_scores(gradients, f);
  // min_element returns the first minimum, i.e. lowest index on ties.
  return static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
}

GradVec gar_krum(std::span<const GradVec> gradients, std::size_t f) {
  return gradients[krum_select(gradients, f)];
}

GradVec gar_median(std::span<const GradVec> gradients) {
  const std::size_t d = common_dimension(gradients);
  const std::size_t n = gradients.size();
  GradVec out(d);
  std::vector<double> col;
  for (std::size_t k = 0; k < d; ++k) {
    column(gradients, k, col);
    out[k] = n % 2 == 1 ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
  }
  return out;
}

GradVec gar_trimmed_mean(std::span<const GradVec> gradients, std::size_t k) {
  const std::size_t d = common_dimension(gradients);
  const std::size_t n = gradients.size();
  if (n <= 2 * k) throw ConfigError(fmt::format("trimmed mean needs n > 2k (n={}, k={})", n, k));
  GradVec out(d);
  std::vector<double> col;
  const auto kept = static_cast<double>(n - 2 * k);
  for (std::size_t j = 0; j < d; ++j) {
    column(gradients, j, col);
    double s = 0.0;
    for (std::size_t i = k; i < n - k; ++i) s += col[i];
    out[j] = s / kept;
  }
  return out;
}

SignVec gar_signsgd(std::span<const GradVec> gradients) {
  const SumVec s = sum_signs(gradients);
  SignVec out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = sign_of(static_cast<double>(s[k]));
  return out;
}

GradVec gar_rlr(std::span<const GradVec> gradients, int theta, double eta) {
  const SumVec s = sum_signs(gradients);
  GradVec step = gar_mean(gradients);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double rate = std::abs(s[k]) >= theta ? eta : -eta;
    step[k] *= rate;
  }
  return step;
}

SignVec gar_brace_oracle(std::span<const GradVec> gradients, int lambda) {
  return consensus_map(sum_signs(gradients), lambda);
}

Aggregate aggregate(const GarSpec& spec, std::span<const GradVec> gradients, double eta) {
  spec.validate(gradients.size());
  switch (spec.kind) {
    case GarKind::Mean:
      if (spec.fold == FoldOrder::Ring) {
        return {UpdateKind::Value, gar_mean(gradients, ChunkPlan(common_dimension(gradients), gradients.size()))};
      }
      return {UpdateKind::Value, gar_mean(gradients)};
    case GarKind::Krum: return {UpdateKind::Value, gar_krum(gradients, spec.krum_f)};
    case GarKind::Median: return {UpdateKind::Value, gar_median(gradients)};
    case GarKind::TrimmedMean: return {UpdateKind::Value, gar_trimmed_mean(gradients, spec.trim_k)};
    case GarKind::SignSGD: return {UpdateKind::Sign, to_grad(gar_signsgd(gradients))};
    case GarKind::RLR: return {UpdateKind::Step, gar_rlr(gradients, spec.rlr_theta, eta)};
    case GarKind::BraceOracle: return {UpdateKind::Sign, to_grad(gar_brace_oracle(gradients, spec.lambda))};
  }
  throw ConfigError("unknown aggregation rule");
}

}  // namespace brace
